//! Row-oriented results and their CSV, JSON and tidy plot encodings.

use std::io::Write;

use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Na,
}

impl Cell {
    pub fn float(v: f64) -> Self {
        if v.is_finite() {
            Cell::Float(v)
        } else {
            Cell::Na
        }
    }

    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::float)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            // `{:?}` is the shortest representation that round-trips
            Cell::Float(f) => format!("{f:?}"),
            Cell::Text(s) => s.clone(),
            Cell::Na => "NA".to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(f) => json!(f),
            Cell::Text(s) => json!(s),
            Cell::Na => Value::Null,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(i) => Some(*i as f64),
            Cell::Float(f) => Some(*f),
            _ => None,
        }
    }
}

/// How `--format plotdata` reshapes a table: one `(x, y, series)` record
/// per numeric cell of each `y` column, series named `column` or
/// `column|group=value`.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub x: &'static str,
    pub y: &'static [&'static str],
    pub group: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    pub plot: PlotSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

impl Table {
    pub fn new(command: &'static str, columns: &'static [&'static str], plot: PlotSpec) -> Self {
        Self {
            command,
            columns,
            rows: Vec::new(),
            plot,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn index(&self, name: &str) -> usize {
        self.columns
            .iter()
            .position(|c| *c == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
            Format::Plotdata => self.write_plot(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let doc = json!({
            "command": self.command,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        });
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)
    }

    fn write_plot<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "series"])?;
        let x = self.index(self.plot.x);
        let group = self.plot.group.map(|g| (g, self.index(g)));
        for &col in self.plot.y {
            let y = self.index(col);
            for row in &self.rows {
                let (Some(xv), Some(yv)) = (row[x].as_f64(), row[y].as_f64()) else {
                    continue;
                };
                let series = match group {
                    Some((name, g)) => format!("{col}|{name}={}", row[g].csv()),
                    None => col.to_string(),
                };
                w.write_record([format!("{xv:?}"), format!("{yv:?}"), series])?;
            }
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(
            "demo",
            &["n", "rho", "value", "note"],
            PlotSpec {
                x: "n",
                y: &["value"],
                group: Some("rho"),
            },
        );
        t.push(vec![
            Cell::Int(2),
            Cell::float(0.1 + 0.2),
            Cell::float(1.0 / 3.0),
            Cell::text("a,b"),
        ]);
        t.push(vec![Cell::Int(3), Cell::float(0.5), Cell::float(f64::NAN), Cell::Na]);
        t
    }

    fn render(t: &Table, f: Format) -> String {
        let mut buf = Vec::new();
        t.write(f, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn csv_quotes_and_round_trips() {
        let s = render(&sample(), Format::Csv);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "n,rho,value,note");
        assert_eq!(lines[1], "2,0.30000000000000004,0.3333333333333333,\"a,b\"");
        assert_eq!(lines[2], "3,0.5,NA,NA");
        assert_eq!("0.30000000000000004".parse::<f64>().unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn json_uses_null_for_na() {
        let v: Value = serde_json::from_str(&render(&sample(), Format::Json)).unwrap();
        assert_eq!(v["rows"][1][2], Value::Null);
        assert_eq!(v["rows"][0][2].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["columns"][3], "note");
    }

    #[test]
    fn plotdata_is_tidy() {
        let s = render(&sample(), Format::Plotdata);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            lines,
            vec!["x,y,series", "2.0,0.3333333333333333,value|rho=0.30000000000000004"]
        );
    }
}
