//! `--n` / `--rho` grid syntax: a single value, a list `2,5,10`, or an
//! inclusive range `start:stop:step`.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T>(pub Vec<T>);

fn decimals(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    mantissa.split_once('.').map_or(0, |(_, frac)| frac.len())
}

impl FromStr for Grid<f64> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("not a number: {t:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("not a finite number: {t:?}"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => {
                let (a, b, h) = (parse(start)?, parse(stop)?, parse(step)?);
                if h <= 0.0 {
                    return Err(format!("step must be positive in {s:?}"));
                }
                if b < a {
                    return Err(format!("empty range {s:?}"));
                }
                let count = ((b - a) / h + 1e-9).floor() as usize + 1;
                if count > 1_000_000 {
                    return Err(format!("range {s:?} has more than 10^6 points"));
                }
                // snap to the decimal precision the user wrote
                let places = decimals(start).max(decimals(step));
                let values = (0..count)
                    .map(|i| {
                        let v = a + i as f64 * h;
                        format!("{v:.places$}").parse().unwrap_or(v)
                    })
                    .collect();
                Ok(Grid(values))
            }
            [_] => s.split(',').map(parse).collect::<Result<_, _>>().map(Grid),
            _ => Err(format!(
                "expected a value, a list a,b,c or a range start:stop:step, got {s:?}"
            )),
        }
    }
}

impl FromStr for Grid<usize> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| -> Result<usize, String> {
            t.trim()
                .parse()
                .map_err(|_| format!("not a nonnegative integer: {t:?}"))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => {
                let (a, b, h) = (parse(start)?, parse(stop)?, parse(step)?);
                if h == 0 {
                    return Err(format!("step must be positive in {s:?}"));
                }
                if b < a {
                    return Err(format!("empty range {s:?}"));
                }
                if (b - a) / h >= 1_000_000 {
                    return Err(format!("range {s:?} has more than 10^6 points"));
                }
                Ok(Grid((a..=b).step_by(h).collect()))
            }
            [_] => s.split(',').map(parse).collect::<Result<_, _>>().map(Grid),
            _ => Err(format!(
                "expected a value, a list a,b,c or a range start:stop:step, got {s:?}"
            )),
        }
    }
}
