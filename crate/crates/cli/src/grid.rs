//! Sweep grids: comma-separated items, each a number or a range.
//!
//! * `1.5` a single value
//! * `1..6` integers from 1 to 6 inclusive
//! * `0.5..2:4` four evenly spaced values including both ends
//! * `0.01..50:9:log` nine geometrically spaced values

use thiserror::Error;

/// Upper bound on the number of points one grid may expand to.
pub const MAX_GRID_POINTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("empty grid")]
    Empty,
    #[error("bad number '{0}'")]
    Number(String),
    #[error("bad range '{0}': {1}")]
    Range(String, &'static str),
    #[error("grid expands to more than {MAX_GRID_POINTS} points")]
    TooLarge,
}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError::Number(s.trim().to_string()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GridError::Number(s.trim().to_string()))
    }
}

fn range(item: &str, lo: &str, rest: &str, out: &mut Vec<f64>) -> Result<(), GridError> {
    let bad = |why| GridError::Range(item.to_string(), why);
    let mut parts = rest.split(':');
    let hi = number(parts.next().unwrap_or_default())?;
    let count = parts.next();
    let log = match parts.next() {
        None => false,
        Some("log") => true,
        Some(_) => return Err(bad("spacing must be 'log'")),
    };
    if parts.next().is_some() {
        return Err(bad("too many ':' fields"));
    }
    let lo_value = number(lo)?;
    match count {
        None => {
            if lo_value.fract() != 0.0 || hi.fract() != 0.0 {
                return Err(bad("a range without a count needs integer ends"));
            }
            if hi < lo_value {
                return Err(bad("upper end below lower end"));
            }
            if hi - lo_value >= MAX_GRID_POINTS as f64 || out.len() + (hi - lo_value) as usize >= MAX_GRID_POINTS {
                return Err(GridError::TooLarge);
            }
            let mut v = lo_value;
            while v <= hi {
                out.push(v);
                v += 1.0;
            }
        }
        Some(c) => {
            let n: usize = c.trim().parse().map_err(|_| bad("count must be a positive integer"))?;
            if n == 0 {
                return Err(bad("count must be a positive integer"));
            }
            if out.len() + n > MAX_GRID_POINTS {
                return Err(GridError::TooLarge);
            }
            if log && !(lo_value > 0.0 && hi > 0.0) {
                return Err(bad("log spacing needs positive ends"));
            }
            if n == 1 {
                if lo_value != hi {
                    return Err(bad("a single point needs equal ends"));
                }
                out.push(lo_value);
                return Ok(());
            }
            for k in 0..n {
                let f = k as f64 / (n - 1) as f64;
                let v = if k == n - 1 {
                    hi
                } else if log {
                    lo_value * (hi / lo_value).powf(f)
                } else {
                    lo_value + (hi - lo_value) * f
                };
                out.push(v);
            }
        }
    }
    Ok(())
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>, GridError> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(GridError::Empty);
        }
        match item.split_once("..") {
            Some((lo, rest)) => range(item, lo, rest, &mut out)?,
            None => {
                if out.len() >= MAX_GRID_POINTS {
                    return Err(GridError::TooLarge);
                }
                out.push(number(item)?)
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forms() {
        assert_eq!(parse_grid("1,2,4").unwrap(), vec![1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("1..6").unwrap(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(parse_grid("0..1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        let log = parse_grid("0.01..100:5:log").unwrap();
        for (x, y) in log.iter().zip([0.01, 0.1, 1.0, 10.0, 100.0]) {
            assert!((x - y).abs() < 1e-12 * y);
        }
        assert_eq!(parse_grid(" 3 , 1..2 ").unwrap(), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects() {
        for bad in [
            "",
            "1,,2",
            "x",
            "1..",
            "1.5..3",
            "3..1",
            "1..2:0",
            "1..2:3:lin",
            "-1..2:3:log",
            "1..2:3:log:x",
            "nan",
            "inf",
            "0..1e9",
        ] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn never_panics(s in ".{0,40}") {
            let _ = parse_grid(&s);
        }

        #[test]
        fn ranges_hit_both_ends(lo in 0.01f64..10.0, span in 0.01f64..10.0, n in 2usize..50, log in any::<bool>()) {
            let hi = lo + span;
            let text = format!("{lo}..{hi}:{n}{}", if log { ":log" } else { "" });
            let g = parse_grid(&text).unwrap();
            prop_assert_eq!(g.len(), n);
            prop_assert_eq!(g[0], lo);
            prop_assert_eq!(g[n - 1], hi);
            prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
