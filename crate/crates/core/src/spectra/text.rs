//! Columnar text form of a spectrum.
//!
//! ```text
//! # geometry=interval:DN:1 omega_max=10
//! omega,multiplicity,flags
//! 1.5707963267948966,1,-
//! ```
//!
//! Geometry tags are `interval:<LR>:<a>`, `star:<D|N>:<a1;a2;...>` and
//! `box:<conducting|permeable>:<a;b1;b2>`. Floats use the shortest
//! representation that round-trips.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{BoundaryCondition, BoxSpec, Geometry, IntervalSpec, Mode, Spectrum, StarGraphSpec, WallModel};
use crate::error::{Error, Result};

pub const COLUMNS: &str = "omega,multiplicity,flags";

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Interval(s) => write!(f, "interval:{}:{}", s.code(), s.length()),
            Geometry::Star(s) => {
                write!(f, "star:{}:", s.piston().letter())?;
                write_list(f, s.edge_lengths())
            }
            Geometry::Box(s) => {
                write!(f, "box:{}:", s.wall())?;
                write_list(f, &s.sides())
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, values: &[f64]) -> fmt::Result {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            f.write_char(';')?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("bad {what} '{field}'")))
}

fn parse_list(field: &str) -> Result<Vec<f64>> {
    field.split(';').map(|v| parse_f64(v, "length")).collect()
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        let mut parts = tag.splitn(3, ':');
        let (kind, kind_arg, lengths) = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(a), Some(l)) => (k, a, l),
            _ => return Err(Error::invalid(format!("malformed geometry tag '{tag}'"))),
        };
        match kind {
            "interval" => {
                let mut letters = kind_arg.chars();
                let (left, right) = match (letters.next(), letters.next(), letters.next()) {
                    (Some(l), Some(r), None) => (l, r),
                    _ => return Err(Error::invalid(format!("bad interval ends '{kind_arg}'"))),
                };
                let left = left.to_string().parse::<BoundaryCondition>()?;
                let right = right.to_string().parse::<BoundaryCondition>()?;
                let a = parse_f64(lengths, "length")?;
                Ok(Geometry::Interval(IntervalSpec::new(a, left, right)?))
            }
            "star" => {
                let piston = kind_arg.parse::<BoundaryCondition>()?;
                Ok(Geometry::Star(StarGraphSpec::new(parse_list(lengths)?, piston)?))
            }
            "box" => {
                let wall = kind_arg.parse::<WallModel>()?;
                match parse_list(lengths)?.as_slice() {
                    &[a, b1, b2] => Ok(Geometry::Box(BoxSpec::new(a, b1, b2, wall)?)),
                    _ => Err(Error::invalid("box tag needs exactly three sides")),
                }
            }
            other => Err(Error::invalid(format!("unknown geometry kind '{other}'"))),
        }
    }
}

impl Spectrum {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * (self.modes().len() + 2));
        let _ = writeln!(out, "# geometry={} omega_max={}", self.geometry(), self.omega_max());
        out.push_str(COLUMNS);
        out.push('\n');
        for m in self.modes() {
            let flag = if m.zero_mode { "zero" } else { "-" };
            let _ = writeln!(out, "{},{},{}", m.omega, m.multiplicity, flag);
        }
        out
    }

    /// Parse the columnar text form; all `Spectrum` invariants are re-checked.
    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { line, message };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
        let body = header
            .strip_prefix("# ")
            .ok_or_else(|| err(1, "header must start with '# '".into()))?;
        let mut geometry = None;
        let mut omega_max = None;
        for field in body.split_whitespace() {
            match field.split_once('=') {
                Some(("geometry", v)) if geometry.is_none() => {
                    geometry = Some(v.parse::<Geometry>().map_err(|e| err(1, e.to_string()))?)
                }
                Some(("omega_max", v)) if omega_max.is_none() => {
                    omega_max = Some(parse_f64(v, "omega_max").map_err(|e| err(1, e.to_string()))?)
                }
                _ => return Err(err(1, format!("unexpected header field '{field}'"))),
            }
        }
        let geometry = geometry.ok_or_else(|| err(1, "missing geometry".into()))?;
        let omega_max = omega_max.ok_or_else(|| err(1, "missing omega_max".into()))?;

        match lines.next() {
            Some((_, COLUMNS)) => {}
            Some((n, other)) => return Err(err(n, format!("expected column header, got '{other}'"))),
            None => return Err(err(2, "missing column header".into())),
        }

        let mut modes = Vec::new();
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (w, m, flag) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(w), Some(m), Some(f), None) => (w, m, f),
                _ => return Err(err(n, "expected three columns".into())),
            };
            let omega = parse_f64(w, "omega").map_err(|e| err(n, e.to_string()))?;
            let multiplicity = m
                .parse::<u32>()
                .map_err(|_| err(n, format!("bad multiplicity '{m}'")))?;
            let zero_mode = match flag {
                "zero" => true,
                "-" => false,
                other => return Err(err(n, format!("unknown flag '{other}'"))),
            };
            modes.push(Mode {
                omega,
                multiplicity,
                zero_mode,
            });
        }
        Spectrum::new(geometry, modes, omega_max)
    }
}
