//! Plain-text dataset format.
//!
//! ```text
//! hamming 4 2
//! 0 1 1 0
//! 1 1 1 1
//! ```
//!
//! The header is `mode dim n` with mode `hamming` or `lp:<p>`; each following
//! line holds one point's whitespace-separated coordinates.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::metric::{Dataset, Metric, Point};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_metric(s: &str) -> Result<Metric> {
    if s == "hamming" {
        return Metric::Hamming.validate();
    }
    if let Some(p) = s.strip_prefix("lp:") {
        let p: f64 = p
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad lp exponent in {s:?}")))?;
        return Metric::Lp(p).validate();
    }
    Err(Error::InvalidParameter(format!(
        "unknown metric {s:?}; expected hamming or lp:<p>"
    )))
}

pub fn read_dataset(r: impl BufRead) -> Result<Dataset> {
    let mut lines = r
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [mode, dim, n] = fields.as_slice() else {
        return Err(parse_err(1, "header must be `mode dim n`"));
    };
    let metric = parse_metric(mode).map_err(|e| parse_err(1, e.to_string()))?;
    let dim: usize = dim.parse().map_err(|_| parse_err(1, "bad dimension"))?;
    let n: usize = n.parse().map_err(|_| parse_err(1, "bad point count"))?;
    let mut ds = Dataset::new(metric, dim).map_err(|e| parse_err(1, e.to_string()))?;
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != dim {
            return Err(parse_err(
                lineno,
                format!("expected {dim} coordinates, found {}", toks.len()),
            ));
        }
        let p = match metric {
            Metric::Hamming => {
                let bits = toks
                    .iter()
                    .map(|t| match *t {
                        "0" => Ok(0u8),
                        "1" => Ok(1u8),
                        _ => Err(parse_err(lineno, format!("hamming coordinate {t:?} is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Point::bits(&bits)?
            }
            Metric::Lp(_) => {
                let xs = toks
                    .iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| parse_err(lineno, format!("bad coordinate {t:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Point::real(xs)
            }
        };
        ds.push(p).map_err(|e| parse_err(lineno, e.to_string()))?;
    }
    if ds.len() != n {
        return Err(parse_err(1, format!("header declares {n} points, found {}", ds.len())));
    }
    Ok(ds)
}

/// Writes the live points in id order.
pub fn write_dataset(ds: &Dataset, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {} {}", ds.metric(), ds.dim(), ds.len())?;
    for (_, p) in ds.iter() {
        writeln!(w, "{}", p.render())?;
    }
    Ok(())
}
