use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;

/// Gridded conductivity samples `f(s_i, u_j)` with bilinear interpolation.
///
/// CSV layout: header `s,u,f`, one row per node, row-major (all `u` for the
/// first `s`, then the next `s`), both axes strictly ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductivityTable<T> {
    s_axis: Vec<T>,
    u_axis: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> ConductivityTable<T> {
    pub fn new(s_axis: Vec<T>, u_axis: Vec<T>, values: Vec<T>) -> Result<Self> {
        let table_err = |message: String| Error::Table { line: 0, message };
        if s_axis.len() < 2 || u_axis.len() < 2 {
            return Err(table_err("each axis needs at least 2 nodes".into()));
        }
        if values.len() != s_axis.len() * u_axis.len() {
            return Err(table_err(format!(
                "{} values for a {}x{} grid",
                values.len(),
                s_axis.len(),
                u_axis.len()
            )));
        }
        for (name, axis) in [("s", &s_axis), ("u", &u_axis)] {
            if axis.windows(2).any(|w| !(w[1] > w[0])) || axis.iter().any(|x| !x.is_finite()) {
                return Err(table_err(format!("{name} axis is not strictly ascending")));
            }
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= T::zero()) || !v.is_finite()) {
            return Err(table_err(format!("value {bad} is negative or not finite")));
        }
        Ok(Self { s_axis, u_axis, values })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| Error::Table {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Table {
            line: 1,
            message: e.to_string(),
        })?;
        if header.iter().collect::<Vec<_>>() != ["s", "u", "f"] {
            return Err(Error::Table {
                line: 1,
                message: format!(
                    "header must be `s,u,f`, found `{}`",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }

        let mut s_axis: Vec<T> = Vec::new();
        let mut u_axis: Vec<T> = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut column = 0usize;
        let mut u_axis_done = false;
        for record in rdr.records() {
            let record = record.map_err(|e| Error::Table {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let err = |message: String| Error::Table { line, message };
            let field = |i: usize, name: &str| -> Result<T> {
                let raw = record.get(i).unwrap_or("");
                raw.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| err(format!("{name} = `{raw}` is not a finite number")))
            };
            let (s, u, f) = (field(0, "s")?, field(1, "u")?, field(2, "f")?);
            if f < T::zero() {
                return Err(err(format!("f = {f} is negative")));
            }

            if s_axis.last() != Some(&s) {
                // a new s row starts
                if let Some(&prev) = s_axis.last() {
                    u_axis_done = true;
                    if column != u_axis.len() {
                        return Err(err(format!(
                            "row s = {prev} has {column} u nodes, expected {}",
                            u_axis.len()
                        )));
                    }
                    if !(s > prev) {
                        return Err(err(format!("s = {s} does not ascend after {prev}")));
                    }
                }
                s_axis.push(s);
                column = 0;
            }
            if !u_axis_done {
                if let Some(&prev) = u_axis.last() {
                    if !(u > prev) {
                        return Err(err(format!("u = {u} does not ascend after {prev}")));
                    }
                }
                u_axis.push(u);
            } else if u_axis.get(column) != Some(&u) {
                return Err(err(format!("u = {u} does not match the u axis of the first row")));
            }
            values.push(f);
            column += 1;
        }
        if column != u_axis.len() {
            return Err(Error::Table {
                line: 0,
                message: format!("last row has {column} u nodes, expected {}", u_axis.len()),
            });
        }
        Self::new(s_axis, u_axis, values)
    }

    pub fn s_axis(&self) -> &[T] {
        &self.s_axis
    }

    pub fn u_axis(&self) -> &[T] {
        &self.u_axis
    }

    pub fn contains(&self, s: T, u: T) -> bool {
        s >= self.s_axis[0]
            && s <= self.s_axis[self.s_axis.len() - 1]
            && u >= self.u_axis[0]
            && u <= self.u_axis[self.u_axis.len() - 1]
    }

    pub fn eval(&self, s: T, u: T) -> Result<T> {
        if !self.contains(s, u) {
            return Err(Error::TableOutOfRange {
                s: s.as_f64(),
                u: u.as_f64(),
            });
        }
        let (i, ws) = locate(&self.s_axis, s);
        let (j, wu) = locate(&self.u_axis, u);
        let nu = self.u_axis.len();
        let at = |a: usize, b: usize| self.values[a * nu + b];
        let lo = at(i, j) + wu * (at(i, j + 1) - at(i, j));
        let hi = at(i + 1, j) + wu * (at(i + 1, j + 1) - at(i + 1, j));
        Ok(lo + ws * (hi - lo))
    }
}

/// Cell index and fractional position of `x` on an ascending axis.
fn locate<T: Real>(axis: &[T], x: T) -> (usize, T) {
    let i = axis.partition_point(|&a| a <= x).clamp(1, axis.len() - 1) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}
