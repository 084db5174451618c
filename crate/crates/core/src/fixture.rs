//! Self-describing text fixtures for instances and diagnostic dumps.
//!
//! Layout: a header line `mtlb-fixture v1 <kind>`, then `name = value`
//! scalar lines, then `matrix <name> <rows> <cols>` blocks with one
//! whitespace-separated row per line. Numbers are written with Rust's
//! shortest round-trip float formatting, so parsing reproduces the exact
//! f64 bits that were written.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mat::Matrix;

const HEADER: &str = "mtlb-fixture v1";

/// Ordered bag of named scalars and matrices.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub kind: String,
    scalars: Vec<(String, f64)>,
    matrices: Vec<(String, Matrix)>,
}

impl Fixture {
    pub fn new(kind: &str) -> Self {
        Fixture {
            kind: kind.to_string(),
            scalars: Vec::new(),
            matrices: Vec::new(),
        }
    }

    pub fn push_scalar(&mut self, name: &str, value: f64) {
        self.scalars.push((name.to_string(), value));
    }

    pub fn push_matrix(&mut self, name: &str, m: Matrix) {
        self.matrices.push((name.to_string(), m));
    }

    pub fn scalar(&self, name: &str) -> Result<f64> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Parse(format!("fixture has no scalar `{name}`")))
    }

    pub fn count(&self, name: &str) -> Result<usize> {
        let v = self.scalar(name)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Parse(format!("scalar `{name}` = {v} is not a count")));
        }
        Ok(v as usize)
    }

    pub fn matrix(&self, name: &str) -> Result<&Matrix> {
        self.matrices
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Parse(format!("fixture has no matrix `{name}`")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push(' ');
        out.push_str(&self.kind);
        out.push('\n');
        for (name, value) in &self.scalars {
            out.push_str(&format!("{name} = {value}\n"));
        }
        for (name, m) in &self.matrices {
            out.push_str(&format!("matrix {name} {} {}\n", m.rows(), m.cols()));
            for i in 0..m.rows() {
                let row: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, first) = lines
            .next()
            .ok_or_else(|| Error::Parse("empty fixture".into()))?;
        let kind = first
            .strip_prefix(HEADER)
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .ok_or_else(|| Error::Parse(format!("bad fixture header: `{first}`")))?;
        let mut fx = Fixture::new(kind);

        let mut pending: Option<(String, usize, usize, Vec<f64>)> = None;
        for (lineno, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some((name, rows, cols, ref mut data)) = pending {
                let before = data.len();
                for tok in line.split_whitespace() {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad number `{tok}`", lineno + 1)))?;
                    data.push(v);
                }
                if data.len() - before != cols {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} entries in matrix row",
                        lineno + 1,
                        cols
                    )));
                }
                if data.len() == rows * cols {
                    let data = std::mem::take(data);
                    fx.matrices.push((name, Matrix::from_vec(rows, cols, data)?));
                    pending = None;
                } else {
                    pending = Some((name, rows, cols, std::mem::take(data)));
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("matrix ") {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!(
                        "line {}: matrix header needs `matrix name rows cols`",
                        lineno + 1
                    )));
                }
                let rows: usize = parts[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad row count", lineno + 1)))?;
                let cols: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad col count", lineno + 1)))?;
                if rows * cols == 0 {
                    fx.matrices
                        .push((parts[0].to_string(), Matrix::zeros(rows, cols)));
                } else {
                    pending = Some((parts[0].to_string(), rows, cols, Vec::new()));
                }
            } else if let Some((name, value)) = line.split_once('=') {
                let v: f64 = value.trim().parse().map_err(|_| {
                    Error::Parse(format!("line {}: bad scalar `{}`", lineno + 1, value.trim()))
                })?;
                fx.scalars.push((name.trim().to_string(), v));
            } else {
                return Err(Error::Parse(format!(
                    "line {}: unrecognized fixture line `{line}`",
                    lineno + 1
                )));
            }
        }
        if pending.is_some() {
            return Err(Error::Parse("fixture ends inside a matrix block".into()));
        }
        Ok(fx)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Fixture::from_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_and_matrix_round_trip_is_exact() {
        let mut fx = Fixture::new("demo");
        fx.push_scalar("x", 0.1 + 0.2); // not representable "nicely"
        fx.push_scalar("n", 42.0);
        let m = Matrix::from_vec(2, 3, vec![1.0, -2.5e-17, 3.0, 0.1, 1e300, -0.0]).unwrap();
        fx.push_matrix("m", m.clone());

        let parsed = Fixture::from_text(&fx.to_text()).unwrap();
        assert_eq!(parsed.kind, "demo");
        assert_eq!(parsed.scalar("x").unwrap().to_bits(), (0.1 + 0.2f64).to_bits());
        assert_eq!(parsed.count("n").unwrap(), 42);
        let got = parsed.matrix("m").unwrap();
        for (a, b) in got.data().iter().zip(m.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_truncated_matrix_block() {
        let text = "mtlb-fixture v1 demo\nmatrix m 2 2\n1 2\n";
        assert!(Fixture::from_text(text).is_err());
    }

    #[test]
    fn rejects_garbage_lines() {
        let text = "mtlb-fixture v1 demo\nwhat is this\n";
        assert!(Fixture::from_text(text).is_err());
    }
}
