//! Deterministic file output.
//!
//! Numbers are written as the shortest decimal that parses back to the same
//! `f64`. Magnitudes in `[1e-5, 1e16)` and zero use plain notation, anything
//! else uses exponent notation (`1.5e-7`). JSON goes through `serde_json`,
//! which applies the same shortest round-trip rule.
//!
//! Commands build every output in memory as a [`Bundle`] and write it only
//! after all validation has passed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

/// Shortest round-trip decimal for `x`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Comma-separated text with a header row and `\n` line endings.
pub fn csv_text<R, C>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = C>,
    C: IntoIterator<Item = Cell>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(Cell::render).collect();
        w.write_record(&cells).map_err(csv_error)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> crate::Error {
    std::io::Error::other(e.to_string()).into()
}

/// Whitespace-separated `x y` columns for gnuplot, `#` header.
pub fn columns_text(header: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("# {header}\n");
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&fmt_num(*x));
        out.push(' ');
        out.push_str(&fmt_num(*y));
        out.push('\n');
    }
    out
}

/// Pretty-printed JSON with a trailing newline.
pub fn json_text<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Num(x) => fmt_num(x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Files to be written together, relative to an output directory.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Bundle {
    files: Vec<(PathBuf, String)>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<PathBuf>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn files(&self) -> &[(PathBuf, String)] {
        &self.files
    }

    /// Create `dir` if needed and write every file into it.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -2.5,
            0.1,
            1.0 / 3.0,
            1e-7,
            6.02e23,
            123456.789,
            -1e-300,
        ] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(1.5e-7), "1.5e-7");
    }

    #[test]
    fn csv_layout() {
        let text = csv_text(
            &["a", "b"],
            vec![
                vec![Cell::Num(1.0), Cell::from("x")],
                vec![Cell::Num(0.5), Cell::Int(3)],
            ],
        )
        .unwrap();
        assert_eq!(text, "a,b\n1,x\n0.5,3\n");
    }

    #[test]
    fn columns_layout() {
        assert_eq!(
            columns_text("t c", &[1.0, 2.0], &[0.5, -0.25]),
            "# t c\n1 0.5\n2 -0.25\n"
        );
    }
}
