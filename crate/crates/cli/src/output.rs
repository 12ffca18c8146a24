use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Formats `x` with 9 significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..9).contains(&mag) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A CSV table preceded by `#` metadata lines.
#[derive(Debug, Default)]
pub struct Table {
    meta: Vec<String>,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// A cell value.
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) {
        self.meta.push(line.into());
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let row = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => sig9(x),
                Cell::Int(i) => i.to_string(),
                Cell::Text(t) => t,
            })
            .collect();
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        let _ = writeln!(out, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.join(","));
        }
        out
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text),
            None => std::io::stdout().lock().write_all(text.as_bytes()),
        }
    }
}

/// Compact `param/log2M` list of a search trace.
pub fn trace_line(trace: &[(f64, f64)]) -> String {
    trace
        .iter()
        .map(|(p, v)| format!("{}/{}", sig9(*p), sig9(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.9003189), "0.9003189");
        assert_eq!(sig9(-0.848519876543), "-0.848519877");
        assert_eq!(sig9(1234.56789012), "1234.56789");
        assert_eq!(sig9(3.0), "3");
        assert_eq!(sig9(1.5e-7), "1.50000000e-7");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn renders_metadata_then_rows() {
        let mut t = Table::new(&["a", "b"]);
        t.meta("seed: 1");
        t.row(vec![1usize.into(), 0.5.into()]);
        assert_eq!(t.render(), "# seed: 1\na,b\n1,0.5\n");
    }
}
