//! Deterministic dataset writing: shortest round-trip float formatting,
//! one header line per CSV, atomic temp-and-rename file replacement.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;

/// Shortest representation that parses back to the same f64.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV table held as formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Writes `bytes` to `dir/name` via a temporary file in the same directory.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Output directory and dataset format for one run.
#[derive(Debug, Clone)]
pub struct Outputs {
    pub dir: PathBuf,
    pub format: Format,
}

impl Outputs {
    pub fn new(dir: PathBuf, format: Format) -> Self {
        Self { dir, format }
    }

    /// Main dataset: `stem.csv` from the table, or `stem.json` from `rows`.
    pub fn dataset<T: Serialize + ?Sized>(&self, stem: &str, table: &Table, rows: &T) -> std::io::Result<PathBuf> {
        match self.format {
            Format::Csv => write_atomic(&self.dir, &format!("{stem}.csv"), table.to_csv().as_bytes()),
            Format::Json => write_atomic(&self.dir, &format!("{stem}.json"), to_json(rows).as_bytes()),
        }
    }

    /// JSON report written regardless of format.
    pub fn json<T: Serialize + ?Sized>(&self, stem: &str, value: &T) -> std::io::Result<PathBuf> {
        write_atomic(&self.dir, &format!("{stem}.json"), to_json(value).as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_has_one_header_line() {
        let mut t = Table::new(&["a", "b"]);
        t.row(vec![num(1.0), num(2.5)]);
        assert_eq!(t.to_csv(), "a,b\n1.0,2.5\n");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "x.txt", b"one").unwrap();
        let p = write_atomic(dir.path(), "x.txt", b"two").unwrap();
        assert_eq!(std::fs::read(p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
