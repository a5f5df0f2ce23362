//! CSV emission. Numbers use Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::path::{Path, PathBuf};

use orthodac::SampledWaveform;

use crate::error::{CliError, Result};

pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || (1e-4..1e7).contains(&v.abs()) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

/// A CSV file held in memory until every computation has finished.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column `name` parsed as numbers; empty cells become `None`.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].parse().ok()).collect())
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}.csv", self.name));
        let io = |e: csv::Error| match e.into_kind() {
            csv::ErrorKind::Io(e) => CliError::io(&path, e),
            other => CliError::io(&path, std::io::Error::other(format!("{other:?}"))),
        };
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// `t_s, value` or, with a quadrature component, `t_s, value, value_q`.
pub fn waveform_table(name: &str, i: &SampledWaveform, q: Option<&SampledWaveform>) -> Table {
    let mut t = if q.is_some() {
        Table::new(name, &["t_s", "value", "value_q"])
    } else {
        Table::new(name, &["t_s", "value"])
    };
    for (n, v) in i.samples().iter().enumerate() {
        let mut row = vec![fmt_num(i.time(n)), fmt_num(*v)];
        if let Some(q) = q {
            row.push(fmt_num(q.samples()[n]));
        }
        t.push(row);
    }
    t
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_is_plain_or_exponent() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(-12.25), "-12.25");
        assert_eq!(fmt_num(1.5e-12), "1.5e-12");
        assert_eq!(fmt_num(6e10), "6e10");
        assert_eq!(fmt_opt(None), "");
    }

    #[test]
    fn table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), "".into()]);
        let p = t.write(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "a,b\n1,\n");
        assert_eq!(t.column("b").unwrap(), vec![None]);
    }
}
