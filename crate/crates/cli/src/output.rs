//! Artifact writers: CSV with a commented provenance header, and JSON wrapped
//! with the same provenance object.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v)
    } else {
        v.to_string()
    }
}

pub struct Provenance {
    pub command: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": "nlbeam",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
        })
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# nlbeam {} {}", env!("CARGO_PKG_VERSION"), self.command);
        let _ = writeln!(s, "# config {}", self.config);
        s
    }
}

pub struct Writer {
    dir: PathBuf,
    prov: Provenance,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(dir: &Path, prov: Provenance) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            prov,
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    /// Numeric table; `columns` are written in order, rows formatted with [`num`].
    pub fn csv(&mut self, name: &str, columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        self.csv_text(
            name,
            columns,
            rows.into_iter().map(|r| r.into_iter().map(num).collect()),
        )
    }

    pub fn csv_text(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let mut s = self.prov.csv_header();
        s.push_str(&columns.join(","));
        s.push('\n');
        for r in rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        self.put(name, &s)
    }

    pub fn json(&mut self, name: &str, result: &impl Serialize) -> Result<()> {
        let doc = serde_json::json!({ "provenance": self.prov.json(), "result": result });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        self.put(name, &s)
    }

    pub fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        self.put(name, body)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5967e10, 1e-300, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.0 / 3.0), "3.3333333333333331e-1");
    }
}
