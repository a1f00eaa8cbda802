//! Run reports and output directory handling.

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Key/value record of one run: parameters, dof counts, timings and
/// solution summaries, in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub subcommand: String,
    entries: Vec<(String, String)>,
}

impl RunReport {
    pub fn new(subcommand: &str) -> Self {
        RunReport {
            subcommand: subcommand.to_string(),
            entries: Vec::new(),
        }
    }

    /// Adds or replaces `key`.
    pub fn set(&mut self, key: &str, value: impl Display) {
        let v = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = v,
            None => self.entries.push((key.to_string(), v)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "subcommand,{}", csv_field(&self.subcommand));
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{},{}", csv_field(k), csv_field(v));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = format!("galerkin {}\n", self.subcommand);
        for (k, v) in &self.entries {
            let _ = writeln!(s, "  {k:<width$}  {v}");
        }
        s
    }

    /// Writes `report.csv` and `report.txt`.
    pub fn write(&self, out: &OutDir) -> Result<()> {
        out.write("report.csv", &self.to_csv())?;
        out.write("report.txt", &self.to_text())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// An output directory, created on demand. Existing files are only
/// replaced with `force`.
#[derive(Debug, Clone)]
pub struct OutDir {
    path: PathBuf,
    force: bool,
}

impl OutDir {
    pub fn create(path: impl AsRef<Path>, force: bool) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        fs::create_dir_all(&path).with_context(|| format!("cannot create output directory {}", path.display()))?;
        Ok(OutDir { path, force })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Path for a new output file; fails if it exists and `force` is off.
    pub fn file(&self, name: &str) -> Result<PathBuf> {
        let p = self.path.join(name);
        if p.exists() && !self.force {
            bail!("{} already exists; pass --force to overwrite", p.display());
        }
        Ok(p)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<()> {
        let p = self.file(name)?;
        fs::write(&p, contents).with_context(|| format!("cannot write {}", p.display()))
    }

    /// Checks every name up front so a run does not fail after the solve.
    pub fn check(&self, names: &[&str]) -> Result<()> {
        for n in names {
            self.file(n)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("galerkin-report-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn csv_and_text() {
        let mut r = RunReport::new("demo");
        r.set("n", 10);
        r.set("values", "1,2");
        r.set("n", 12);
        assert_eq!(r.to_csv(), "key,value\nsubcommand,demo\nn,12\nvalues,\"1,2\"\n");
        assert!(r.to_text().contains("values  1,2"));
        assert_eq!(r.get_f64("n"), Some(12.0));
    }

    #[test]
    fn refuses_overwrite_without_force() {
        let d = scratch("force");
        let out = OutDir::create(d.join("nested"), false).unwrap();
        out.write("a.txt", "x").unwrap();
        assert!(out.write("a.txt", "y").is_err());
        let forced = OutDir::create(d.join("nested"), true).unwrap();
        forced.write("a.txt", "y").unwrap();
        assert_eq!(fs::read_to_string(d.join("nested/a.txt")).unwrap(), "y");
        let _ = fs::remove_dir_all(&d);
    }
}
