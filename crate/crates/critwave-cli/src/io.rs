use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// Scientific notation with 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `bytes` to `path` through a temporary file in the same directory,
/// then rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot create a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Numeric table with named columns.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row.iter().map(|&x| sci(x)).collect());
    }

    /// Row with a leading text field.
    pub fn push_labeled(&mut self, label: &str, row: &[f64]) {
        let mut r = vec![label.to_string()];
        r.extend(row.iter().map(|&x| sci(x)));
        self.rows.push(r);
    }

    pub fn to_bytes(&self) -> anyhow::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        Ok(w.into_inner()?)
    }

    /// To `path` atomically, or to stdout.
    pub fn emit(&self, path: Option<&Path>) -> anyhow::Result<()> {
        let bytes = self.to_bytes()?;
        match path {
            Some(p) => write_atomic(p, &bytes),
            None => Ok(std::io::stdout().write_all(&bytes)?),
        }
    }
}

pub fn json_bytes<S: Serialize>(value: &S) -> anyhow::Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// JSON to `path` atomically, or to stdout.
pub fn emit_json<S: Serialize>(value: &S, path: Option<&Path>) -> anyhow::Result<()> {
    let bytes = json_bytes(value)?;
    match path {
        Some(p) => write_atomic(p, &bytes),
        None => Ok(std::io::stdout().write_all(&bytes)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
        assert_eq!(sci(-32.0), "-3.2000000000000000e1");
        assert_eq!(sci(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(&[1.0, 2.5]);
        t.push_labeled("x", &[0.0]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2.5000000000000000e0\nx,0.0000000000000000e0\n");
    }

    #[test]
    fn atomic_write_replaces_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.json");
        std::fs::write(&p, "old").unwrap();
        write_atomic(&p, b"new").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
