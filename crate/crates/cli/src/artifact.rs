use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, Formats};
use crate::error::{CliError, CliResult};

/// A written file, identified by its path relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// File contents produced by a stage, not yet on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: String,
    pub format: Format,
    pub bytes: Vec<u8>,
}

impl Output {
    pub fn csv(name: impl Into<String>, table: CsvTable) -> Self {
        Self {
            name: name.into(),
            format: Format::Csv,
            bytes: table.text.into_bytes(),
        }
    }

    pub fn json(name: impl Into<String>, value: &impl Serialize) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("serialisable value");
        text.push('\n');
        Self {
            name: name.into(),
            format: Format::Json,
            bytes: text.into_bytes(),
        }
    }

    pub fn svg(name: impl Into<String>, text: String) -> Self {
        Self {
            name: name.into(),
            format: Format::Svg,
            bytes: text.into_bytes(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Numeric CSV text with a header row. Values use the shortest
/// representation that reads back exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            let _ = write!(self.text, "{v:?}");
        }
        self.text.push('\n');
    }
}

/// Writes artifacts into one directory and records their hashes.
#[derive(Debug)]
pub struct Sink {
    dir: PathBuf,
    formats: Formats,
    artifacts: Vec<Artifact>,
}

impl Sink {
    pub fn create(dir: &Path, formats: Formats) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            formats,
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn into_artifacts(self) -> Vec<Artifact> {
        self.artifacts
    }

    /// Writes `out` unless its format is disabled. The file appears under
    /// its final name only once complete.
    pub fn put(&mut self, out: &Output) -> CliResult<()> {
        if !self.formats.enabled(out.format) {
            return Ok(());
        }
        self.write_raw(&out.name, &out.bytes)
    }

    /// Records a failed stage next to whatever it managed to write.
    pub fn mark_failed(&mut self, stem: &str, message: &str) -> CliResult<()> {
        self.write_raw(&format!("{stem}.failed"), format!("{message}\n").as_bytes())
    }

    /// Removes a marker left by an earlier failed run of the same stage.
    pub fn clear_failed(&self, stem: &str) -> CliResult<()> {
        let path = self.dir.join(format!("{stem}.failed"));
        match fs::remove_file(&path) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(CliError::io(&path, e)),
            _ => Ok(()),
        }
    }

    /// Writes a file that is not listed among the artifacts.
    pub fn put_unlisted(&self, name: &str, bytes: &[u8]) -> CliResult<()> {
        atomic_write(&self.dir.join(name), bytes)
    }

    fn write_raw(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        atomic_write(&self.dir.join(name), bytes)?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_values_round_trip() {
        let mut t = CsvTable::new(&["a", "b"]);
        let v = [0.1 + 0.2, 1e-12];
        t.row(&v);
        let line = t.text.lines().nth(1).unwrap().to_string();
        let back: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(back, v);
    }

    #[test]
    fn disabled_formats_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::create(dir.path(), vec![Format::Json].into()).unwrap();
        sink.put(&Output::csv("a.csv", CsvTable::new(&["x"]))).unwrap();
        sink.put(&Output::json("a.json", &1)).unwrap();
        assert_eq!(sink.artifacts().len(), 1);
        assert!(!dir.path().join("a.csv").exists());
        assert_eq!(std::fs::read_to_string(dir.path().join("a.json")).unwrap(), "1\n");
    }
}
