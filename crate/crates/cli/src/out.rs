use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use delaywave_core::output::fmt_num;
use sha2::{Digest, Sha256};

/// Output directory plus the header block stamped on every file.
pub struct Sink {
    pub dir: PathBuf,
    pub header: Vec<(String, String)>,
}

impl Sink {
    pub fn new(dir: &Path, command: &str, seed: u64, hash_input: &str) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let digest = hex::encode(Sha256::digest(hash_input.as_bytes()));
        let header = vec![
            ("tool".to_string(), format!("delaywave {}", env!("CARGO_PKG_VERSION"))),
            ("command".to_string(), command.to_string()),
            ("config_sha256".to_string(), digest),
            ("seed".to_string(), seed.to_string()),
        ];
        Ok(Self { dir: dir.to_path_buf(), header })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Creates `name` (and parent directories) and hands a buffered writer to `body`.
    pub fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf> {
        let path = self.path(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        body(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Key/value report with the header block as comments.
    pub fn write_report(&self, name: &str, lines: &[(String, String)]) -> Result<PathBuf> {
        self.write(name, |w| {
            for (k, v) in &self.header {
                writeln!(w, "# {k}: {v}")?;
            }
            for (k, v) in lines {
                writeln!(w, "{k} = {v}")?;
            }
            Ok(())
        })
    }
}

/// Collects `key = value` report lines.
#[derive(Default)]
pub struct Report {
    pub lines: Vec<(String, String)>,
}

impl Report {
    pub fn add(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn add_num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.add(key, fmt_num(value))
    }

    pub fn add_nums(&mut self, key: impl Into<String>, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
        self.add(key, format!("[{}]", joined.join(", ")))
    }

    pub fn add_list<T: std::fmt::Display>(&mut self, key: impl Into<String>, values: &[T]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.add(key, format!("[{}]", joined.join(", ")))
    }
}
