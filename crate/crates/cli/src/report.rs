use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ball_ergodic::ergodicity::{write_traces_csv, ConvergenceTrace};

/// How a command ended, mapped onto the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Definitive,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Definitive => 0,
            Outcome::Inconclusive => 2,
        }
    }
}

#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub outcome: Outcome,
    text: String,
    pub traces: Vec<ConvergenceTrace>,
    /// Extra artifacts written next to the report.
    pub files: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            outcome: Outcome::Definitive,
            text: String::new(),
            traces: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Appends a `key: value` line.
    pub fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.text, "{key}: {value}").expect("writing to a String");
    }

    pub fn raw(&mut self, text: &str) {
        self.text.push_str(text);
        if !text.ends_with('\n') {
            self.text.push('\n');
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Writes `config.json`, `<command>.txt`, `<command>_traces.csv` when
    /// there are traces, and the extra files. Returns the paths written.
    pub fn write(&self, dir: &Path, canonical_config: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
            Ok(())
        };
        put("config.json", canonical_config.as_bytes())?;
        put(&format!("{}.txt", self.command), self.text.as_bytes())?;
        if !self.traces.is_empty() {
            let path = dir.join(format!("{}_traces.csv", self.command));
            let mut buf = Vec::new();
            write_traces_csv(&self.traces, &mut buf).with_context(|| format!("writing {}", path.display()))?;
            put(&format!("{}_traces.csv", self.command), &buf)?;
        }
        for (name, bytes) in &self.files {
            put(name, bytes)?;
        }
        Ok(written)
    }
}
