//! Output-directory plumbing: CSV files with round-trip-safe floats and
//! pretty JSON summaries. Nothing here writes timestamps, so identical
//! configs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// 17 significant digits: round-trip safe for 64-bit floats.
pub fn fmt_float(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("OU_SPECTRAL_OUTDIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ou-spectral-out"))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), content)
        .map_err(|e| CliError::Config(format!("cannot write {name}: {e}")))
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize {name}: {e}")))?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub struct CsvWriter {
    lines: Vec<String>,
}

impl CsvWriter {
    pub fn new(header: &str) -> Self {
        CsvWriter {
            lines: vec![header.to_string()],
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn finish(self, dir: &Path, name: &str) -> Result<(), CliError> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        write_text(dir, name, &text)
    }
}
