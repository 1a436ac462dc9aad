use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use modeflux::config::hash_hex;
use modeflux::ModeState;

use crate::CliError;

/// CSV text with `#` provenance lines, a header row and data rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(hash: &[u8; 32], header: &[String]) -> Self {
        let mut text = format!("# config_hash={}\n", hash_hex(hash));
        text += &header.join(",");
        text.push('\n');
        Csv { text }
    }

    pub fn comment(&mut self, line: &str) {
        // comments go before the header
        let at = self.text.find('\n').map_or(0, |i| i + 1);
        self.text.insert_str(at, &format!("# {line}\n"));
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Mode states joined by spaces, safe inside a CSV cell.
pub fn set_cell(set: &[ModeState]) -> String {
    set.iter().map(|s| s.ell().to_string()).collect::<Vec<_>>().join(" ")
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `table.csv` → `table-outage.csv`.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}
