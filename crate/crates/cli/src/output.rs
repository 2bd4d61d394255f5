use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| io_error(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a sibling temporary file and a rename, so a reader never
/// sees a half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable manifest");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Conventions {
    pub f1: &'static str,
    pub variance: &'static str,
    pub scoring: &'static str,
    pub standardization: &'static str,
    pub importance: &'static str,
    pub normalization: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    f1: "macro average over classes present in y",
    variance: "population",
    scoring: "test predictions pooled over folds, scored once",
    standardization: "per-column z-score fitted on training rows of each fold",
    importance: "models trained once on the full standardized dataset",
    normalization: "min-max per (target, method)",
};

/// Everything needed to repeat a run. The recorded command omits `--out`
/// and `--threads`, which do not affect results.
#[derive(Debug, Serialize)]
pub struct RunManifest<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub input: InputRecord,
    pub conventions: Conventions,
    pub run: T,
}

impl<T: Serialize> RunManifest<T> {
    pub fn new(command: String, seed: u64, input: InputRecord, run: T) -> Self {
        Self {
            tool: "juicespec",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            input,
            conventions: CONVENTIONS,
            run,
        }
    }
}
