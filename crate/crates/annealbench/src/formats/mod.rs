//! On-disk formats: schedules, shot archives, histograms, reports and
//! chain embeddings.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{AppError, Result};

pub mod archive;
pub mod chain;
pub mod histogram;
pub mod schedule;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| AppError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| AppError::format(path, None, e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

/// Maps a csv error onto a located format error.
pub(crate) fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let line = e.position().map(|p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => AppError::io(path, io),
        csv::ErrorKind::Deserialize { err, .. } => AppError::format(path, line, err.to_string()),
        other => AppError::format(path, line, format!("{other:?}")),
    }
}
