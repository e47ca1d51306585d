//! Shared domain types and the on-disk formats for logs, tag matrices,
//! scenario records and annotations.

pub mod angle;
mod log;
mod matrices;
mod records;
pub mod tags;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use log::{
    load_log, parse_log, save_log, write_log, ObjectCategory, ObjectState, Pose2D, TrackSample,
    TrajectoryLog, DEFAULT_EGO_LENGTH_M, DEFAULT_EGO_WIDTH_M, DEFAULT_RATE_HZ,
};
pub use matrices::{load_tags, parse_tags, save_tags, write_tags, PairTags, TagMatrices, TagRow};
pub use records::{
    load_annotations, load_records, parse_annotations, parse_records, save_annotations,
    save_records, write_annotations, write_records, Annotation, Provenance, ScenarioRecord,
};
pub use tags::{
    DistanceTag, HeadingTag, LatitudeTag, LongitudeTag, PositionTag, RiskLevel, ScenarioCategory,
    TagName,
};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("I/O error: {0}")]
    Write(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

impl ModelError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ModelError::Io { path: path.to_path_buf(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        ModelError::Parse { line, message: message.into() }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Validation { field: field.into(), message: message.into() }
    }

    /// Field named by a validation error.
    pub fn field(&self) -> Option<&str> {
        match self {
            ModelError::Validation { field, .. } => Some(field),
            _ => None,
        }
    }
}

/// Writes through a sibling temp file and renames it over `path`.
pub fn write_atomically<F>(path: &Path, write: F) -> Result<(), ModelError>
where
    F: FnOnce(&mut File) -> Result<(), ModelError>,
{
    let file_name = path
        .file_name()
        .ok_or_else(|| ModelError::validation("path", format!("{} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut file = File::create(&tmp).map_err(|e| ModelError::io(&tmp, e))?;
        write(&mut file)?;
        file.flush()?;
        file.sync_all().map_err(|e| ModelError::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| ModelError::io(path, e))
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
