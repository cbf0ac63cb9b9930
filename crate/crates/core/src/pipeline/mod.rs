//! End-to-end experiment stages behind the command-line tool: synthesis,
//! augmentation, per-family training, comparison and reporting.

pub mod commands;
pub mod compare;
pub mod config;
pub mod manifest;
pub mod svg;
pub mod train;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::DataError;
use crate::evalstat::{ModelError, StatsError};

pub use commands::{
    cmd_augment, cmd_compare, cmd_report, cmd_synth, cmd_train, cmd_validate, AugmentSummary, DatasetSummary, Workspace,
};
pub use compare::{compare_reports, Comparison};
pub use config::ExperimentConfig;
pub use manifest::{ExperimentManifest, StageRecord};
pub use svg::{emit_scatter_svg, PlotLabels, Scatter};
pub use train::{train_family, TrainOutcome, VariantSummary};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", located(path, source))]
    DataFile { path: PathBuf, source: DataError },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("{path} differs from the manifest: expected sha256 {expected}, got {found}")]
    Irreproducible {
        path: String,
        expected: String,
        found: String,
    },
}

/// `file:line: message` for record-level errors, `file: message` otherwise.
fn located(path: &Path, err: &DataError) -> String {
    match err {
        DataError::Record { line, record, source } => {
            format!("{}:{line}: record {record}: {source}", path.display())
        }
        DataError::Parse { line, column, message } => {
            format!("{}:{line}: column `{column}`: {message}", path.display())
        }
        other => format!("{}: {other}", path.display()),
    }
}

impl PipelineError {
    /// Process exit code: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) => 1,
            PipelineError::DataFile { .. }
            | PipelineError::Data(_)
            | PipelineError::Io { .. }
            | PipelineError::Stats(_)
            | PipelineError::InvalidInput(_) => 2,
            PipelineError::Model { source, .. } => {
                if source.is_numerical() {
                    3
                } else {
                    2
                }
            }
            PipelineError::Numerical(_) | PipelineError::Irreproducible { .. } => 3,
        }
    }

    pub(crate) fn model(context: impl Into<String>, source: ModelError) -> Self {
        PipelineError::Model {
            context: context.into(),
            source,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_to_string(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `bytes` to a temporary sibling and renames it over `path`, so
/// readers never observe a partially written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
