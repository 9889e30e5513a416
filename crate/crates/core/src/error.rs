use std::path::PathBuf;

use thiserror::Error;

use crate::model::{Violation, ViolationCode};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("bpm must be positive and finite, got {0}")]
    InvalidBpm(f64),
    #[error("unsupported meter {0} (only 3 or 4 beats per bar)")]
    UnsupportedMeter(i64),
    #[error("unknown video genre {0:?}")]
    UnknownVideoGenre(String),
    #[error("{0}")]
    Invalid(Violation),
}

impl ModelError {
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::InvalidBpm(_) => ViolationCode::InvalidBpm.as_str(),
            ModelError::UnsupportedMeter(_) => ViolationCode::UnsupportedMeter.as_str(),
            ModelError::UnknownVideoGenre(_) => "unknown-video-genre",
            ModelError::Invalid(v) => v.code.as_str(),
        }
    }
}

/// Failure to turn a clip bundle document into a valid [`crate::ClipBundle`].
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("syntax error at line {line}, column {column} (field `{path}`): {message}")]
    Syntax {
        line: usize,
        column: usize,
        path: String,
        message: String,
    },
    #[error("invalid bundle: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<Violation>),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    /// Short machine-readable code; semantic errors report their first violation.
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::Syntax { .. } => "syntax-error",
            IngestError::Semantic(v) => v.first().map_or("invalid-bundle", |v| v.code.as_str()),
            IngestError::Io { .. } => "io-error",
        }
    }

    pub fn is_semantic(&self) -> bool {
        matches!(self, IngestError::Semantic(_))
    }
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest header must be `clip_id,bundle_path,music_genre,video_genre`, got `{0}`")]
    BadHeader(String),
    #[error("line {line}: missing column `{column}`")]
    MissingColumn { line: u64, column: &'static str },
    #[error("line {line}: unknown video genre {genre:?}")]
    UnknownVideoGenre { line: u64, genre: String },
    #[error("line {line}: duplicate clip id {clip_id:?}")]
    DuplicateClipId { line: u64, clip_id: String },
    #[error("line {line}: empty clip id")]
    EmptyClipId { line: u64 },
    #[error("malformed manifest: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ManifestError {
    pub fn code(&self) -> &'static str {
        match self {
            ManifestError::BadHeader(_) => "bad-header",
            ManifestError::MissingColumn { .. } => "missing-column",
            ManifestError::UnknownVideoGenre { .. } => "unknown-video-genre",
            ManifestError::DuplicateClipId { .. } => "duplicate-clip-id",
            ManifestError::EmptyClipId { .. } => "empty-clip-id",
            ManifestError::Csv(_) => "malformed-csv",
            ManifestError::Io { .. } => "io-error",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    InvalidThreshold(f64),
    #[error("sigma and truncation must be positive, got sigma {sigma}, truncation {truncation}")]
    InvalidWindow { sigma: f64, truncation: f64 },
    #[error("anchor at {time_s} s lies outside the curve (0..={duration_s} s)")]
    AnchorOutsideCurve { time_s: f64, duration_s: f64 },
    #[error("cannot take the mode of an empty duration list")]
    EmptyDurations,
    #[error("frame rate must be positive, got {0}")]
    InvalidFrameRate(f64),
    #[error("search half-window must be positive, got {0}")]
    InvalidHalfWindow(f64),
    #[error("no candidates to rank")]
    NoCandidates,
}

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("cannot summarize an empty list")]
    EmptyInput,
    #[error("invalid figure window {start_s}..{end_s} for a clip of {duration_s} s")]
    InvalidWindow {
        start_s: f64,
        end_s: f64,
        duration_s: f64,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible synthetic spec: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
