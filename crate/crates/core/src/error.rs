use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SarError>;

#[derive(Debug, Error)]
pub enum SarError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("payload size mismatch: expected {expected} bytes, found {found}")]
    PayloadSizeMismatch { expected: u64, found: u64 },

    #[error("malformed metadata: {0}")]
    MalformedMetadata(String),

    #[error("metadata/dimension mismatch: {0}")]
    MetadataMismatch(String),

    #[error("invalid SensorParams: {0}")]
    InvalidSensorParams(String),

    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target outside extent: {0}")]
    TargetOutsideExtent(String),

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("range migration {cells:.3} cells exceeds limit of {limit} cells")]
    MigrationExceeded { cells: f64, limit: f64 },

    #[error("chirp longer than range window ({chirp} > {window} samples)")]
    ChirpTooLong { chirp: usize, window: usize },

    #[error("no dominant peak")]
    NoDominantPeak,

    #[error("peak on border (insufficient context): {0}")]
    PeakOnBorder(String),

    #[error("zero-energy input{}", match .index { Some(i) => format!(" at sample {i}"), None => String::new() })]
    ZeroEnergy { index: Option<usize> },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
}

impl SarError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SarError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for violations of a physical validity bound (as opposed to bad
    /// input data or arguments).
    pub fn is_physics_bound(&self) -> bool {
        matches!(self, SarError::MigrationExceeded { .. })
    }
}
