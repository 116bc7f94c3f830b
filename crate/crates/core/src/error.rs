use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unsupported magic number at byte {offset}: only P2 and P5 grayscale PGM are accepted")]
    UnsupportedMagic { offset: usize },

    #[error("malformed PGM header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },

    #[error("truncated PGM data at byte {offset}: expected {expected} samples, found {found}")]
    TruncatedData {
        offset: usize,
        expected: usize,
        found: usize,
    },

    #[error("malformed PGM data at byte {offset}: {reason}")]
    MalformedData { offset: usize, reason: String },

    #[error("image has zero total mass")]
    ZeroMassImage,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no bisector: one weighted cell swallows the other (|w_i - w_j| >= |s_i - s_j|)")]
    EmptyBisector,

    #[error("coincident sites have no bisector")]
    CoincidentSites,

    #[error("endpoint is off the bisector branch (transformed x = {x})")]
    EndpointOffCurve { x: f64 },

    #[error("unbalanced transport problem: source mass {source_mass}, sink mass {sink_mass}")]
    Unbalanced { source_mass: f64, sink_mass: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
