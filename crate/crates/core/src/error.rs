use thiserror::Error;

pub type Result<T> = std::result::Result<T, StabError>;

#[derive(Debug, Error)]
pub enum StabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate triangle {face} (area {area:e})")]
    DegenerateTriangle { face: usize, area: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point location failed for point {0:?}")]
    PointLocation([f64; 3]),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("config error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("config key `{key}`: {msg}")]
    ConfigValue { key: String, msg: String },

    #[error("unknown config key `{key}`{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    UnknownKey { key: String, suggestion: Option<String> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
