use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a weight: {0}")]
    NotAWeight(String),
    #[error("invalid weight spec `{spec}`: {reason}")]
    WeightSpec { spec: String, reason: String },
    #[error("regularity undefined for tables")]
    RegularityUndefined,
    #[error("weight `{0}` fails the regularity condition")]
    IrregularWeight(String),
    #[error("quadrature did not converge (partial value {partial}, relative tail {tail:e})")]
    QuadratureNonConvergence { partial: f64, tail: f64 },
    #[error("quadrature order {order} is below the required {required}")]
    QuadratureOrder { order: usize, required: usize },
    #[error("series truncation needs K >= {suggested}")]
    TruncationTooShort { suggested: usize },
    #[error("truncation cap of {cap} terms exceeded")]
    TruncationCap { cap: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },
    #[error("gap condition violated at position {index}: {next} < {lambda} * {prev}")]
    GapViolation {
        index: usize,
        prev: u64,
        next: u64,
        lambda: f64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of a numerical procedure (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::TruncationCap { .. }
                | Error::TruncationTooShort { .. }
        )
    }
}
