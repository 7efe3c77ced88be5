use thiserror::Error;

/// Errors produced by the geometry routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Evaluation time outside `[0, sup)` of a geodesic's maximal domain.
    #[error("t = {t} outside geodesic domain [0, {sup}){}", cell_suffix(*.cell))]
    OutOfDomain {
        t: f64,
        sup: f64,
        cell: Option<usize>,
    },

    /// Target metric not in the range of the exponential map.
    #[error("tr((H^T)^2) = {value} not below range limit {limit}{}", cell_suffix(*.cell))]
    OutOfRange {
        value: f64,
        limit: f64,
        cell: Option<usize>,
    },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The summability certificate failed; the evidence carries the tail bounds.
    #[error("sequence failed the Cauchy certificate: {reason}")]
    NotCauchySequence {
        reason: String,
        tail_bounds: Vec<f64>,
    },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

fn cell_suffix(cell: Option<usize>) -> String {
    match cell {
        Some(c) => format!(" at cell {c}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Attach a cell index to pointwise domain/range errors.
    pub(crate) fn at_cell(self, idx: usize) -> Self {
        match self {
            Error::OutOfDomain { t, sup, .. } => Error::OutOfDomain {
                t,
                sup,
                cell: Some(idx),
            },
            Error::OutOfRange { value, limit, .. } => Error::OutOfRange {
                value,
                limit,
                cell: Some(idx),
            },
            Error::InvalidInput(m) => Error::InvalidInput(format!("cell {idx}: {m}")),
            other => other,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
