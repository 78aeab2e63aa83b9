use thiserror::Error;

/// Errors surfaced by the library.
///
/// Certification *outcomes* (a failed goodness condition, a surviving cell)
/// are ordinary return values; this type covers invalid input and resource
/// exhaustion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coefficient symbol {symbol:?} at position {position}")]
    InvalidSymbol { symbol: String, position: usize },

    #[error("coefficient {value} at index {index} is outside the allowed set")]
    CoefficientOutsideSet { value: i64, index: usize },

    #[error("polynomial must start with constant term 1")]
    MissingLeadingOne,

    #[error("invalid coefficient set: {0}")]
    InvalidCoefficientSet(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("search aborted after {nodes} nodes (limit reached)")]
    ResourceLimit { nodes: u64 },

    #[error("cell {index} aborted: {source}")]
    CellAborted {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("scan stopped at cell {next_cell} of {grid}; rerun with the same checkpoint to resume")]
    Interrupted { next_cell: usize, grid: usize },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True when a search or scan ran out of budget rather than deciding
    /// anything.
    pub fn is_resource_limit(&self) -> bool {
        match self {
            Error::ResourceLimit { .. } | Error::Interrupted { .. } => true,
            Error::CellAborted { source, .. } => source.is_resource_limit(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
