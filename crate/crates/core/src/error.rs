use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0} contains no rows")]
    Empty(String),
    #[error("row {row}: zero-length segment")]
    ZeroLengthSegment { row: usize },
    #[error("row {row}: {msg}")]
    BadRow { row: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("isolated center: kernel correction {value:e} is below machine epsilon (bandwidth too small for the Monte Carlo point layout)")]
    IsolatedCenter { value: f64 },
    #[error("degenerate point set: {0}")]
    Degenerate(String),
    #[error("bandwidth too small for network extent (estimated acceptance {rate:e})")]
    BandwidthTooSmall { rate: f64 },
    #[error("non-finite log-likelihood: {0}")]
    NonFinite(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
