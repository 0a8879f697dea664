use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Consistency(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Consistency(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<linnet_dp::Error> for CliError {
    fn from(e: linnet_dp::Error) -> Self {
        use linnet_dp::Error as E;
        let msg = e.to_string();
        match e {
            E::IsolatedCenter { .. }
            | E::Degenerate(_)
            | E::BandwidthTooSmall { .. }
            | E::NonFinite(_) => CliError::Numerical(msg),
            _ => CliError::Input(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
