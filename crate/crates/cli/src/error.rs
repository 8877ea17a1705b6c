use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {at}: {message}")]
    Config { at: String, message: String },
    #[error(transparent)]
    Library(#[from] dcapprox::Error),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems (including
    /// parameters the library rejects up front), 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use dcapprox::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Library(
                E::InvalidParameter { .. }
                | E::ParameterTooSmall { .. }
                | E::GridDimensionTooLarge { .. }
                | E::BlockOverflow { .. }
                | E::EmpiricalConstant { .. }
                | E::DimensionMismatch { .. }
                | E::Parse { .. },
            ) => 2,
            _ => 1,
        }
    }
}
