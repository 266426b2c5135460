use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("data: {0}")]
    Data(String),

    #[error(transparent)]
    Core(#[from] caltol_core::Error),

    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for sample sizes below a benchmark's minimum, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(caltol_core::Error::Infeasible { .. }) => 2,
            _ => 1,
        }
    }
}
