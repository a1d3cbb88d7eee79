use l2gauss_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    /// 2 for anything the caller can fix by changing the invocation, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Output(_) => 3,
            CliError::Core(e) => match e {
                Error::InvalidArgument(_)
                | Error::NoClosedForm(_)
                | Error::LikelihoodUnspecified(_)
                | Error::NoData
                | Error::NonFinite(_) => 2,
                _ => 3,
            },
        }
    }
}
