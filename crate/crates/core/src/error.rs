use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no data")]
    NoData,
    #[error("grid size mismatch: {left} vs {right}")]
    GridMismatch { left: usize, right: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("no local continuity formula for operator {0}")]
    NoLocalContinuity(String),
    #[error("covariance not PSD")]
    NotPsd,
    #[error("M not PD")]
    NotPositiveDefinite,
    #[error("determinant zero")]
    DeterminantZero,
    #[error("D not bounded below: D({t}) = {value}")]
    NotBoundedBelow { t: f64, value: f64 },
    #[error("no closed form for model family {0}")]
    NoClosedForm(&'static str),
    #[error("likelihood not specified for model family {0}")]
    LikelihoodUnspecified(&'static str),
    #[error("non-finite likelihood at {0}")]
    NonFiniteLikelihood(String),
    #[error("at n = {n}: {source}")]
    AtGridSize {
        n: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
