use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integrating system: the denominator has no constant term")]
    IntegratingSystem,

    #[error("system is unstable (max pole real part {max_real:.3e})")]
    Unstable { max_real: f64 },

    #[error("system is not strictly proper; {0}")]
    NotStrictlyProper(String),

    #[error("system is improper (numerator degree {num} > denominator degree {den}); rationalize it first")]
    Improper { num: usize, den: usize },

    #[error("discrete pole at z = -1 maps to infinite frequency")]
    PoleAtNyquist,

    #[error("rank-deficient regressor: {0}")]
    RankDeficient(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
