use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid octal polynomial {0:?}")]
    Parse(String),
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("polynomial has zero constant term; x^e + 1 is never divisible by it")]
    ZeroConstantTerm,
    #[error("no e <= {0} with a(x) | x^e + 1")]
    OrderCapExceeded(u64),
    #[error("degree {degree} exceeds reversal width {width}")]
    DegreeExceedsWidth { degree: usize, width: usize },
    #[error("a_f not primitive; LMAP synthesis unavailable ({0})")]
    NotPrimitive(String),
    #[error("U_f is empty: a_f and q_f agree on every interior coefficient")]
    EmptyUf,
    #[error("synthesis failed: {0}")]
    Synthesis(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors caused by the request itself rather than by running it.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::InvalidCode(_)
                | Error::NotPrimitive(_)
                | Error::EmptyUf
                | Error::OrderCapExceeded(_)
                | Error::ZeroConstantTerm
                | Error::Config(_)
        )
    }
}
