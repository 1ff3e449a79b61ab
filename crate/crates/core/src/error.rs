use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index {index} out of range for {len} values")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("binomial({n}, {k}) is not defined for this range")]
    Binomial { n: u64, k: u64 },

    #[error("jet division by a series with zero constant term")]
    JetDivisionByZero,

    #[error("jet order {have} too small, need at least {need}")]
    JetOrder { have: usize, need: usize },

    #[error("spectrum has repeated values; use the block evaluator")]
    Degenerate,

    #[error("quadrature did not converge: estimate {value:e}, error estimate {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("numerically singular Gaussian draw")]
    SingularDraw,

    #[error("all histogram bins are empty")]
    EmptyHistogram,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of a numerical routine (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::SingularDraw | Error::JetDivisionByZero
        )
    }
}
