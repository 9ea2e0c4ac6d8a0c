use alloc::string::String;

/// Failures surfaced by the library. Numerical quantities that legitimately
/// diverge (for example an infinite divergence) are returned as `f64::INFINITY`
/// rather than as errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),
    #[error("kernel is not row-stochastic: {0}")]
    NonStochasticKernel(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! precondition {
    ($cond:expr, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::Error::Precondition(alloc::format!($($arg)*)));
        }
    };
}
pub(crate) use precondition;
