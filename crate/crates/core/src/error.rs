use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("argument out of numeric range: {0}")]
    OutOfRange(String),

    /// The quantile transform saturated (marginal cdf hit 0 or 1 in
    /// double precision) at a specific observation.
    #[error("transform saturated at observation {index} (value {value})")]
    Saturated { index: usize, value: f64 },

    #[error("simulated path diverged at step {step}")]
    Diverged { step: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("matrix numerically singular (condition estimate {condition:.3e})")]
    SingularMatrix { condition: f64 },

    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),
}
