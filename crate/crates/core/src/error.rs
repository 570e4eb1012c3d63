use thiserror::Error;

/// Errors shared across the pricing, dynamics, simulation and scenario layers.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a type invariant (e.g. `rho = 1` or `sigma2 < 0`).
    #[error("invalid parameter: {0}")]
    Validation(String),

    /// The discounted dividend series diverges: h >= 1, so no finite positive
    /// price-dividend ratio exists.
    #[error("no equilibrium: h = {h} >= 1, the discounted dividend series diverges")]
    NoEquilibrium { h: f64 },

    /// The expected-utility (CCAPM) derivative was requested outside the
    /// gamma = rho restriction.
    #[error("CCAPM derivative requires gamma == rho (gamma = {gamma}, rho = {rho})")]
    ModelMismatch { gamma: f64, rho: f64 },

    #[error("length mismatch: expected {expected} elements, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Exponentiation produced a non-finite Euler integrand; reports the
    /// offending draw index.
    #[error("non-finite Euler integrand at draw {draw}")]
    NumericalOverflow { draw: usize },

    /// Bisection found no sign change of the Euler residual on the bracket.
    #[error("no sign change of the Euler residual on [{lo}, {hi}]")]
    BracketingFailure { lo: f64, hi: f64 },

    /// A diagonal finite-difference step would bracket the rho = 1 singularity.
    #[error("finite-difference step crosses the rho = 1 singularity")]
    StepCrossesSingularity,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
