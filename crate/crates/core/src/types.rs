use crate::error::{Error, Result};

/// Recursive-utility preference parameters.
///
/// `rho` is aversion to intertemporal fluctuations (the inverse of the
/// elasticity of intertemporal substitution) and `gamma` is relative risk
/// aversion. The subjective discount factor is `beta = exp(-delta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preferences {
    delta: f64,
    rho: f64,
    gamma: f64,
}

impl Preferences {
    pub fn new(delta: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Validation(format!(
                "delta must be finite and >= 0, got {delta}"
            )));
        }
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::Validation(format!(
                "rho must be positive, got {rho}"
            )));
        }
        if rho == 1.0 {
            return Err(Error::Validation(
                "rho must be positive and not equal to 1 (the log-aggregator case is not supported)"
                    .to_string(),
            ));
        }
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::Validation(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { delta, rho, gamma })
    }

    /// Builds preferences from the discount factor `beta` in (0, 1],
    /// converting to `delta = -ln(beta)`.
    pub fn from_beta(beta: f64, rho: f64, gamma: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 || beta > 1.0 {
            return Err(Error::Validation(format!(
                "beta must lie in (0, 1], got {beta}"
            )));
        }
        Self::new(-beta.ln(), rho, gamma)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        (-self.delta).exp()
    }

    /// Same preferences with a different risk aversion.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.delta, self.rho, gamma)
    }
}

/// I.i.d. lognormal dividend growth: `ln y ~ N(mu, sigma2)`.
///
/// `sigma2 = 0` is the admissible deterministic degenerate case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthProcess {
    mu: f64,
    sigma2: f64,
}

impl GrowthProcess {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Validation(format!("mu must be finite, got {mu}")));
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::Validation(format!(
                "sigma2 must be finite and >= 0, got {sigma2}"
            )));
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}
