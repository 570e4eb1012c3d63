//! Comparative dynamics under a deterministic, eventually-constant path of
//! risk aversion.
//!
//! With gamma varying over time the price-dividend ratio obeys the
//! difference equation `c_t = h_t (1 + c_{t+1})` with
//! `h_t = exp[-delta + (1-rho) mu + (1-rho)(1-gamma_t) sigma2 / 2]`.
//! Because every admissible path is eventually constant, the solution is
//! obtained by backward recursion from the terminal closed form
//! `c_inf = h_inf / (1 - h_inf)`; the literal forward series
//! `c_t = h_t + h_t h_{t+1} + ...` is kept as an independent oracle.

use crate::error::{Error, Result};
use crate::pricing;
use crate::statics::ResponseSign;
use crate::types::{GrowthProcess, Preferences};

/// Deterministic path of risk-aversion coefficients, eventually constant.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaPath {
    /// gamma_t = gamma for all t.
    Constant { gamma: f64 },
    /// gamma_t = base for t < time, base + delta for t >= time.
    PermanentStep { base: f64, delta: f64, time: usize },
    /// gamma deviates by delta at exactly period `time`.
    TransitoryPulse { base: f64, delta: f64, time: usize },
    /// Explicit prefix followed by a declared terminal constant.
    Custom { values: Vec<f64>, terminal: f64 },
}

/// Kind of risk-aversion shock, for sign classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShockKind {
    Permanent,
    Transitory,
}

impl GammaPath {
    pub fn validate(&self) -> Result<()> {
        let check = |g: f64, what: &str| -> Result<()> {
            if !g.is_finite() || g <= 0.0 {
                Err(Error::Validation(format!("{what} must be positive, got {g}")))
            } else {
                Ok(())
            }
        };
        match self {
            GammaPath::Constant { gamma } => check(*gamma, "gamma"),
            GammaPath::PermanentStep { base, delta, .. }
            | GammaPath::TransitoryPulse { base, delta, .. } => {
                check(*base, "base gamma")?;
                check(base + delta, "post-shock gamma")
            }
            GammaPath::Custom { values, terminal } => {
                for (i, v) in values.iter().enumerate() {
                    check(*v, &format!("gamma at period {i}"))?;
                }
                check(*terminal, "terminal gamma")
            }
        }
    }

    /// Risk aversion in period `t`.
    pub fn gamma_at(&self, t: usize) -> f64 {
        match self {
            GammaPath::Constant { gamma } => *gamma,
            GammaPath::PermanentStep { base, delta, time } => {
                if t >= *time {
                    base + delta
                } else {
                    *base
                }
            }
            GammaPath::TransitoryPulse { base, delta, time } => {
                if t == *time {
                    base + delta
                } else {
                    *base
                }
            }
            GammaPath::Custom { values, terminal } => {
                values.get(t).copied().unwrap_or(*terminal)
            }
        }
    }

    /// Terminal constant gamma_inf.
    pub fn terminal_gamma(&self) -> f64 {
        match self {
            GammaPath::Constant { gamma } => *gamma,
            GammaPath::PermanentStep { base, delta, .. } => base + delta,
            GammaPath::TransitoryPulse { base, .. } => *base,
            GammaPath::Custom { terminal, .. } => *terminal,
        }
    }

    /// First period from which the path is constant.
    pub fn constant_from(&self) -> usize {
        match self {
            GammaPath::Constant { .. } => 0,
            GammaPath::PermanentStep { time, .. } => *time,
            GammaPath::TransitoryPulse { time, .. } => time + 1,
            GammaPath::Custom { values, .. } => values.len(),
        }
    }
}

/// Solved path of discount factors and price-dividend ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSolution {
    /// h_t for t = 0..=horizon.
    pub h_series: Vec<f64>,
    /// c_t for t = 0..=horizon.
    pub c_series: Vec<f64>,
    pub horizon: usize,
    /// Closed-form c for the terminal constant gamma.
    pub terminal_c: f64,
}

fn h_at(path: &GammaPath, prefs: &Preferences, growth: &GrowthProcess, t: usize) -> Result<f64> {
    let p = prefs.with_gamma(path.gamma_at(t))?;
    Ok(pricing::h_value(&p, growth))
}

fn terminal_h(path: &GammaPath, prefs: &Preferences, growth: &GrowthProcess) -> Result<f64> {
    let p = prefs.with_gamma(path.terminal_gamma())?;
    Ok(pricing::h_value(&p, growth))
}

/// Per-period discount factors h_t for t = 0..=horizon.
pub fn h_path(
    path: &GammaPath,
    prefs: &Preferences,
    growth: &GrowthProcess,
    horizon: usize,
) -> Result<Vec<f64>> {
    path.validate()?;
    (0..=horizon).map(|t| h_at(path, prefs, growth, t)).collect()
}

/// Solves the difference equation `c_t = h_t (1 + c_{t+1})` by backward
/// recursion from `terminal_c = h_inf / (1 - h_inf)`.
///
/// Requires `horizon >= `[`GammaPath::constant_from`], so that the terminal
/// condition applies, and `h_inf < 1` for convergence; transient periods
/// with `h_t >= 1` are allowed.
pub fn solve_c_path(
    path: &GammaPath,
    prefs: &Preferences,
    growth: &GrowthProcess,
    horizon: usize,
) -> Result<DynamicSolution> {
    path.validate()?;
    let t_star = path.constant_from();
    if horizon < t_star {
        return Err(Error::Validation(format!(
            "horizon {horizon} must reach the constant tail of the path (period {t_star})"
        )));
    }
    let h_inf = terminal_h(path, prefs, growth)?;
    if h_inf >= 1.0 {
        return Err(Error::NoEquilibrium { h: h_inf });
    }
    let terminal_c = h_inf / (1.0 - h_inf);
    let h_series = h_path(path, prefs, growth, horizon)?;
    let mut c_series = vec![0.0; horizon + 1];
    let mut next_c = terminal_c; // c_{horizon+1}
    for t in (0..=horizon).rev() {
        c_series[t] = h_series[t] * (1.0 + next_c);
        next_c = c_series[t];
    }
    Ok(DynamicSolution {
        h_series,
        c_series,
        horizon,
        terminal_c,
    })
}

/// Literal truncated forward series `c_t = h_t + h_t h_{t+1} + ...` with the
/// geometric tail summed once its bound drops below `truncation_tol`.
///
/// Independent oracle for [`solve_c_path`].
pub fn forward_series_oracle(
    path: &GammaPath,
    prefs: &Preferences,
    growth: &GrowthProcess,
    t: usize,
    truncation_tol: f64,
) -> Result<f64> {
    path.validate()?;
    if !(truncation_tol > 0.0) {
        return Err(Error::Validation(format!(
            "truncation tolerance must be positive, got {truncation_tol}"
        )));
    }
    let h_inf = terminal_h(path, prefs, growth)?;
    if h_inf >= 1.0 {
        return Err(Error::NoEquilibrium { h: h_inf });
    }
    let t_star = path.constant_from();
    let mut sum = 0.0;
    let mut product = 1.0;
    let mut j = 0usize;
    loop {
        product *= h_at(path, prefs, growth, t + j)?;
        sum += product;
        // once every remaining factor is h_inf the tail is geometric:
        // product * (h_inf + h_inf^2 + ...) = product * h_inf / (1 - h_inf)
        if t + j + 1 >= t_star {
            let tail = product * h_inf / (1.0 - h_inf);
            if tail <= truncation_tol {
                return Ok(sum);
            }
        }
        j += 1;
    }
}

/// Direction of the price response to a risk-aversion shock: the price at
/// the shocked period falls iff `delta (1 - rho) sigma2 > 0`, the same rule
/// for permanent and transitory shocks.
pub fn classify_price_response(
    shock_delta: f64,
    prefs: &Preferences,
    growth: &GrowthProcess,
    _kind: ShockKind,
) -> ResponseSign {
    let product = shock_delta * (1.0 - prefs.rho()) * growth.sigma2();
    if product > 0.0 {
        ResponseSign::Falls
    } else if product < 0.0 {
        ResponseSign::Rises
    } else {
        ResponseSign::Unchanged
    }
}

/// Price path `p_t = c_t q_t`.
pub fn price_path(solution: &DynamicSolution, dividend_path: &[f64]) -> Result<Vec<f64>> {
    if dividend_path.len() != solution.horizon + 1 {
        return Err(Error::LengthMismatch {
            expected: solution.horizon + 1,
            got: dividend_path.len(),
        });
    }
    Ok(solution
        .c_series
        .iter()
        .zip(dividend_path)
        .map(|(c, q)| c * q)
        .collect())
}

/// Gross equity returns `R_{t+1} = ((1 + c_{t+1}) / c_t) y_{t+1}` for
/// t = 0..horizon-1, given gross growth realizations `y_1..y_horizon`.
pub fn returns_path(solution: &DynamicSolution, growth_path: &[f64]) -> Result<Vec<f64>> {
    if growth_path.len() != solution.horizon {
        return Err(Error::LengthMismatch {
            expected: solution.horizon,
            got: growth_path.len(),
        });
    }
    Ok((0..solution.horizon)
        .map(|t| (1.0 + solution.c_series[t + 1]) / solution.c_series[t] * growth_path[t])
        .collect())
}
