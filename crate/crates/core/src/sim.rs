//! Monte Carlo verification harness.
//!
//! Simulates the lognormal growth process with reproducible substreams,
//! evaluates Euler-equation residuals for the static and dynamic models,
//! estimates return moments, and runs finite-difference checks on the
//! analytic derivatives. Every operation is deterministic given the
//! configuration, regardless of how many threads execute it: each substream
//! is keyed by (seed, stream index) and partial sums are combined in fixed
//! stream order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dynamics::{DynamicSolution, GammaPath};
use crate::error::{Error, Result};
use crate::pricing;
use crate::types::{GrowthProcess, Preferences};

/// Monte Carlo configuration. Identical configurations reproduce
/// bit-identical draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub n_draws: usize,
    pub horizon: usize,
    pub seed: u64,
    pub stream_count: usize,
    pub antithetic: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_draws: 1_000_000,
            horizon: 64,
            seed: 42,
            stream_count: 8,
            antithetic: false,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_draws < 2 {
            return Err(Error::Validation(format!(
                "n_draws must be at least 2, got {}",
                self.n_draws
            )));
        }
        if self.stream_count == 0 {
            return Err(Error::Validation("stream_count must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::Validation("horizon must be positive".into()));
        }
        Ok(())
    }

    /// Fixed partition of `n_draws` across substreams: the first
    /// `n_draws % stream_count` streams get one extra draw.
    fn partition(&self) -> Vec<usize> {
        let base = self.n_draws / self.stream_count;
        let extra = self.n_draws % self.stream_count;
        (0..self.stream_count)
            .map(|k| base + usize::from(k < extra))
            .collect()
    }
}

/// Which Euler condition a report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationId {
    /// Static equity Euler condition.
    Static10a,
    /// Static riskless Euler condition.
    Static10b,
    /// Dynamic equity Euler condition (time-varying gamma).
    Dynamic20a,
    /// Dynamic riskless Euler condition.
    Dynamic20b,
}

impl std::fmt::Display for EquationId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EquationId::Static10a => write!(f, "10a"),
            EquationId::Static10b => write!(f, "10b"),
            EquationId::Dynamic20a => write!(f, "20a"),
            EquationId::Dynamic20b => write!(f, "20b"),
        }
    }
}

/// Sample statistics of an Euler expression whose population mean is one
/// at the true equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerReport {
    pub residual_mean: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub equation_id: EquationId,
    pub n_draws: usize,
}

fn z_score(mean: f64, se: f64) -> f64 {
    if se == 0.0 {
        if (mean - 1.0).abs() < 1e-12 {
            0.0
        } else {
            f64::INFINITY.copysign(mean - 1.0)
        }
    } else {
        (mean - 1.0) / se
    }
}

/// Log growth draws `ln y ~ N(mu, sigma2)`, generated per substream in a
/// fixed partition. The degenerate `sigma2 = 0` case yields `mu` everywhere.
pub fn simulate_log_growth(growth: &GrowthProcess, config: &SimulationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let sigma = growth.sigma();
    let mu = growth.mu();
    if sigma == 0.0 {
        return Ok(vec![mu; config.n_draws]);
    }
    let counts = config.partition();
    let chunks: Vec<Vec<f64>> = counts
        .par_iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            let mut out = Vec::with_capacity(n);
            if config.antithetic {
                // antithetic pairs (z, -z); odd tail takes a single z
                while out.len() + 2 <= n {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    out.push(mu + sigma * z);
                    out.push(mu - sigma * z);
                }
                if out.len() < n {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    out.push(mu + sigma * z);
                }
            } else {
                for _ in 0..n {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    out.push(mu + sigma * z);
                }
            }
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Gross growth draws `y = exp(ln y)`.
pub fn simulate_growth(growth: &GrowthProcess, config: &SimulationConfig) -> Result<Vec<f64>> {
    Ok(simulate_log_growth(growth, config)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// Sample mean / standard error of `exp(intercept + slope * ln y)` over the
/// draws. The integrand stays in log space until the final exp, so large
/// `(1-gamma)/(1-rho)` exponents do not overflow intermediate products.
fn log_linear_statistics(
    log_draws: &[f64],
    intercept: f64,
    slope: f64,
) -> Result<(f64, f64, usize)> {
    let n = log_draws.len();
    let partials: Vec<(f64, f64, Option<usize>)> = log_draws
        .par_chunks(64 * 1024)
        .enumerate()
        .map(|(chunk_idx, chunk)| {
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut bad = None;
            for (i, ln_y) in chunk.iter().enumerate() {
                let v = (intercept + slope * ln_y).exp();
                if !v.is_finite() {
                    bad = bad.or(Some(chunk_idx * 64 * 1024 + i));
                }
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq, bad)
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (s, sq, bad) in partials {
        if let Some(draw) = bad {
            return Err(Error::NumericalOverflow { draw });
        }
        sum += s;
        sum_sq += sq;
    }
    let mean = sum / n as f64;
    let var = ((sum_sq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0);
    let se = (var / n as f64).sqrt();
    Ok((mean, se, n))
}

fn euler_coefficients(
    prefs: &Preferences,
    gamma: f64,
    ln_gross_return_factor: f64,
    which: EquationId,
    ln_rf: f64,
) -> (f64, f64) {
    // integrand = [beta y^-rho]^kappa * R^e * (R_F if riskless), R = A y
    let kappa = (1.0 - gamma) / (1.0 - prefs.rho());
    let return_exponent = match which {
        EquationId::Static10a | EquationId::Dynamic20a => kappa,
        EquationId::Static10b | EquationId::Dynamic20b => kappa - 1.0,
    };
    let mut intercept = -prefs.delta() * kappa + return_exponent * ln_gross_return_factor;
    if matches!(which, EquationId::Static10b | EquationId::Dynamic20b) {
        intercept += ln_rf;
    }
    let slope = -prefs.rho() * kappa + return_exponent;
    (intercept, slope)
}

/// Euler residual of the static conditions at a candidate price-dividend
/// ratio `c` (the gross return is `R = ((1+c)/c) y`).
pub fn euler_residual_static(
    prefs: &Preferences,
    growth: &GrowthProcess,
    c: f64,
    which: EquationId,
    config: &SimulationConfig,
) -> Result<EulerReport> {
    if !(c > 0.0) {
        return Err(Error::Validation(format!(
            "price-dividend ratio must be positive, got {c}"
        )));
    }
    if matches!(which, EquationId::Dynamic20a | EquationId::Dynamic20b) {
        return Err(Error::Validation(
            "dynamic equation ids require euler_residual_dynamic".into(),
        ));
    }
    let log_draws = simulate_log_growth(growth, config)?;
    euler_residual_from_draws(prefs, growth, c, which, &log_draws)
}

fn euler_residual_from_draws(
    prefs: &Preferences,
    growth: &GrowthProcess,
    c: f64,
    which: EquationId,
    log_draws: &[f64],
) -> Result<EulerReport> {
    let ln_a = ((1.0 + c) / c).ln();
    let ln_rf = pricing::risk_free_rate(prefs, growth);
    let (intercept, slope) = euler_coefficients(prefs, prefs.gamma(), ln_a, which, ln_rf);
    let (mean, se, n) = log_linear_statistics(log_draws, intercept, slope)?;
    Ok(EulerReport {
        residual_mean: mean,
        std_error: se,
        z_score: z_score(mean, se),
        equation_id: which,
        n_draws: n,
    })
}

/// Inverts the static equity Euler condition by bisection on `c` with common
/// random numbers: the returned `c*` makes the sampled residual equal one.
///
/// `tol` is a relative tolerance on `c*`. Independent oracle for the
/// closed-form price-dividend ratio.
pub fn euler_fixed_point_oracle(
    prefs: &Preferences,
    growth: &GrowthProcess,
    config: &SimulationConfig,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let log_draws = simulate_log_growth(growth, config)?;
    let residual = |c: f64| -> Result<f64> {
        Ok(euler_residual_from_draws(prefs, growth, c, EquationId::Static10a, &log_draws)?
            .residual_mean)
    };
    let (mut lo, mut hi) = (1e-6, 1e6);
    let f_lo = residual(lo)? - 1.0;
    let f_hi = residual(hi)? - 1.0;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketingFailure { lo, hi });
    }
    let falling = f_lo > 0.0;
    while hi - lo > tol * 0.5 * (lo + hi) {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)? - 1.0;
        if (f_mid > 0.0) == falling {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Euler residual of the dynamic conditions at period `t` of a solved path.
/// The gross return is `R_{t+1} = ((1 + c_{t+1}) / c_t) y` and both the
/// exponents and the riskless rate use `gamma_t`.
pub fn euler_residual_dynamic(
    prefs: &Preferences,
    path: &GammaPath,
    growth: &GrowthProcess,
    solution: &DynamicSolution,
    t: usize,
    which: EquationId,
    config: &SimulationConfig,
) -> Result<EulerReport> {
    if matches!(which, EquationId::Static10a | EquationId::Static10b) {
        return Err(Error::Validation(
            "static equation ids require euler_residual_static".into(),
        ));
    }
    if t + 1 > solution.horizon {
        return Err(Error::Validation(format!(
            "period {t} needs c at {} but the solution ends at {}",
            t + 1,
            solution.horizon
        )));
    }
    let gamma_t = path.gamma_at(t);
    let prefs_t = prefs.with_gamma(gamma_t)?;
    let ln_a = ((1.0 + solution.c_series[t + 1]) / solution.c_series[t]).ln();
    let ln_rf = pricing::risk_free_rate(&prefs_t, growth);
    let (intercept, slope) = euler_coefficients(prefs, gamma_t, ln_a, which, ln_rf);
    let log_draws = simulate_log_growth(growth, config)?;
    let (mean, se, n) = log_linear_statistics(&log_draws, intercept, slope)?;
    Ok(EulerReport {
        residual_mean: mean,
        std_error: se,
        z_score: z_score(mean, se),
        equation_id: which,
        n_draws: n,
    })
}

/// Sampled return moments with their closed-form counterparts' standard
/// errors, for the constant-gamma model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMoments {
    /// Sample mean of ln R.
    pub e_ln_r: f64,
    pub se_e_ln_r: f64,
    /// Log of the sample mean of R (delta-method standard error).
    pub ln_e_r: f64,
    pub se_ln_e_r: f64,
    /// ln(mean R) - ln R_F with ln R_F from the closed form.
    pub premium: f64,
    /// Sample variance of ln R.
    pub var_ln_r: f64,
    pub n_draws: usize,
}

/// Simulates `R = ((1+c)/c) y` at the closed-form `c` and estimates return
/// moments. Each estimate matches its closed form within sampling error.
pub fn estimate_return_moments(
    prefs: &Preferences,
    growth: &GrowthProcess,
    config: &SimulationConfig,
) -> Result<ReturnMoments> {
    let c = pricing::price_dividend_ratio(prefs, growth)?;
    let ln_a = ((1.0 + c) / c).ln();
    let log_draws = simulate_log_growth(growth, config)?;
    let n = log_draws.len();
    let nf = n as f64;

    let mut sum_ln = 0.0;
    let mut sum_ln_sq = 0.0;
    let mut sum_r = 0.0;
    let mut sum_r_sq = 0.0;
    for ln_y in &log_draws {
        let ln_r = ln_a + ln_y;
        sum_ln += ln_r;
        sum_ln_sq += ln_r * ln_r;
        let r = ln_r.exp();
        sum_r += r;
        sum_r_sq += r * r;
    }
    let mean_ln = sum_ln / nf;
    let var_ln = ((sum_ln_sq - sum_ln * sum_ln / nf) / (nf - 1.0)).max(0.0);
    let mean_r = sum_r / nf;
    let var_r = ((sum_r_sq - sum_r * sum_r / nf) / (nf - 1.0)).max(0.0);
    let se_mean_r = (var_r / nf).sqrt();
    let ln_rf = pricing::risk_free_rate(prefs, growth);
    Ok(ReturnMoments {
        e_ln_r: mean_ln,
        se_e_ln_r: (var_ln / nf).sqrt(),
        ln_e_r: mean_r.ln(),
        se_ln_e_r: se_mean_r / mean_r,
        premium: mean_r.ln() - ln_rf,
        var_ln_r: var_ln,
        n_draws: n,
    })
}

/// Closed-form quantity to finite-difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdTarget {
    LnEr,
    LnRf,
    Premium,
    PdRatio,
}

/// Which parameters the finite-difference step moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdMode {
    /// gamma alone, rho fixed.
    GammaOnly,
    /// gamma and rho stepped together along the expected-utility diagonal.
    GammaRhoDiagonal,
}

/// Central finite difference of a closed-form target with respect to gamma
/// (or the gamma = rho diagonal).
pub fn finite_difference_derivative(
    prefs: &Preferences,
    growth: &GrowthProcess,
    target: FdTarget,
    mode: FdMode,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::Validation(format!(
            "step must be positive, got {step}"
        )));
    }
    let eval = |p: &Preferences| -> Result<f64> {
        Ok(match target {
            FdTarget::LnEr => pricing::expected_returns(p, growth).1,
            FdTarget::LnRf => pricing::risk_free_rate(p, growth),
            FdTarget::Premium => pricing::equity_premium(p, growth),
            FdTarget::PdRatio => pricing::price_dividend_ratio(p, growth)?,
        })
    };
    let (up, down) = match mode {
        FdMode::GammaOnly => (
            prefs.with_gamma(prefs.gamma() + step)?,
            prefs.with_gamma(prefs.gamma() - step)?,
        ),
        FdMode::GammaRhoDiagonal => {
            if prefs.gamma() != prefs.rho() {
                return Err(Error::ModelMismatch {
                    gamma: prefs.gamma(),
                    rho: prefs.rho(),
                });
            }
            if (prefs.rho() - 1.0).abs() <= step {
                return Err(Error::StepCrossesSingularity);
            }
            (
                Preferences::new(prefs.delta(), prefs.rho() + step, prefs.gamma() + step)?,
                Preferences::new(prefs.delta(), prefs.rho() - step, prefs.gamma() - step)?,
            )
        }
    };
    Ok((eval(&up)? - eval(&down)?) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics;
    use crate::statics;

    fn standard() -> (Preferences, GrowthProcess) {
        (
            Preferences::new(0.02, 0.5, 2.0).unwrap(),
            GrowthProcess::new(0.018, 0.0013).unwrap(),
        )
    }

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            n_draws: 50_000,
            seed: 7,
            stream_count: 4,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn degenerate_growth_is_constant() {
        let g = GrowthProcess::new(0.018, 0.0).unwrap();
        let draws = simulate_growth(&g, &small_config()).unwrap();
        for y in &draws {
            assert_eq!(*y, 0.018f64.exp());
        }
    }

    #[test]
    fn fixed_seed_replays_identical_draws() {
        let (_, g) = standard();
        let cfg = small_config();
        let a = simulate_growth(&g, &cfg).unwrap();
        let b = simulate_growth(&g, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let (_, g) = standard();
        let a = simulate_growth(&g, &small_config()).unwrap();
        let b = simulate_growth(
            &g,
            &SimulationConfig {
                seed: 8,
                ..small_config()
            },
        )
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn sample_mean_near_mu() {
        let (_, g) = standard();
        let cfg = SimulationConfig {
            n_draws: 200_000,
            ..small_config()
        };
        let draws = simulate_log_growth(&g, &cfg).unwrap();
        let mean: f64 = draws.iter().sum::<f64>() / draws.len() as f64;
        let se = g.sigma() / (draws.len() as f64).sqrt();
        assert!((mean - g.mu()).abs() < 3.0 * se);
    }

    #[test]
    fn antithetic_draws_balance_the_mean() {
        let (_, g) = standard();
        let cfg = SimulationConfig {
            antithetic: true,
            n_draws: 50_000,
            ..small_config()
        };
        let draws = simulate_log_growth(&g, &cfg).unwrap();
        let mean: f64 = draws.iter().sum::<f64>() / draws.len() as f64;
        // antithetic pairing cancels the odd moments almost exactly
        assert!((mean - g.mu()).abs() < 1e-4);
        let plain = simulate_log_growth(&g, &SimulationConfig { antithetic: false, ..cfg }).unwrap();
        let plain_mean: f64 = plain.iter().sum::<f64>() / plain.len() as f64;
        let se = g.sigma() / (plain.len() as f64).sqrt();
        assert!((plain_mean - mean).abs() < 6.0 * se);
    }

    #[test]
    fn euler_residual_exact_when_deterministic() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0).unwrap();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        for which in [EquationId::Static10a, EquationId::Static10b] {
            let rep = euler_residual_static(&p, &g, c, which, &small_config()).unwrap();
            assert!((rep.residual_mean - 1.0).abs() < 1e-12);
            assert_eq!(rep.std_error, 0.0);
            assert_eq!(rep.z_score, 0.0);
        }
    }

    #[test]
    fn euler_residual_accepts_analytic_c() {
        let (p, g) = standard();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        let cfg = SimulationConfig {
            n_draws: 200_000,
            ..small_config()
        };
        for which in [EquationId::Static10a, EquationId::Static10b] {
            let rep = euler_residual_static(&p, &g, c, which, &cfg).unwrap();
            assert!(rep.z_score.abs() < 4.0, "{which}: z = {}", rep.z_score);
        }
    }

    #[test]
    fn euler_residual_rejects_perturbed_c() {
        let (p, g) = standard();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        let cfg = SimulationConfig {
            n_draws: 200_000,
            ..small_config()
        };
        let rep = euler_residual_static(&p, &g, 1.05 * c, EquationId::Static10a, &cfg).unwrap();
        assert!(rep.z_score.abs() > 3.0, "z = {}", rep.z_score);
    }

    #[test]
    fn overflow_is_reported() {
        // enormous exponent: kappa = (1-gamma)/(1-rho) with rho close to 1
        let p = Preferences::new(0.02, 1.0 + 1e-13, 400.0).unwrap();
        let (_, g) = standard();
        let r = euler_residual_static(&p, &g, 1e-5, EquationId::Static10a, &small_config());
        assert!(matches!(r, Err(Error::NumericalOverflow { .. })));
    }

    #[test]
    fn oracle_recovers_closed_form_deterministic() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0).unwrap();
        let c_star = euler_fixed_point_oracle(&p, &g, &small_config(), 1e-10).unwrap();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        assert!((c_star - c).abs() / c < 1e-9);
    }

    #[test]
    fn oracle_matches_closed_form_stochastic() {
        let (p, g) = standard();
        let cfg = SimulationConfig {
            n_draws: 400_000,
            ..small_config()
        };
        let c_star = euler_fixed_point_oracle(&p, &g, &cfg, 1e-10).unwrap();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        // Monte Carlo error in the residual translates to roughly
        // c^2 * se on c at these parameters; allow a generous band.
        assert!((c_star - c).abs() / c < 0.02, "c* = {c_star}, c = {c}");
    }

    #[test]
    fn oracle_reports_bracketing_failure() {
        // h > 1 and kappa > 0: residual stays above one on the whole bracket
        let p = Preferences::new(0.0, 0.5, 0.5).unwrap();
        let g = GrowthProcess::new(0.05, 0.0).unwrap();
        assert!(matches!(
            euler_fixed_point_oracle(&p, &g, &small_config(), 1e-10),
            Err(Error::BracketingFailure { .. })
        ));
    }

    #[test]
    fn residual_strictly_monotone_in_c() {
        // Under common random numbers the residual is (A(c) * k)^kappa per
        // draw with A = (1+c)/c, so it is strictly monotone in c with
        // direction given by the sign of kappa = (1-gamma)/(1-rho); either
        // way bisection is justified.
        let cfg = small_config();
        for (rho, gamma) in [(0.5, 2.0), (2.0, 0.5), (0.5, 0.5), (2.0, 5.0)] {
            let p = Preferences::new(0.02, rho, gamma).unwrap();
            let g = GrowthProcess::new(0.0, 0.0013).unwrap();
            let log_draws = simulate_log_growth(&g, &cfg).unwrap();
            let values: Vec<f64> = [1.0, 10.0, 50.0, 90.0, 500.0]
                .iter()
                .map(|&c| {
                    super::euler_residual_from_draws(&p, &g, c, EquationId::Static10a, &log_draws)
                        .unwrap()
                        .residual_mean
                })
                .collect();
            let kappa = (1.0 - gamma) / (1.0 - rho);
            for w in values.windows(2) {
                if kappa > 0.0 {
                    assert!(w[1] < w[0], "rho={rho}, gamma={gamma}");
                } else {
                    assert!(w[1] > w[0], "rho={rho}, gamma={gamma}");
                }
            }
        }
    }

    #[test]
    fn dynamic_residual_reduces_to_static_on_constant_path() {
        let (p, g) = standard();
        let path = GammaPath::Constant { gamma: 2.0 };
        let sol = dynamics::solve_c_path(&path, &p, &g, 4).unwrap();
        let cfg = small_config();
        let c = pricing::price_dividend_ratio(&p, &g).unwrap();
        let dyn_rep =
            euler_residual_dynamic(&p, &path, &g, &sol, 1, EquationId::Dynamic20a, &cfg).unwrap();
        let stat_rep = euler_residual_static(&p, &g, c, EquationId::Static10a, &cfg).unwrap();
        assert!((dyn_rep.residual_mean - stat_rep.residual_mean).abs() < 1e-12);
    }

    #[test]
    fn dynamic_residual_accepts_solution_at_shock() {
        let (p, g) = standard();
        let path = GammaPath::PermanentStep {
            base: 2.0,
            delta: 0.5,
            time: 2,
        };
        let sol = dynamics::solve_c_path(&path, &p, &g, 5).unwrap();
        let cfg = SimulationConfig {
            n_draws: 200_000,
            ..small_config()
        };
        for t in 0..5 {
            for which in [EquationId::Dynamic20a, EquationId::Dynamic20b] {
                let rep = euler_residual_dynamic(&p, &path, &g, &sol, t, which, &cfg).unwrap();
                assert!(rep.z_score.abs() < 4.0, "t = {t}, {which}: z = {}", rep.z_score);
            }
        }
    }

    #[test]
    fn return_moments_match_closed_forms() {
        let (p, g) = standard();
        let cfg = SimulationConfig {
            n_draws: 400_000,
            ..small_config()
        };
        let m = estimate_return_moments(&p, &g, &cfg).unwrap();
        let (e_ln_r, ln_e_r) = pricing::expected_returns(&p, &g);
        assert!((m.e_ln_r - e_ln_r).abs() < 3.0 * m.se_e_ln_r);
        assert!((m.ln_e_r - ln_e_r).abs() < 3.0 * m.se_ln_e_r);
        assert!((m.premium - pricing::equity_premium(&p, &g)).abs() < 3.0 * m.se_ln_e_r);
        // V(ln R) = sigma2; the variance of a sample variance of normals
        // is 2 sigma^4 / (n - 1)
        let se_var = (2.0 * g.sigma2() * g.sigma2() / (m.n_draws as f64 - 1.0)).sqrt();
        assert!((m.var_ln_r - g.sigma2()).abs() < 3.0 * se_var);
    }

    #[test]
    fn return_moments_exact_when_deterministic() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0).unwrap();
        let m = estimate_return_moments(&p, &g, &small_config()).unwrap();
        let (e_ln_r, ln_e_r) = pricing::expected_returns(&p, &g);
        assert!((m.e_ln_r - e_ln_r).abs() < 1e-12);
        assert!((m.ln_e_r - ln_e_r).abs() < 1e-12);
        assert!(m.premium.abs() < 1e-12);
    }

    #[test]
    fn finite_difference_matches_analytic() {
        let (p, g) = standard();
        let fd =
            finite_difference_derivative(&p, &g, FdTarget::LnEr, FdMode::GammaOnly, 1e-4).unwrap();
        assert!((fd - statics::dln_er_dgamma_ez(&p, &g)).abs() < 1e-8);

        let diag = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let fd = finite_difference_derivative(&diag, &g, FdTarget::LnEr, FdMode::GammaRhoDiagonal, 1e-4)
            .unwrap();
        assert!((fd - statics::dln_er_dgamma_ccapm(&diag, &g).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn finite_difference_riskless_diagonal_returns_mu() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.01, 0.0).unwrap();
        let fd = finite_difference_derivative(&p, &g, FdTarget::LnEr, FdMode::GammaRhoDiagonal, 1e-4)
            .unwrap();
        assert!((fd - 0.01).abs() < 1e-10);
        let fd0 =
            finite_difference_derivative(&p, &g, FdTarget::LnEr, FdMode::GammaOnly, 1e-4).unwrap();
        assert!(fd0.abs() < 1e-12);
    }

    #[test]
    fn diagonal_step_near_singularity_is_rejected() {
        let p = Preferences::new(0.02, 1.00005, 1.00005).unwrap();
        let (_, g) = standard();
        assert!(matches!(
            finite_difference_derivative(&p, &g, FdTarget::LnEr, FdMode::GammaRhoDiagonal, 1e-4),
            Err(Error::StepCrossesSingularity)
        ));
    }

    #[test]
    fn partition_is_stable() {
        let cfg = SimulationConfig {
            n_draws: 10,
            stream_count: 4,
            ..SimulationConfig::default()
        };
        assert_eq!(cfg.partition(), vec![3, 3, 2, 2]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimulationConfig::default();
        cfg.n_draws = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = SimulationConfig::default();
        cfg.stream_count = 0;
        assert!(cfg.validate().is_err());
    }
}
