//! Closed-form equilibrium quantities of the constant-risk-aversion model.
//!
//! With i.i.d. lognormal dividend growth the price function is homogeneous,
//! `p_t = c q_t`, and the price-dividend ratio satisfies `c/(1+c) = h` where
//! `h = exp[-delta + (1-rho) mu + (1-rho)(1-gamma) sigma2 / 2]`. An
//! equilibrium with a finite positive price exists iff `h < 1`.

use crate::error::{Error, Result};
use crate::types::{GrowthProcess, Preferences};

/// All equilibrium quantities for one parameter point. Log rates are
/// per period in natural logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    /// Price-dividend ratio.
    pub c: f64,
    /// Log gross risk-free rate, ln R_F.
    pub ln_rf: f64,
    /// Expected log equity return, E(ln R).
    pub e_ln_r: f64,
    /// Log expected gross equity return, ln E(R).
    pub ln_e_r: f64,
    /// Log equity premium, ln E(R) - ln R_F.
    pub premium: f64,
    /// Consumption-wealth ratio, a = 1/(1+c).
    pub a: f64,
}

impl Equilibrium {
    pub fn solve(prefs: &Preferences, growth: &GrowthProcess) -> Result<Self> {
        let c = price_dividend_ratio(prefs, growth)?;
        let (e_ln_r, ln_e_r) = expected_returns(prefs, growth);
        Ok(Self {
            c,
            ln_rf: risk_free_rate(prefs, growth),
            e_ln_r,
            ln_e_r,
            premium: equity_premium(prefs, growth),
            a: 1.0 / (1.0 + c),
        })
    }
}

/// Discounted growth factor `h = exp[-delta + (1-rho) mu
/// + (1-rho)(1-gamma) sigma2 / 2]`, the right-hand side of the
/// price-dividend fixed point `c/(1+c) = h`.
pub fn h_value(prefs: &Preferences, growth: &GrowthProcess) -> f64 {
    log_h_value(prefs, growth).exp()
}

pub(crate) fn log_h_value(prefs: &Preferences, growth: &GrowthProcess) -> f64 {
    let one_minus_rho = 1.0 - prefs.rho();
    -prefs.delta()
        + one_minus_rho * growth.mu()
        + 0.5 * one_minus_rho * (1.0 - prefs.gamma()) * growth.sigma2()
}

/// Price-dividend ratio `c = h/(1-h)`, the unique positive solution of
/// `c/(1+c) = h`. Fails with [`Error::NoEquilibrium`] when `h >= 1`.
pub fn price_dividend_ratio(prefs: &Preferences, growth: &GrowthProcess) -> Result<f64> {
    let h = h_value(prefs, growth);
    if h >= 1.0 {
        return Err(Error::NoEquilibrium { h });
    }
    Ok(h / (1.0 - h))
}

/// Log gross risk-free rate:
/// `ln R_F = delta + rho (mu + sigma2/2) - gamma (1+rho) sigma2 / 2`.
pub fn risk_free_rate(prefs: &Preferences, growth: &GrowthProcess) -> f64 {
    prefs.delta() + prefs.rho() * (growth.mu() + 0.5 * growth.sigma2())
        - 0.5 * prefs.gamma() * (1.0 + prefs.rho()) * growth.sigma2()
}

/// Log equity premium `ln E(R) - ln R_F = gamma * sigma2`.
pub fn equity_premium(prefs: &Preferences, growth: &GrowthProcess) -> f64 {
    prefs.gamma() * growth.sigma2()
}

/// Expected returns `(E(ln R), ln E(R))`.
///
/// `E(ln R) = delta + rho mu - (1-rho)(1-gamma) sigma2 / 2` and, because
/// `R = ((1+c)/c) y` is lognormal with `V(ln R) = sigma2`,
/// `ln E(R) = E(ln R) + sigma2 / 2`.
pub fn expected_returns(prefs: &Preferences, growth: &GrowthProcess) -> (f64, f64) {
    let e_ln_r = prefs.delta() + prefs.rho() * growth.mu()
        - 0.5 * (1.0 - prefs.rho()) * (1.0 - prefs.gamma()) * growth.sigma2();
    (e_ln_r, e_ln_r + 0.5 * growth.sigma2())
}

/// Equity price for current dividend `q`: `p = c * q`.
pub fn price(prefs: &Preferences, growth: &GrowthProcess, q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Validation(format!("dividend q must be positive, got {q}")));
    }
    Ok(price_dividend_ratio(prefs, growth)? * q)
}

/// Equity price computed through the expected-return form
/// `p = x q / (1 - x)` with `x = exp[mu + sigma2/2 - ln E(R)]`.
///
/// Algebraically identical to [`price`]; kept as the independent second
/// route for the price-form equivalence check.
pub fn price_via_expected_return(
    prefs: &Preferences,
    growth: &GrowthProcess,
    q: f64,
) -> Result<f64> {
    if !(q > 0.0) {
        return Err(Error::Validation(format!("dividend q must be positive, got {q}")));
    }
    let (_, ln_e_r) = expected_returns(prefs, growth);
    let x = (growth.mu() + 0.5 * growth.sigma2() - ln_e_r).exp();
    if x >= 1.0 {
        return Err(Error::NoEquilibrium { h: x });
    }
    Ok(x * q / (1.0 - x))
}

/// Consumption-wealth ratio `a = 1/(1+c)`.
pub fn consumption_wealth_ratio(prefs: &Preferences, growth: &GrowthProcess) -> Result<f64> {
    Ok(1.0 / (1.0 + price_dividend_ratio(prefs, growth)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> (Preferences, GrowthProcess) {
        (
            Preferences::new(0.02, 0.5, 2.0).unwrap(),
            GrowthProcess::new(0.018, 0.0013).unwrap(),
        )
    }

    #[test]
    fn h_deterministic_no_growth() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0).unwrap();
        assert!((h_value(&p, &g) - (-0.02f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn h_unity_when_all_terms_vanish() {
        let p = Preferences::new(0.0, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0).unwrap();
        assert_eq!(h_value(&p, &g), 1.0);
    }

    #[test]
    fn h_standard_point() {
        let (p, g) = standard();
        assert!((h_value(&p, &g) - 0.9887388864138543).abs() < 1e-15);
    }

    #[test]
    fn pd_ratio_deterministic() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0).unwrap();
        let c = price_dividend_ratio(&p, &g).unwrap();
        assert!((c - 49.50166665555553).abs() < 1e-10);
    }

    #[test]
    fn pd_ratio_standard_point() {
        let (p, g) = standard();
        let c = price_dividend_ratio(&p, &g).unwrap();
        assert!((c - 87.80116449853415).abs() < 1e-9);
    }

    #[test]
    fn no_equilibrium_at_h_one() {
        let p = Preferences::new(0.0, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0).unwrap();
        assert!(matches!(
            price_dividend_ratio(&p, &g),
            Err(Error::NoEquilibrium { .. })
        ));
    }

    #[test]
    fn risk_free_deterministic_stationary() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0).unwrap();
        assert!((risk_free_rate(&p, &g) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn risk_free_no_variance_growth() {
        let p = Preferences::new(0.0, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.01, 0.0).unwrap();
        assert!((risk_free_rate(&p, &g) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn risk_free_standard_point() {
        let (p, g) = standard();
        assert!((risk_free_rate(&p, &g) - 0.027375).abs() < 1e-12);
    }

    #[test]
    fn premium_is_gamma_sigma2() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        assert!((equity_premium(&p, &g) - 0.0026).abs() < 1e-15);
        let p10 = p.with_gamma(10.0).unwrap();
        assert!((equity_premium(&p10, &g) - 0.013).abs() < 1e-15);
        let g0 = GrowthProcess::new(0.018, 0.0).unwrap();
        assert_eq!(equity_premium(&p, &g0), 0.0);
    }

    #[test]
    fn expected_returns_riskless() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.01, 0.0).unwrap();
        let (e_ln_r, ln_e_r) = expected_returns(&p, &g);
        assert!((e_ln_r - 0.04).abs() < 1e-15);
        assert_eq!(e_ln_r, ln_e_r);
    }

    #[test]
    fn expected_returns_standard_point() {
        let (p, g) = standard();
        let (e_ln_r, ln_e_r) = expected_returns(&p, &g);
        assert!((e_ln_r - 0.029325).abs() < 1e-12);
        assert!((ln_e_r - 0.029975).abs() < 1e-12);
    }

    #[test]
    fn premium_identity() {
        let (p, g) = standard();
        let (_, ln_e_r) = expected_returns(&p, &g);
        let lhs = ln_e_r - risk_free_rate(&p, &g);
        assert!((lhs - equity_premium(&p, &g)).abs() < 1e-12);
    }

    #[test]
    fn price_is_homogeneous() {
        let (p, g) = standard();
        let p1 = price(&p, &g, 1.0).unwrap();
        let p2 = price(&p, &g, 2.0).unwrap();
        assert_eq!(p2, 2.0 * p1);
        assert!((p1 - 87.80116449853415).abs() < 1e-9);
    }

    #[test]
    fn price_rejects_nonpositive_dividend() {
        let (p, g) = standard();
        assert!(price(&p, &g, 0.0).is_err());
        assert!(price(&p, &g, -1.0).is_err());
    }

    #[test]
    fn price_form_equivalence_standard_point() {
        let (p, g) = standard();
        let lhs = price(&p, &g, 1.0).unwrap();
        let rhs = price_via_expected_return(&p, &g, 1.0).unwrap();
        assert!(((lhs - rhs) / lhs).abs() < 1e-10);
    }

    #[test]
    fn consumption_wealth_identity() {
        let (p, g) = standard();
        let c = price_dividend_ratio(&p, &g).unwrap();
        let a = consumption_wealth_ratio(&p, &g).unwrap();
        assert!((a + c * a - 1.0).abs() < 1e-12);
        assert!((a - 0.011261113586145677).abs() < 1e-12);

        let pd = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let gd = GrowthProcess::new(0.0, 0.0).unwrap();
        let a0 = consumption_wealth_ratio(&pd, &gd).unwrap();
        assert!((a0 - 0.019802).abs() < 1e-6);
    }

    #[test]
    fn pd_ratio_monotone_in_gamma_sign() {
        // sign(dc/dgamma) = sign(rho - 1) for sigma2 > 0
        let g = GrowthProcess::new(0.01, 0.004).unwrap();
        for &rho in &[0.25, 0.5, 2.0, 4.0] {
            let delta = 0.06;
            let gamma = 3.0;
            let step = 1e-5;
            let lo = Preferences::new(delta, rho, gamma - step).unwrap();
            let hi = Preferences::new(delta, rho, gamma + step).unwrap();
            let dc = price_dividend_ratio(&hi, &g).unwrap() - price_dividend_ratio(&lo, &g).unwrap();
            assert_eq!(dc.signum(), (rho - 1.0).signum(), "rho = {rho}");
        }
    }

    #[test]
    fn ccapm_reduction_stays_valid() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        let eq = Equilibrium::solve(&p, &g).unwrap();
        assert!(eq.c > 0.0);
        assert!((eq.ln_e_r - eq.ln_rf - eq.premium).abs() < 1e-15);
    }
}
