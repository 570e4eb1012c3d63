//! Comparative statics of risk aversion.
//!
//! The derivative of the log expected equity return in gamma decomposes into
//! a risk-free-rate channel and a premium channel, and the equity price moves
//! opposite to the expected return. With risk aversion and intertemporal
//! substitution disentangled the total derivative is `sigma2 (1 - rho) / 2`,
//! so a risk-aversion increase lowers the price exactly when the EIS exceeds
//! one. Under the expected-utility restriction `gamma = rho` the derivative
//! is `mu + sigma2 (1 - gamma)` instead.

use crate::error::{Error, Result};
use crate::types::{GrowthProcess, Preferences};

/// Direction of the equity-price response to a risk-aversion increase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseSign {
    Falls,
    Rises,
    Unchanged,
}

impl std::fmt::Display for ResponseSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResponseSign::Falls => write!(f, "falls"),
            ResponseSign::Rises => write!(f, "rises"),
            ResponseSign::Unchanged => write!(f, "unchanged"),
        }
    }
}

/// Which preference restriction a derivative refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Ccapm,
    EpsteinZin,
}

/// Channel decomposition of `d ln E(R) / d gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub d_ln_er_d_gamma: f64,
    pub d_ln_rf_d_gamma: f64,
    pub d_premium_d_gamma: f64,
    pub price_response_sign: ResponseSign,
    pub model: Model,
}

/// Derivatives below this magnitude are classified as `Unchanged`; keeps
/// the sigma2 = 0 and exact-cancellation cases out of floating-point noise.
const SIGN_EPS: f64 = 1e-14;

fn classify(d_ln_er_d_gamma: f64) -> ResponseSign {
    // price moves opposite to the expected return
    if d_ln_er_d_gamma > SIGN_EPS {
        ResponseSign::Falls
    } else if d_ln_er_d_gamma < -SIGN_EPS {
        ResponseSign::Rises
    } else {
        ResponseSign::Unchanged
    }
}

/// `d ln E(R) / d gamma = sigma2 (1 - rho) / 2`, holding rho fixed.
pub fn dln_er_dgamma_ez(prefs: &Preferences, growth: &GrowthProcess) -> f64 {
    0.5 * growth.sigma2() * (1.0 - prefs.rho())
}

/// `d ln E(R) / d gamma = mu + sigma2 (1 - gamma)` along the expected-utility
/// diagonal gamma = rho (gamma and rho moved together).
pub fn dln_er_dgamma_ccapm(prefs: &Preferences, growth: &GrowthProcess) -> Result<f64> {
    if prefs.gamma() != prefs.rho() {
        return Err(Error::ModelMismatch {
            gamma: prefs.gamma(),
            rho: prefs.rho(),
        });
    }
    Ok(growth.mu() + growth.sigma2() * (1.0 - prefs.gamma()))
}

/// Splits the Epstein-Zin derivative into its two channels:
/// `d ln R_F / d gamma = -(1+rho) sigma2 / 2` and
/// `d premium / d gamma = sigma2`.
pub fn decompose_dln_er(prefs: &Preferences, growth: &GrowthProcess) -> DerivativeReport {
    let d_ln_rf = -0.5 * (1.0 + prefs.rho()) * growth.sigma2();
    let d_premium = growth.sigma2();
    let total = d_ln_rf + d_premium;
    debug_assert!((total - dln_er_dgamma_ez(prefs, growth)).abs() < 1e-15);
    DerivativeReport {
        d_ln_er_d_gamma: total,
        d_ln_rf_d_gamma: d_ln_rf,
        d_premium_d_gamma: d_premium,
        price_response_sign: classify(total),
        model: Model::EpsteinZin,
    }
}

/// Derivative report for the expected-utility restriction gamma = rho.
pub fn report_ccapm(prefs: &Preferences, growth: &GrowthProcess) -> Result<DerivativeReport> {
    let total = dln_er_dgamma_ccapm(prefs, growth)?;
    // along the diagonal the premium channel is still sigma2 per unit gamma
    let d_premium = growth.sigma2();
    Ok(DerivativeReport {
        d_ln_er_d_gamma: total,
        d_ln_rf_d_gamma: total - d_premium,
        d_premium_d_gamma: d_premium,
        price_response_sign: classify(total),
        model: Model::Ccapm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ez_derivative_values() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        assert!((dln_er_dgamma_ez(&p, &g) - 0.000325).abs() < 1e-15);
        let g0 = GrowthProcess::new(0.018, 0.0).unwrap();
        assert_eq!(dln_er_dgamma_ez(&p, &g0), 0.0);
    }

    #[test]
    fn ccapm_derivative_values() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.0, 0.0013).unwrap();
        assert!((dln_er_dgamma_ccapm(&p, &g).unwrap() - (-0.0013)).abs() < 1e-15);
        // exact cancellation mu = sigma2 (gamma - 1)
        let g2 = GrowthProcess::new(0.0013, 0.0013).unwrap();
        assert!(dln_er_dgamma_ccapm(&p, &g2).unwrap().abs() < 1e-18);
    }

    #[test]
    fn ccapm_requires_diagonal() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        assert!(matches!(
            dln_er_dgamma_ccapm(&p, &g),
            Err(Error::ModelMismatch { .. })
        ));
    }

    #[test]
    fn decomposition_eis_above_one() {
        let p = Preferences::new(0.02, 0.5, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        let r = decompose_dln_er(&p, &g);
        assert!((r.d_ln_rf_d_gamma - (-0.000975)).abs() < 1e-15);
        assert!((r.d_premium_d_gamma - 0.0013).abs() < 1e-15);
        assert!((r.d_ln_er_d_gamma - 0.000325).abs() < 1e-15);
        assert_eq!(r.price_response_sign, ResponseSign::Falls);
    }

    #[test]
    fn decomposition_eis_below_one() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0013).unwrap();
        let r = decompose_dln_er(&p, &g);
        assert!((r.d_ln_rf_d_gamma - (-0.00195)).abs() < 1e-15);
        assert!((r.d_premium_d_gamma - 0.0013).abs() < 1e-15);
        assert!((r.d_ln_er_d_gamma - (-0.00065)).abs() < 1e-15);
        assert_eq!(r.price_response_sign, ResponseSign::Rises);
    }

    #[test]
    fn decomposition_riskless() {
        let p = Preferences::new(0.02, 2.0, 2.0).unwrap();
        let g = GrowthProcess::new(0.018, 0.0).unwrap();
        let r = decompose_dln_er(&p, &g);
        assert_eq!(r.d_ln_er_d_gamma, 0.0);
        assert_eq!(r.price_response_sign, ResponseSign::Unchanged);
    }

    #[test]
    fn decomposition_closure() {
        for &rho in &[0.1, 0.5, 0.9, 2.0, 5.0] {
            for &s2 in &[0.0, 0.0013, 0.01] {
                let p = Preferences::new(0.02, rho, 2.0).unwrap();
                let g = GrowthProcess::new(0.018, s2).unwrap();
                let r = decompose_dln_er(&p, &g);
                let ez = dln_er_dgamma_ez(&p, &g);
                assert!((r.d_ln_rf_d_gamma + r.d_premium_d_gamma - ez).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ccapm_sign_change_at_threshold() {
        // derivative changes sign at gamma = 1 + mu / sigma2
        let mu = 0.004;
        let s2 = 0.002;
        let g = GrowthProcess::new(mu, s2).unwrap();
        let threshold = 1.0 + mu / s2; // = 3
        let below = Preferences::new(0.02, threshold - 0.5, threshold - 0.5).unwrap();
        let above = Preferences::new(0.02, threshold + 0.5, threshold + 0.5).unwrap();
        assert!(dln_er_dgamma_ccapm(&below, &g).unwrap() > 0.0);
        assert!(dln_er_dgamma_ccapm(&above, &g).unwrap() < 0.0);
    }
}
