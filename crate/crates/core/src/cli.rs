//! Command-line front end: scenario ingestion, one subcommand per analysis,
//! table or CSV emission.
//!
//! Exit codes: 0 success, 2 validation or parse error, 3 no equilibrium,
//! 4 verification failure, 1 unexpected internal error.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dynamics;
use crate::error::Error;
use crate::pricing::{self, Equilibrium};
use crate::scenario::{self, Scenario, SweepParam};
use crate::sim::{self, EquationId};
use crate::statics;
use crate::types::{GrowthProcess, Preferences};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NO_EQUILIBRIUM: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// Absolute z-score above which `verify` fails.
const VERIFY_Z_GATE: f64 = 4.0;

#[derive(Debug, Parser)]
#[command(
    name = "treeprice",
    about = "Equilibrium asset pricing on a lognormal endowment tree with recursive utility"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file path.
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,

    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,

    /// Override the scenario's random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override the scenario's Monte Carlo draw count.
    #[arg(long, global = true)]
    pub draws: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form equilibrium quantities.
    Equilibrium,
    /// Comparative statics of risk aversion.
    Statics,
    /// Price-dividend path under the scenario's gamma path.
    Dynamics,
    /// Monte Carlo return-moment estimates.
    Simulate,
    /// Monte Carlo Euler-residual verification.
    Verify,
    /// Parameter sweep of the equilibrium quantities.
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
}

/// Rows of (column values); the first row is implicit in the schema.
struct Output {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Output {
    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => {
                let mut out = String::new();
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Table => {
                let mut widths: Vec<usize> =
                    self.columns.iter().map(|c| c.len()).collect();
                for row in &self.rows {
                    for (i, cell) in row.iter().enumerate() {
                        widths[i] = widths[i].max(cell.len());
                    }
                }
                let mut out = String::new();
                for (i, c) in self.columns.iter().enumerate() {
                    if i > 0 {
                        out.push_str("  ");
                    }
                    out.push_str(&format!("{:<width$}", c, width = widths[i]));
                }
                out.push('\n');
                for row in &self.rows {
                    for (i, cell) in row.iter().enumerate() {
                        if i > 0 {
                            out.push_str("  ");
                        }
                        out.push_str(&format!("{:<width$}", cell, width = widths[i]));
                    }
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn fmt(v: f64) -> String {
    // shortest representation that parses back exactly
    format!("{v}")
}

/// Runs the parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) | Error::Parse { .. } => EXIT_VALIDATION,
                Error::NoEquilibrium { .. } => EXIT_NO_EQUILIBRIUM,
                _ => EXIT_INTERNAL,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32, Error> {
    let path = cli.scenario.as_ref().ok_or_else(|| {
        Error::Validation("--scenario <path> is required".into())
    })?;
    let text = fs::read_to_string(path)?;
    let mut scenario = scenario::parse_scenario(&text)?;

    if cli.seed.is_some() || cli.draws.is_some() {
        let mut cfg = scenario.simulation.unwrap_or_default();
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if let Some(draws) = cli.draws {
            cfg.n_draws = draws;
        }
        cfg.validate()?;
        scenario.simulation = Some(cfg);
    }

    let (output, code) = match cli.command {
        Command::Equilibrium => (equilibrium_output(&scenario)?, EXIT_OK),
        Command::Statics => (statics_output(&scenario)?, EXIT_OK),
        Command::Dynamics => (dynamics_output(&scenario)?, EXIT_OK),
        Command::Simulate => (simulate_output(&scenario)?, EXIT_OK),
        Command::Verify => verify_output(&scenario)?,
        Command::Sweep => (sweep_output(&scenario)?, EXIT_OK),
    };

    let text = output.render(cli.format);
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn equilibrium_rows(prefs: &Preferences, growth: &GrowthProcess) -> Result<Vec<(String, f64)>, Error> {
    let eq = Equilibrium::solve(prefs, growth)?;
    Ok(vec![
        ("h".to_string(), pricing::h_value(prefs, growth)),
        ("price_dividend_ratio".to_string(), eq.c),
        ("risk_free_rate_log".to_string(), eq.ln_rf),
        ("expected_log_return".to_string(), eq.e_ln_r),
        ("log_expected_return".to_string(), eq.ln_e_r),
        ("equity_premium_log".to_string(), eq.premium),
        ("consumption_wealth_ratio".to_string(), eq.a),
    ])
}

fn equilibrium_output(s: &Scenario) -> Result<Output, Error> {
    let rows = equilibrium_rows(&s.preferences, &s.growth)?
        .into_iter()
        .map(|(k, v)| vec![k, fmt(v)])
        .collect();
    Ok(Output {
        columns: &["quantity", "value"],
        rows,
    })
}

fn statics_output(s: &Scenario) -> Result<Output, Error> {
    let mut rows = Vec::new();
    let ez = statics::decompose_dln_er(&s.preferences, &s.growth);
    push_report(&mut rows, "epstein_zin", &ez);
    if s.preferences.gamma() == s.preferences.rho() {
        let ccapm = statics::report_ccapm(&s.preferences, &s.growth)?;
        push_report(&mut rows, "ccapm", &ccapm);
    }
    if s.preferences.rho() > 1.0 && s.growth.sigma2() > 0.0 {
        eprintln!(
            "warning: rho > 1 (EIS below one): a risk-aversion increase raises the asset price"
        );
    }
    Ok(Output {
        columns: &["model", "quantity", "value"],
        rows,
    })
}

fn push_report(rows: &mut Vec<Vec<String>>, model: &str, r: &statics::DerivativeReport) {
    rows.push(vec![
        model.to_string(),
        "d_log_expected_return_d_gamma".to_string(),
        fmt(r.d_ln_er_d_gamma),
    ]);
    rows.push(vec![
        model.to_string(),
        "d_risk_free_rate_d_gamma".to_string(),
        fmt(r.d_ln_rf_d_gamma),
    ]);
    rows.push(vec![
        model.to_string(),
        "d_premium_d_gamma".to_string(),
        fmt(r.d_premium_d_gamma),
    ]);
    rows.push(vec![
        model.to_string(),
        "price_response".to_string(),
        r.price_response_sign.to_string(),
    ]);
}

fn dynamics_output(s: &Scenario) -> Result<Output, Error> {
    let path = s.gamma_path.clone().ok_or_else(|| {
        Error::Validation("the dynamics command requires a [shock] section".into())
    })?;
    let horizon = s.horizon.unwrap_or_else(|| path.constant_from() + 20);
    let sol = dynamics::solve_c_path(&path, &s.preferences, &s.growth, horizon)?;
    let mut rows = Vec::new();
    for t in 0..=horizon {
        rows.push(vec![
            t.to_string(),
            "gamma".to_string(),
            fmt(path.gamma_at(t)),
        ]);
        rows.push(vec![t.to_string(), "h".to_string(), fmt(sol.h_series[t])]);
        rows.push(vec![t.to_string(), "c".to_string(), fmt(sol.c_series[t])]);
    }
    Ok(Output {
        columns: &["period", "series", "value"],
        rows,
    })
}

fn simulate_output(s: &Scenario) -> Result<Output, Error> {
    let cfg = s.simulation.unwrap_or_default();
    let m = sim::estimate_return_moments(&s.preferences, &s.growth, &cfg)?;
    let (e_ln_r, ln_e_r) = pricing::expected_returns(&s.preferences, &s.growth);
    let rows = vec![
        ("sample_expected_log_return", m.e_ln_r),
        ("sample_expected_log_return_se", m.se_e_ln_r),
        ("sample_log_expected_return", m.ln_e_r),
        ("sample_log_expected_return_se", m.se_ln_e_r),
        ("sample_premium", m.premium),
        ("sample_log_return_variance", m.var_ln_r),
        ("analytic_expected_log_return", e_ln_r),
        ("analytic_log_expected_return", ln_e_r),
        (
            "analytic_premium",
            pricing::equity_premium(&s.preferences, &s.growth),
        ),
        ("draws", m.n_draws as f64),
    ]
    .into_iter()
    .map(|(k, v)| vec![k.to_string(), fmt(v)])
    .collect();
    Ok(Output {
        columns: &["quantity", "value"],
        rows,
    })
}

fn verify_output(s: &Scenario) -> Result<(Output, i32), Error> {
    let cfg = s.simulation.unwrap_or_default();
    let prefs = &s.preferences;
    let growth = &s.growth;
    let c = pricing::price_dividend_ratio(prefs, growth)?;

    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut push = |name: &str, mean: f64, se: f64, z: f64| {
        let pass = z.abs() <= VERIFY_Z_GATE;
        rows.push(vec![
            name.to_string(),
            fmt(mean),
            fmt(se),
            fmt(z),
            if pass { "pass" } else { "fail" }.to_string(),
        ]);
        pass
    };

    for which in [EquationId::Static10a, EquationId::Static10b] {
        let rep = sim::euler_residual_static(prefs, growth, c, which, &cfg)?;
        all_pass &= push(
            &format!("euler_{which}"),
            rep.residual_mean,
            rep.std_error,
            rep.z_score,
        );
    }

    let m = sim::estimate_return_moments(prefs, growth, &cfg)?;
    let (e_ln_r, ln_e_r) = pricing::expected_returns(prefs, growth);
    let z_or_zero = |diff: f64, se: f64| if se == 0.0 { 0.0 } else { diff / se };
    all_pass &= push(
        "expected_log_return",
        m.e_ln_r,
        m.se_e_ln_r,
        z_or_zero(m.e_ln_r - e_ln_r, m.se_e_ln_r),
    );
    all_pass &= push(
        "log_expected_return",
        m.ln_e_r,
        m.se_ln_e_r,
        z_or_zero(m.ln_e_r - ln_e_r, m.se_ln_e_r),
    );
    all_pass &= push(
        "premium",
        m.premium,
        m.se_ln_e_r,
        z_or_zero(m.premium - pricing::equity_premium(prefs, growth), m.se_ln_e_r),
    );

    // dynamic Euler conditions when the scenario declares a gamma path
    if let Some(path) = &s.gamma_path {
        let horizon = s.horizon.unwrap_or_else(|| path.constant_from() + 4);
        let sol = dynamics::solve_c_path(path, prefs, growth, horizon)?;
        for t in 0..horizon {
            for which in [EquationId::Dynamic20a, EquationId::Dynamic20b] {
                let rep = sim::euler_residual_dynamic(prefs, path, growth, &sol, t, which, &cfg)?;
                all_pass &= push(
                    &format!("euler_{which}_t{t}"),
                    rep.residual_mean,
                    rep.std_error,
                    rep.z_score,
                );
            }
        }
    }

    let output = Output {
        columns: &["check", "mean", "std_error", "z_score", "status"],
        rows,
    };
    Ok((output, if all_pass { EXIT_OK } else { EXIT_VERIFICATION }))
}

fn sweep_output(s: &Scenario) -> Result<Output, Error> {
    let spec = s.sweep.ok_or_else(|| {
        Error::Validation("the sweep command requires a [sweep] section".into())
    })?;
    let mut rows = Vec::new();
    for value in spec.values() {
        let (prefs, growth) = apply_sweep_value(s, spec.parameter, value)?;
        // rates and premia exist for every valid point; the price level
        // additionally needs h < 1
        let (e_ln_r, ln_e_r) = pricing::expected_returns(&prefs, &growth);
        let mut push = |series: &str, v: f64| {
            rows.push(vec![
                spec.parameter.name().to_string(),
                fmt(value),
                series.to_string(),
                fmt(v),
            ]);
        };
        push("h", pricing::h_value(&prefs, &growth));
        push("risk_free_rate_log", pricing::risk_free_rate(&prefs, &growth));
        push("expected_log_return", e_ln_r);
        push("log_expected_return", ln_e_r);
        push("equity_premium_log", pricing::equity_premium(&prefs, &growth));
        if let Ok(c) = pricing::price_dividend_ratio(&prefs, &growth) {
            push("price_dividend_ratio", c);
            push("consumption_wealth_ratio", 1.0 / (1.0 + c));
        }
    }
    Ok(Output {
        columns: &["parameter", "param_value", "series", "value"],
        rows,
    })
}

fn apply_sweep_value(
    s: &Scenario,
    param: SweepParam,
    value: f64,
) -> Result<(Preferences, GrowthProcess), Error> {
    let p = &s.preferences;
    let g = &s.growth;
    Ok(match param {
        SweepParam::Gamma => (Preferences::new(p.delta(), p.rho(), value)?, *g),
        SweepParam::Rho => (Preferences::new(p.delta(), value, p.gamma())?, *g),
        SweepParam::Delta => (Preferences::new(value, p.rho(), p.gamma())?, *g),
        SweepParam::Mu => (*p, GrowthProcess::new(value, g.sigma2())?),
        SweepParam::Sigma2 => (*p, GrowthProcess::new(g.mu(), value)?),
    })
}
