//! Scenario files: line-oriented `key = value` pairs under `[section]`
//! headers. Sections are `preferences`, `growth`, `shock`, `simulation` and
//! `sweep`; unknown sections or keys are errors. `#` starts a comment.
//!
//! A minimal file:
//!
//! ```text
//! [preferences]
//! delta = 0.02      # or: beta = 0.9802
//! rho = 0.5
//! gamma = 2.0
//!
//! [growth]
//! mu = 0.018
//! sigma2 = 0.0013
//! ```

use std::collections::HashSet;

use crate::dynamics::GammaPath;
use crate::error::{Error, Result};
use crate::sim::SimulationConfig;
use crate::types::{GrowthProcess, Preferences};

/// Parameter axis a sweep can move along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Gamma,
    Rho,
    Delta,
    Mu,
    Sigma2,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Rho => "rho",
            SweepParam::Delta => "delta",
            SweepParam::Mu => "mu",
            SweepParam::Sigma2 => "sigma2",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepParam::Gamma),
            "rho" => Ok(SweepParam::Rho),
            "delta" => Ok(SweepParam::Delta),
            "mu" => Ok(SweepParam::Mu),
            "sigma2" => Ok(SweepParam::Sigma2),
            other => Err(Error::Validation(format!(
                "sweep parameter must be one of gamma, rho, delta, mu, sigma2; got \"{other}\""
            ))),
        }
    }
}

/// One-dimensional parameter sweep axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepSpec {
    /// Evenly spaced grid values, endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

/// Fully parsed and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub preferences: Preferences,
    pub growth: GrowthProcess,
    pub gamma_path: Option<GammaPath>,
    /// Horizon for the dynamics solve, from the shock section.
    pub horizon: Option<usize>,
    pub simulation: Option<SimulationConfig>,
    pub sweep: Option<SweepSpec>,
}

struct RawSection {
    name: String,
    line: usize,
    entries: Vec<(String, String, usize)>, // key, value, line
}

fn split_sections(text: &str) -> Result<Vec<RawSection>> {
    let mut sections: Vec<RawSection> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "section header must be of the form [name]".into(),
            })?;
            sections.push(RawSection {
                name: name.trim().to_string(),
                line: line_no,
                entries: Vec::new(),
            });
        } else if let Some((key, value)) = line.split_once('=') {
            let section = sections.last_mut().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "key before any [section] header".into(),
            })?;
            section.entries.push((
                key.trim().to_string(),
                value.trim().to_string(),
                line_no,
            ));
        } else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `key = value` or `[section]`, got \"{line}\""),
            });
        }
    }
    Ok(sections)
}

struct SectionReader {
    name: String,
    entries: Vec<(String, String, usize)>,
    used: HashSet<String>,
}

impl SectionReader {
    fn new(raw: RawSection) -> Result<Self> {
        let mut seen = HashSet::new();
        for (key, _, line) in &raw.entries {
            if !seen.insert(key.clone()) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("duplicate key \"{key}\" in [{}]", raw.name),
                });
            }
        }
        Ok(Self {
            name: raw.name,
            entries: raw.entries,
            used: HashSet::new(),
        })
    }

    fn get(&mut self, key: &str) -> Option<(String, usize)> {
        let found = self
            .entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, l)| (v.clone(), *l));
        if found.is_some() {
            self.used.insert(key.to_string());
        }
        found
    }

    fn get_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("value of \"{key}\" is not a number: \"{v}\""),
            }),
        }
    }

    fn get_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<usize>().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("value of \"{key}\" is not a non-negative integer: \"{v}\""),
            }),
        }
    }

    fn get_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => match v.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(Error::Parse {
                    line,
                    message: format!("value of \"{key}\" must be true or false, got \"{v}\""),
                }),
            },
        }
    }

    fn require_f64(&mut self, key: &str, section_line: usize) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| Error::Parse {
            line: section_line,
            message: format!("missing required key \"{key}\" in [{}]", self.name),
        })
    }

    /// Fail-closed: every key must have been consumed.
    fn finish(self) -> Result<()> {
        for (key, _, line) in &self.entries {
            if !self.used.contains(key) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("unknown key \"{key}\" in [{}]", self.name),
                });
            }
        }
        Ok(())
    }
}

/// Parses scenario text. `beta` is converted to `delta = -ln(beta)` at
/// ingestion; exactly one of the two keys may appear.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let sections = split_sections(text)?;

    let mut preferences: Option<Preferences> = None;
    let mut base_gamma = f64::NAN;
    let mut growth: Option<GrowthProcess> = None;
    let mut gamma_path: Option<GammaPath> = None;
    let mut horizon: Option<usize> = None;
    let mut simulation: Option<SimulationConfig> = None;
    let mut sweep: Option<SweepSpec> = None;
    let mut seen_sections: HashSet<String> = HashSet::new();
    let mut shock_section: Option<(SectionReader, usize)> = None;

    for raw in sections {
        let section_line = raw.line;
        if !seen_sections.insert(raw.name.clone()) {
            return Err(Error::Parse {
                line: section_line,
                message: format!("duplicate section [{}]", raw.name),
            });
        }
        let mut reader = SectionReader::new(raw)?;
        match reader.name.as_str() {
            "preferences" => {
                let delta = reader.get_f64("delta")?;
                let beta = reader.get_f64("beta")?;
                let rho = reader.require_f64("rho", section_line)?;
                let gamma = reader.require_f64("gamma", section_line)?;
                let prefs = match (delta, beta) {
                    (Some(d), None) => Preferences::new(d, rho, gamma)?,
                    (None, Some(b)) => Preferences::from_beta(b, rho, gamma)?,
                    (Some(_), Some(_)) => {
                        return Err(Error::Validation(
                            "exactly one of delta/beta may be given".into(),
                        ))
                    }
                    (None, None) => {
                        return Err(Error::Parse {
                            line: section_line,
                            message: "one of delta or beta is required in [preferences]".into(),
                        })
                    }
                };
                base_gamma = gamma;
                preferences = Some(prefs);
            }
            "growth" => {
                let mu = reader.require_f64("mu", section_line)?;
                let sigma2 = reader.require_f64("sigma2", section_line)?;
                growth = Some(GrowthProcess::new(mu, sigma2)?);
            }
            "shock" => {
                // resolved after [preferences] so the base gamma is known
                shock_section = Some((reader, section_line));
                continue;
            }
            "simulation" => {
                let mut cfg = SimulationConfig::default();
                if let Some(n) = reader.get_usize("draws")? {
                    cfg.n_draws = n;
                }
                if let Some(h) = reader.get_usize("horizon")? {
                    cfg.horizon = h;
                }
                if let Some((v, line)) = reader.get("seed") {
                    cfg.seed = v.parse::<u64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("value of \"seed\" is not a u64: \"{v}\""),
                    })?;
                }
                if let Some(s) = reader.get_usize("streams")? {
                    cfg.stream_count = s;
                }
                if let Some(a) = reader.get_bool("antithetic")? {
                    cfg.antithetic = a;
                }
                cfg.validate()?;
                simulation = Some(cfg);
            }
            "sweep" => {
                let (param_str, line) = reader.get("parameter").ok_or(Error::Parse {
                    line: section_line,
                    message: "missing required key \"parameter\" in [sweep]".into(),
                })?;
                let parameter: SweepParam = param_str.parse().map_err(|e| match e {
                    Error::Validation(m) => Error::Parse { line, message: m },
                    other => other,
                })?;
                let start = reader.require_f64("start", section_line)?;
                let stop = reader.require_f64("stop", section_line)?;
                let count = reader.get_usize("count")?.ok_or(Error::Parse {
                    line: section_line,
                    message: "missing required key \"count\" in [sweep]".into(),
                })?;
                if count == 0 {
                    return Err(Error::Validation("sweep count must be positive".into()));
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err(Error::Validation(
                        "sweep start and stop must be finite".into(),
                    ));
                }
                sweep = Some(SweepSpec {
                    parameter,
                    start,
                    stop,
                    count,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: section_line,
                    message: format!("unknown section [{other}]"),
                });
            }
        }
        reader.finish()?;
    }

    let preferences = preferences.ok_or(Error::Parse {
        line: 0,
        message: "missing [preferences] section".into(),
    })?;
    let growth = growth.ok_or(Error::Parse {
        line: 0,
        message: "missing [growth] section".into(),
    })?;

    if let Some((mut reader, section_line)) = shock_section {
        let (kind, kind_line) = reader.get("kind").ok_or(Error::Parse {
            line: section_line,
            message: "missing required key \"kind\" in [shock]".into(),
        })?;
        let path = match kind.as_str() {
            "constant" => GammaPath::Constant { gamma: base_gamma },
            "permanent" | "transitory" => {
                let delta = reader.require_f64("delta", section_line)?;
                let time = reader.get_usize("time")?.unwrap_or(1);
                if kind == "permanent" {
                    GammaPath::PermanentStep {
                        base: base_gamma,
                        delta,
                        time,
                    }
                } else {
                    GammaPath::TransitoryPulse {
                        base: base_gamma,
                        delta,
                        time,
                    }
                }
            }
            "custom" => {
                let (values_str, values_line) = reader.get("values").ok_or(Error::Parse {
                    line: section_line,
                    message: "missing required key \"values\" in [shock]".into(),
                })?;
                let values: Vec<f64> = values_str
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| Error::Parse {
                            line: values_line,
                            message: format!("bad gamma value \"{}\" in \"values\"", s.trim()),
                        })
                    })
                    .collect::<Result<_>>()?;
                let terminal = reader.require_f64("terminal", section_line)?;
                GammaPath::Custom { values, terminal }
            }
            other => {
                return Err(Error::Parse {
                    line: kind_line,
                    message: format!(
                        "shock kind must be constant, permanent, transitory or custom; got \"{other}\""
                    ),
                })
            }
        };
        path.validate()?;
        horizon = reader.get_usize("horizon")?;
        reader.finish()?;
        gamma_path = Some(path);
    }

    Ok(Scenario {
        preferences,
        growth,
        gamma_path,
        horizon,
        simulation,
        sweep,
    })
}

/// Serializes a scenario back to text. `parse_scenario(emit_scenario(s))`
/// reproduces `s` exactly; floats are written in shortest round-trip form.
pub fn emit_scenario(s: &Scenario) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "[preferences]").unwrap();
    writeln!(out, "delta = {}", s.preferences.delta()).unwrap();
    writeln!(out, "rho = {}", s.preferences.rho()).unwrap();
    writeln!(out, "gamma = {}", s.preferences.gamma()).unwrap();
    writeln!(out, "\n[growth]").unwrap();
    writeln!(out, "mu = {}", s.growth.mu()).unwrap();
    writeln!(out, "sigma2 = {}", s.growth.sigma2()).unwrap();
    if let Some(path) = &s.gamma_path {
        writeln!(out, "\n[shock]").unwrap();
        match path {
            GammaPath::Constant { .. } => {
                writeln!(out, "kind = constant").unwrap();
            }
            GammaPath::PermanentStep { delta, time, .. } => {
                writeln!(out, "kind = permanent").unwrap();
                writeln!(out, "delta = {delta}").unwrap();
                writeln!(out, "time = {time}").unwrap();
            }
            GammaPath::TransitoryPulse { delta, time, .. } => {
                writeln!(out, "kind = transitory").unwrap();
                writeln!(out, "delta = {delta}").unwrap();
                writeln!(out, "time = {time}").unwrap();
            }
            GammaPath::Custom { values, terminal } => {
                writeln!(out, "kind = custom").unwrap();
                let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                writeln!(out, "values = {}", joined.join(", ")).unwrap();
                writeln!(out, "terminal = {terminal}").unwrap();
            }
        }
        if let Some(h) = s.horizon {
            writeln!(out, "horizon = {h}").unwrap();
        }
    }
    if let Some(cfg) = &s.simulation {
        writeln!(out, "\n[simulation]").unwrap();
        writeln!(out, "draws = {}", cfg.n_draws).unwrap();
        writeln!(out, "horizon = {}", cfg.horizon).unwrap();
        writeln!(out, "seed = {}", cfg.seed).unwrap();
        writeln!(out, "streams = {}", cfg.stream_count).unwrap();
        writeln!(out, "antithetic = {}", cfg.antithetic).unwrap();
    }
    if let Some(sweep) = &s.sweep {
        writeln!(out, "\n[sweep]").unwrap();
        writeln!(out, "parameter = {}", sweep.parameter.name()).unwrap();
        writeln!(out, "start = {}", sweep.start).unwrap();
        writeln!(out, "stop = {}", sweep.stop).unwrap();
        writeln!(out, "count = {}", sweep.count).unwrap();
    }
    out
}
