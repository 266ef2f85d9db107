//! Run configuration: a TOML file whose values can be overridden by flags.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use dampo_core::quad::QuadConfig;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub oscillator: OscillatorSection,
    #[serde(default)]
    pub temperature: TemperatureSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

/// Exactly one of the model sources must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub parametric: Option<ParametricModel>,
    pub coupling: Option<CouplingModel>,
    pub ohmic: Option<OhmicModel>,
    pub table: Option<TableModel>,
}

/// Three-pole spectral weight; complex rates are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricModel {
    #[serde(rename = "Gamma")]
    pub big_gamma: f64,
    pub gamma_plus: [f64; 2],
    pub gamma_minus: [f64; 2],
}

impl ParametricModel {
    pub fn rates(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.gamma_plus[0], self.gamma_plus[1]),
            Complex64::new(self.gamma_minus[0], self.gamma_minus[1]),
        )
    }
}

/// Coupling amplitude `V(ω)` read from a CSV with header `omega,v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingModel {
    pub path: PathBuf,
    pub cutoff: Option<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

/// Ohmic bath `J(ω) = mγω e^{−ω/ω_c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OhmicModel {
    pub gamma: f64,
    pub omega_c: f64,
}

/// Tabulated π read from a CSV with header `omega,pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableModel {
    pub path: PathBuf,
    #[serde(default = "four")]
    pub tail_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorSection {
    #[serde(default = "one")]
    pub m: f64,
    /// Short-time frequency Ω₀.
    #[serde(rename = "Omega0")]
    pub omega0_big: Option<f64>,
    /// Long-time frequency ω₀.
    pub omega0: Option<f64>,
}

impl Default for OscillatorSection {
    fn default() -> Self {
        Self { m: 1.0, omega0_big: None, omega0: None }
    }
}

/// Inverse temperature, a positive number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Beta {
    Value(f64),
    Named(BetaName),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaName {
    Inf,
}

impl Beta {
    pub fn value(&self) -> f64 {
        match self {
            Beta::Value(v) => *v,
            Beta::Named(BetaName::Inf) => f64::INFINITY,
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Beta::Named(BetaName::Inf));
        }
        t.parse::<f64>().map(Beta::Value).map_err(|_| CliError::Config(format!("cannot parse beta `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemperatureSection {
    pub beta: Beta,
}

impl Default for TemperatureSection {
    fn default() -> Self {
        Self { beta: Beta::Named(BetaName::Inf) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { start: 0.0, stop: 20.0, points: 201, spacing: Spacing::Linear }
    }
}

impl TimeSection {
    /// The time grid. A single point yields `[start]`. Logarithmic grids
    /// start at `start` (which must then be positive).
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Config("time.points must be at least 1".into()));
        }
        if !(self.start >= 0.0) || !(self.stop >= self.start) || !self.stop.is_finite() {
            return Err(CliError::Config(format!("invalid time range [{}, {}]", self.start, self.stop)));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let n = self.points - 1;
        Ok(match self.spacing {
            Spacing::Linear => (0..=n).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect(),
            Spacing::Log => {
                if !(self.start > 0.0) {
                    return Err(CliError::Config("logarithmic time grids need start > 0".into()));
                }
                let r = (self.stop / self.start).ln();
                (0..=n).map(|i| self.start * (r * i as f64 / n as f64).exp()).collect()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-11, max_subdivisions: 200_000 }
    }
}

impl QuadratureSection {
    pub fn to_config(&self) -> Result<QuadConfig, CliError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(CliError::Config("quadrature tolerances must be positive".into()));
        }
        Ok(QuadConfig::default()
            .with_rel_tol(self.rel_tol)
            .with_abs_tol(self.abs_tol)
            .with_max_subdivisions(self.max_subdivisions))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output file or directory (commands decide); stdout when absent.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub p0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub n_modes: usize,
    /// Upper discretisation frequency; defaults to ten times the largest
    /// characteristic frequency of the model.
    pub omega_max: Option<f64>,
    /// Largest tolerated relative deviation.
    pub bound: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { n_modes: 300, omega_max: None, bound: 0.01 }
    }
}

fn one() -> f64 {
    1.0
}

fn four() -> f64 {
    4.0
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Read a config file; relative data paths are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(c) = cfg.model.coupling.as_mut() {
            if c.path.is_relative() {
                c.path = base.join(&c.path);
            }
        }
        if let Some(t) = cfg.model.table.as_mut() {
            if t.path.is_relative() {
                t.path = base.join(&t.path);
            }
        }
        Ok(cfg)
    }

    /// Number of model sources given.
    pub fn model_count(&self) -> usize {
        let m = &self.model;
        [m.parametric.is_some(), m.coupling.is_some(), m.ohmic.is_some(), m.table.is_some()]
            .iter()
            .filter(|b| **b)
            .count()
    }

    /// Echo of the effective configuration as comment lines.
    pub fn echo(&self) -> Vec<String> {
        let text = toml::to_string(self).unwrap_or_default();
        let mut lines = vec![format!("dampo {}", env!("CARGO_PKG_VERSION"))];
        lines.extend(text.lines().filter(|l| !l.trim().is_empty()).map(str::to_owned));
        lines
    }
}
