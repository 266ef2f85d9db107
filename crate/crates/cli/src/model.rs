//! Turn a [`RunConfig`] into a spectral weight plus oscillator parameters.

use std::fs::File;

use dampo_core::bath::OhmicBath;
use dampo_core::fano::{self, CouplingSpectrum, FanoError};
use dampo_core::io::read_two_columns;
use dampo_core::spectral::SpectralDensity;

use crate::config::RunConfig;
use crate::CliError;

/// Where the spectral weight came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Parametric,
    Coupling,
    Ohmic,
    Table,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Parametric => "parametric",
            Source::Coupling => "coupling",
            Source::Ohmic => "ohmic",
            Source::Table => "table",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub source: Source,
    /// `None` for an uncoupled oscillator, whose weight is a delta at Ω₀.
    pub density: Option<SpectralDensity>,
    pub coupling: Option<CouplingSpectrum>,
    pub ohmic: Option<OhmicBath>,
    pub m: f64,
    pub omega0_big: f64,
    /// Long-time frequency where the model defines one.
    pub omega0: Option<f64>,
}

impl Model {
    pub fn density(&self) -> Result<&SpectralDensity, CliError> {
        self.density.as_ref().ok_or_else(|| {
            CliError::Physics("the oscillator is uncoupled: its spectral weight is a delta function at Ω₀".into())
        })
    }
}

fn check_omega0_big(given: Option<f64>, derived: f64) -> Result<(), CliError> {
    if let Some(g) = given {
        if (g - derived).abs() > 1e-9 * derived {
            return Err(CliError::Config(format!(
                "oscillator.Omega0 = {g} conflicts with the model's short-time frequency {derived}"
            )));
        }
    }
    Ok(())
}

/// Load a coupling table `omega,v`.
pub fn load_coupling(cfg: &RunConfig) -> Result<Option<CouplingSpectrum>, CliError> {
    let Some(c) = cfg.model.coupling.as_ref() else { return Ok(None) };
    let file = File::open(&c.path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", c.path.display())))?;
    let (omega, v) = read_two_columns(file, ["omega", "v"]).map_err(|e| CliError::Config(e.to_string()))?;
    let spec = CouplingSpectrum::tabulated(omega, v, c.cutoff).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Some(spec.scaled(c.scale)))
}

/// Build the model. Configuration problems map to exit code 2, physics
/// failures (positivity, validation) to exit code 1.
pub fn build(cfg: &RunConfig) -> Result<Model, CliError> {
    match cfg.model_count() {
        1 => {}
        0 => return Err(CliError::Config("no model given: add one of [model.parametric], [model.coupling], [model.ohmic], [model.table]".into())),
        n => return Err(CliError::Config(format!("exactly one model source is allowed, found {n}"))),
    }
    let m = cfg.oscillator.m;
    if !(m > 0.0) {
        return Err(CliError::Config(format!("oscillator.m = {m} must be positive")));
    }
    let osc = &cfg.oscillator;
    if let Some(p) = &cfg.model.parametric {
        let (gp, gm) = p.rates();
        let sd = SpectralDensity::parametric(p.big_gamma, gp, gm).map_err(|e| CliError::Config(e.to_string()))?;
        let par = sd.as_parametric().expect("parametric");
        let big = par.omega0_sq().sqrt();
        check_omega0_big(osc.omega0_big, big)?;
        let omega0 = osc.omega0.unwrap_or_else(|| par.classical_omega0_sq().sqrt());
        return Ok(Model {
            source: Source::Parametric,
            density: Some(sd),
            coupling: None,
            ohmic: None,
            m,
            omega0_big: big,
            omega0: Some(omega0),
        });
    }
    if let Some(o) = &cfg.model.ohmic {
        let bath = OhmicBath::new(o.gamma, o.omega_c, m).map_err(|e| CliError::Config(e.to_string()))?;
        let big = match (osc.omega0_big, osc.omega0) {
            (Some(b), None) => b,
            (None, Some(w)) => (w * w + bath.kappa0()).sqrt(),
            (Some(b), Some(w)) => {
                let implied = (w * w + bath.kappa0()).sqrt();
                if (b - implied).abs() > 1e-9 * implied {
                    return Err(CliError::Config(format!(
                        "Omega0 = {b} and omega0 = {w} violate Omega0² = omega0² + 2γω_c/π (implied Omega0 = {implied})"
                    )));
                }
                b
            }
            (None, None) => return Err(CliError::Config("ohmic model needs oscillator.Omega0 or oscillator.omega0".into())),
        };
        let long_sq = big * big - bath.kappa0();
        if !(long_sq > 0.0) {
            return Err(CliError::Physics(format!(
                "positivity violated: Omega0² = {:.6} does not exceed 2γω_c/π = {:.6}",
                big * big,
                bath.kappa0()
            )));
        }
        let coupling = bath.coupling(big);
        let sd = fano::density_from_coupling(&coupling, big).map_err(physics)?;
        return Ok(Model {
            source: Source::Ohmic,
            density: Some(sd),
            coupling: Some(coupling),
            ohmic: Some(bath),
            m,
            omega0_big: big,
            omega0: Some(long_sq.sqrt()),
        });
    }
    if cfg.model.coupling.is_some() {
        let coupling = load_coupling(cfg)?.expect("coupling present");
        let big = osc.omega0_big.ok_or_else(|| CliError::Config("coupling model needs oscillator.Omega0".into()))?;
        if !(big > 0.0) {
            return Err(CliError::Config(format!("oscillator.Omega0 = {big} must be positive")));
        }
        let pos = fano::positivity_check(&coupling, big).map_err(physics)?;
        if !pos.ok {
            return Err(CliError::Physics(format!(
                "positivity violated: ∫V²/ω = {:.6e} is not below Omega0 = {big}",
                pos.integral
            )));
        }
        let omega0 = (big * big - big * pos.integral).sqrt();
        let density = if coupling.is_zero() { None } else { Some(fano::density_from_coupling(&coupling, big).map_err(physics)?) };
        return Ok(Model {
            source: Source::Coupling,
            density,
            coupling: Some(coupling),
            ohmic: None,
            m,
            omega0_big: big,
            omega0: Some(omega0),
        });
    }
    let t = cfg.model.table.as_ref().expect("table present");
    let file = File::open(&t.path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", t.path.display())))?;
    let (omega, pi) = read_two_columns(file, ["omega", "pi"]).map_err(|e| CliError::Config(e.to_string()))?;
    let sd = SpectralDensity::tabulated(omega, pi, t.tail_exponent).map_err(|e| CliError::Config(e.to_string()))?;
    let second = sd.weighted_average(|w| w * w).map_err(|e| CliError::Physics(e.to_string()))?;
    let big = second.sqrt();
    check_omega0_big(osc.omega0_big, big)?;
    Ok(Model { source: Source::Table, density: Some(sd), coupling: None, ohmic: None, m, omega0_big: big, omega0: osc.omega0 })
}

fn physics(e: FanoError) -> CliError {
    CliError::Physics(e.to_string())
}
