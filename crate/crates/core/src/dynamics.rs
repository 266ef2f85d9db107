//! Mean-value dynamics of the damped oscillator.
//!
//! The Heisenberg-picture position and momentum evolve through three
//! averages over the spectral weight:
//!
//! * `c(t) = ⟨⟨cos ωt⟩⟩`
//! * `s(t) = ⟨⟨ω⁻¹ sin ωt⟩⟩`
//! * `d(t) = ⟨⟨ω sin ωt⟩⟩`
//!
//! so that `x̄(t) = c·x₀ + s·p₀/m` and `p̄(t) = c·p₀ − m·d·x₀`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{self, FourierOptions, QuadConfig, QuadError, Trig};
use crate::spectral::{ParametricDensity, SpectralDensity, SpectralError};
use crate::states::{self, GaussianState, StateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("kernel quadrature failed at t = {t}: {source}")]
    QuadratureNonConvergence { t: f64, source: QuadError },
    #[error("times must be non-negative and ascending")]
    InvalidTimes,
    #[error("no stationary point of c(t) within the horizon and c has not decayed (|c(t_end)| = {c_end:.3e})")]
    InconclusiveHorizon { c_end: f64 },
    #[error("need at least {needed} samples in the short-time window, found {found}")]
    InsufficientSamples { needed: usize, found: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// The three propagation kernels on a time grid, plus the mean trajectory
/// once [`evolve_means`] has filled it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSeries {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
}

impl EvolutionSeries {
    fn from_kernels(times: &[f64], c: Vec<f64>, s: Vec<f64>, d: Vec<f64>) -> Self {
        Self { times: times.to_vec(), c, s, d, mean_x: Vec::new(), mean_p: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_times(times: &[f64]) -> Result<(), DynamicsError> {
    let ok = times.iter().all(|t| t.is_finite() && *t >= 0.0) && times.windows(2).all(|w| w[1] >= w[0]);
    if ok {
        Ok(())
    } else {
        Err(DynamicsError::InvalidTimes)
    }
}

/// Evaluate `c`, `s`, `d` by oscillatory quadrature over π, in parallel
/// over the time points. Absolute accuracy is about 1e-9.
pub fn kernels(sd: &SpectralDensity, times: &[f64]) -> Result<EvolutionSeries, DynamicsError> {
    kernels_with(sd, times, &QuadConfig::default().with_rel_tol(1e-10).with_abs_tol(1e-11))
}

pub fn kernels_with(sd: &SpectralDensity, times: &[f64], cfg: &QuadConfig) -> Result<EvolutionSeries, DynamicsError> {
    check_times(times)?;
    let opts = FourierOptions {
        smooth_from: sd.smooth_from(),
        support_end: sd.support_end(),
        breakpoints: sd.breakpoints(),
        scale: sd.scale(),
        cfg: cfg.with_max_subdivisions(cfg.max_subdivisions.max(200_000)),
    };
    let rows: Vec<(f64, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok((1.0, 0.0, 0.0));
            }
            let wrap = |source| DynamicsError::QuadratureNonConvergence { t, source };
            let c = quad::fourier_integral(|w| sd.eval(w), t, Trig::Cos, &opts).map_err(wrap)?.value;
            let s = quad::fourier_integral(|w| if w > 0.0 { sd.eval(w) / w } else { 0.0 }, t, Trig::Sin, &opts)
                .map_err(wrap)?
                .value;
            let d = quad::fourier_integral(|w| sd.eval(w) * w, t, Trig::Sin, &opts).map_err(wrap)?.value;
            Ok((c, s, d))
        })
        .collect::<Result<_, DynamicsError>>()?;
    let (mut c, mut s, mut d) = (Vec::with_capacity(rows.len()), Vec::new(), Vec::new());
    for (ci, si, di) in rows {
        c.push(ci);
        s.push(si);
        d.push(di);
    }
    Ok(EvolutionSeries::from_kernels(times, c, s, d))
}

/// Residue amplitudes of `c(t) = Σ_r A_r e^{−rt}` over the rates `[Γ, γ₊, γ₋]`.
fn residues(p: &ParametricDensity) -> [(Complex64, Complex64); 3] {
    let g = Complex64::new(p.big_gamma, 0.0);
    let (gp, gm) = (p.gamma_plus, p.gamma_minus);
    let a_g = g * (gp + gm) / ((g - gp) * (gm - g));
    let a_p = gp * (g + gm) / ((g - gp) * (gp - gm));
    let a_m = gm * (g + gp) / ((gm - g) * (gp - gm));
    [(a_g, g), (a_p, gp), (a_m, gm)]
}

/// Three-exponential closed forms of `c`, `s`, `d` for a parametric density.
pub fn closed_form_kernels(sd: &SpectralDensity, times: &[f64]) -> Result<EvolutionSeries, DynamicsError> {
    let p = sd.as_parametric().ok_or(SpectralError::NotParametric)?;
    p.check_distinct()?;
    check_times(times)?;
    let res = residues(p);
    let (mut c, mut s, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for &t in times {
        let (mut ci, mut si, mut di) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &(a, r) in &res {
            let e = (-r * t).exp();
            ci += a * e;
            di += a * r * e;
            // (1 − e^{−rt})/r without cancellation at small rt.
            si += a * t * phi1(-r * t);
        }
        c.push(ci.re);
        s.push(si.re);
        d.push(di.re);
    }
    Ok(EvolutionSeries::from_kernels(times, c, s, d))
}

/// `(e^z − 1)/z`, accurate near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - 1.0) / z
    }
}

/// Fill `mean_x`, `mean_p` from initial means.
pub fn evolve_means(x0: f64, p0: f64, m: f64, mut series: EvolutionSeries) -> EvolutionSeries {
    series.mean_x = series.c.iter().zip(&series.s).map(|(c, s)| c * x0 + s * p0 / m).collect();
    series.mean_p = series.c.iter().zip(&series.d).map(|(c, d)| c * p0 - m * d * x0).collect();
    series
}

/// Damping label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DampingClass {
    Underdamped,
    OverOrCritical,
}

impl std::fmt::Display for DampingClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DampingClass::Underdamped => "underdamped",
            DampingClass::OverOrCritical => "over-or-critical",
        })
    }
}

/// Strict classification: the motion is oscillatory iff `c(t)` has a
/// stationary point at some `t > 0`, i.e. `d(t)` changes sign within the
/// sampled horizon. Without a sign change the answer is only conclusive once
/// `|c|` has decayed below 1e-3.
pub fn classify_damping(series: &EvolutionSeries) -> Result<DampingClass, DynamicsError> {
    let mut last_sign = 0.0;
    for (&t, &d) in series.times.iter().zip(&series.d) {
        if t <= 0.0 || d == 0.0 {
            continue;
        }
        let sign = d.signum();
        if last_sign != 0.0 && sign != last_sign {
            return Ok(DampingClass::Underdamped);
        }
        last_sign = sign;
    }
    let c_end = series.c.last().copied().unwrap_or(1.0).abs();
    if c_end < 1e-3 {
        Ok(DampingClass::OverOrCritical)
    } else {
        Err(DynamicsError::InconclusiveHorizon { c_end })
    }
}

/// Label of the classical oscillator with the same pair of rates:
/// complex `γ±` oscillate, real ones do not.
pub fn classical_label(p: &ParametricDensity) -> DampingClass {
    if p.gamma_plus.im != 0.0 {
        DampingClass::Underdamped
    } else {
        DampingClass::OverOrCritical
    }
}

/// Default horizon for classification: ten times the slowest decay time.
pub fn default_horizon(p: &ParametricDensity) -> f64 {
    let slowest = p.rates().iter().map(|r| r.re).fold(f64::INFINITY, f64::min);
    10.0 / slowest
}

/// Estimate the short-time frequency squared `⟨⟨ω²⟩⟩` from the curvature of
/// `c` at the origin: fit `−2(c−1)/t² = Ω² + b·t + c·t²` over the samples with
/// `0 < t ≤ 0.01/Ω`, where Ω is first estimated from the earliest sample.
pub fn short_time_frequency(series: &EvolutionSeries) -> Result<f64, DynamicsError> {
    let samples: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.c)
        .filter(|(t, _)| **t > 0.0)
        .map(|(&t, &c)| (t, -2.0 * (c - 1.0) / (t * t)))
        .collect();
    let first = samples.first().ok_or(DynamicsError::InsufficientSamples { needed: 5, found: 0 })?;
    let omega = first.1.abs().sqrt().max(f64::MIN_POSITIVE);
    let window: Vec<(f64, f64)> = samples.iter().copied().filter(|(t, _)| *t <= 0.01 / omega * (1.0 + 1e-12)).collect();
    if window.len() < 5 {
        return Err(DynamicsError::InsufficientSamples { needed: 5, found: window.len() });
    }
    // Least squares for y = a + b·t + c·t². The linear term is needed because
    // densities with an ω⁻⁴ tail have no fourth moment, so c(t) carries a |t|³
    // term.
    let scale = window.last().unwrap().0;
    let design = DMatrix::from_fn(window.len(), 3, |i, j| (window[i].0 / scale).powi(j as i32));
    let rhs = DVector::from_iterator(window.len(), window.iter().map(|w| w.1));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|_| DynamicsError::InsufficientSamples { needed: 5, found: window.len() })?;
    Ok(coef[0])
}

/// Classical comparison curve `x(t)/x₀` for `ẍ + (γ₊+γ₋)ẋ + γ₊γ₋x = 0` with
/// `ẋ(0) = 0`: `(γ₊e^{−γ₋t} − γ₋e^{−γ₊t})/(γ₊−γ₋)`.
pub fn classical_comparison(p: &ParametricDensity, times: &[f64]) -> Vec<f64> {
    let (gp, gm) = (p.gamma_plus, p.gamma_minus);
    times
        .iter()
        .map(|&t| {
            if (gp - gm).norm() < 1e-12 * gp.norm() {
                let g = gp.re;
                (1.0 + g * t) * (-g * t).exp()
            } else {
                ((gp * (-gm * t).exp() - gm * (-gp * t).exp()) / (gp - gm)).re
            }
        })
        .collect()
}

/// The state the oscillator relaxes to: the reduced global thermal state.
pub fn steady_state(sd: &SpectralDensity, m: f64, beta: f64) -> Result<GaussianState, DynamicsError> {
    Ok(states::thermal_state(sd, m, beta)?)
}

/// Maximum deviations `max|d + ċ|` and `max|s − ∫c|` on the sampled grid,
/// using centred differences and the trapezoid rule.
pub fn kernel_identity_residuals(series: &EvolutionSeries) -> (f64, f64) {
    let t = &series.times;
    let n = t.len();
    let mut deriv = 0.0_f64;
    for i in 1..n.saturating_sub(1) {
        let dc = (series.c[i + 1] - series.c[i - 1]) / (t[i + 1] - t[i - 1]);
        deriv = deriv.max((series.d[i] + dc).abs());
    }
    let mut integ = 0.0_f64;
    let mut acc = series.s.first().copied().unwrap_or(0.0);
    for i in 1..n {
        acc += 0.5 * (t[i] - t[i - 1]) * (series.c[i] + series.c[i - 1]);
        integ = integ.max((series.s[i] - acc).abs());
    }
    (deriv, integ)
}
