//! Exact diagonalisation of the oscillator–bath Hamiltonian into a continuum
//! of dressed modes.
//!
//! Given the coupling amplitude `V(ω)` and the bare frequency `Ω₀`, the
//! central object is the real function
//!
//! `D(ω) = 2(ω²−Ω₀²)/Ω₀ − H(ω)`,  `H(ω) = PV∫ V²(ω′)/(ω−ω′) dω′ − ∫ V²(ω′)/(ω+ω′) dω′`,
//!
//! so that `Y(ω) = D(ω)/V²(ω)` and the spectral weight becomes
//! `π(ω) = 4ωV²/(Ω₀(D² + π²V⁴))`. `H` is smooth even where π is sharply
//! peaked, so it is tabulated and splined, and π is then evaluated from the
//! closed expression instead of being interpolated itself.

use std::f64::consts::PI;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bath::OhmicBath;
use crate::interp::{CubicSpline, MonotoneCubic};
use crate::quad::{self, QuadConfig, QuadError};
use crate::spectral::{SpectralDensity, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FanoError {
    #[error("invalid coupling spectrum: {0}")]
    InvalidCoupling(String),
    #[error("coupling-weighted integral of V²/ω diverges at zero frequency (V(0) = {v0})")]
    DivergentIntegral { v0: f64 },
    #[error("positivity violated: ∫V²/ω = {integral:.6e} is not below Ω₀ = {omega0:.6e}")]
    PositivityViolation { integral: f64, omega0: f64 },
    #[error("V vanishes at ω = {0}; Y(ω) is undefined there")]
    ZeroCoupling(f64),
    #[error("frequency must be positive, got {0}")]
    InvalidFrequency(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("coupling-derived density failed validation")]
    ValidationFailure(Box<ValidationReport>),
}

/// Functional form of the coupling amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CouplingShape {
    /// No coupling at all.
    Zero,
    /// Monotone-cubic interpolation of tabulated `V`; below the first node
    /// (when it is positive) `V ∝ √ω`, so `V²` is linear like an Ohmic bath.
    Tabulated(MonotoneCubic),
    /// The coupling equivalent of an Ohmic bath:
    /// `V²(ω) = 2J(ω)/(π m Ω₀) = 2γω e^{−ω/ω_c}/(π Ω₀)`.
    Ohmic { gamma: f64, omega_c: f64, omega0: f64 },
}

/// The coupling amplitude `V(ω)` (units of frequency^½), identically zero
/// beyond `cutoff`, optionally multiplied by a global scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpectrum {
    shape: CouplingShape,
    cutoff: f64,
    scale: f64,
}

/// Exponential cutoffs are truncated at this many multiples of `ω_c`.
const OHMIC_TRUNCATION: f64 = 40.0;

impl CouplingSpectrum {
    pub fn zero(cutoff: f64) -> Self {
        Self { shape: CouplingShape::Zero, cutoff, scale: 1.0 }
    }

    /// Tabulated `V` on an ascending grid; `V ≡ 0` beyond `cutoff` (which
    /// defaults to the last grid node when `None`).
    pub fn tabulated(omega: Vec<f64>, v: Vec<f64>, cutoff: Option<f64>) -> Result<Self, FanoError> {
        if omega.len() < 2 || omega.len() != v.len() {
            return Err(FanoError::InvalidCoupling("need at least two (omega, v) rows of equal length".into()));
        }
        if omega.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(FanoError::InvalidCoupling("non-finite entry".into()));
        }
        if omega[0] < 0.0 || !omega.windows(2).all(|w| w[1] > w[0]) {
            return Err(FanoError::InvalidCoupling("frequencies must be non-negative and strictly ascending".into()));
        }
        let last = *omega.last().unwrap();
        let cutoff = cutoff.unwrap_or(last).min(last);
        if !(cutoff > omega[0]) {
            return Err(FanoError::InvalidCoupling(format!("cutoff {cutoff} must exceed the first grid node")));
        }
        Ok(Self { shape: CouplingShape::Tabulated(MonotoneCubic::new(omega, v)), cutoff, scale: 1.0 })
    }

    /// Coupling describing the same bath as an Ohmic spectral function, for
    /// bare frequency `omega0` (Ω₀). The exponential tail is truncated at
    /// 40 ω_c, where it is below machine precision.
    pub fn from_ohmic(bath: &OhmicBath, omega0: f64) -> Self {
        Self {
            shape: CouplingShape::Ohmic { gamma: bath.gamma, omega_c: bath.omega_c, omega0 },
            cutoff: OHMIC_TRUNCATION * bath.omega_c,
            scale: 1.0,
        }
    }

    /// The same spectrum with `V` multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { scale: self.scale * s, ..self.clone() }
    }

    pub fn shape(&self) -> &CouplingShape {
        &self.shape
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_zero(&self) -> bool {
        match &self.shape {
            CouplingShape::Zero => true,
            CouplingShape::Tabulated(t) => self.scale == 0.0 || t.ys().iter().all(|&v| v == 0.0),
            CouplingShape::Ohmic { .. } => self.scale == 0.0,
        }
    }

    /// `V(ω)`, zero outside `(0, cutoff]`.
    pub fn v(&self, omega: f64) -> f64 {
        if !(omega > 0.0) || omega > self.cutoff {
            return match (&self.shape, omega) {
                (CouplingShape::Tabulated(t), w) if w == 0.0 && t.xs()[0] == 0.0 => self.scale * t.ys()[0],
                _ => 0.0,
            };
        }
        let raw = match &self.shape {
            CouplingShape::Zero => 0.0,
            CouplingShape::Tabulated(t) => {
                let first = t.xs()[0];
                if omega < first {
                    t.ys()[0] * (omega / first).sqrt()
                } else {
                    t.eval(omega)
                }
            }
            CouplingShape::Ohmic { gamma, omega_c, omega0 } => {
                (2.0 * gamma * omega * (-omega / omega_c).exp() / (PI * omega0)).sqrt()
            }
        };
        self.scale * raw
    }

    pub fn v_sq(&self, omega: f64) -> f64 {
        let v = self.v(omega);
        v * v
    }

    /// Characteristic frequencies for adaptive integration.
    fn features(&self) -> Vec<f64> {
        match &self.shape {
            CouplingShape::Zero => vec![],
            CouplingShape::Tabulated(t) => {
                let xs = t.xs();
                let step = (xs.len() / 64).max(1);
                xs.iter().step_by(step).copied().filter(|&x| x > 0.0 && x < self.cutoff).collect()
            }
            CouplingShape::Ohmic { omega_c, .. } => {
                [0.1, 1.0, 3.0, 10.0].iter().map(|k| k * omega_c).collect()
            }
        }
    }

    /// Low-frequency behaviour check: `V²/ω` must stay integrable at 0.
    fn check_low_frequency(&self) -> Result<(), FanoError> {
        if let CouplingShape::Tabulated(t) = &self.shape {
            if t.xs()[0] == 0.0 && t.ys()[0] != 0.0 && self.scale != 0.0 {
                return Err(FanoError::DivergentIntegral { v0: self.scale * t.ys()[0] });
            }
        }
        Ok(())
    }
}

/// Outcome of the Hamiltonian positivity test `∫V²/ω dω < Ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub integral: f64,
    pub ok: bool,
}

/// Evaluate `∫₀^∞ V²(ω)/ω dω` and compare with Ω₀.
pub fn positivity_check(v: &CouplingSpectrum, omega0: f64) -> Result<PositivityReport, FanoError> {
    v.check_low_frequency()?;
    if v.is_zero() {
        return Ok(PositivityReport { integral: 0.0, ok: omega0 > 0.0 });
    }
    let cfg = QuadConfig::default().with_rel_tol(1e-11);
    let pts = quad::breakpoints_in(0.0, v.cutoff, &v.features());
    let est = quad::integrate_points(|w| v.v_sq(w) / w, &pts, &cfg)?;
    Ok(PositivityReport { integral: est.value, ok: est.value < omega0 })
}

/// `H(ω) = PV∫ V²(ω′)/(ω−ω′) dω′ − ∫ V²(ω′)/(ω+ω′) dω′`, four times the
/// weak-coupling level shift.
pub fn shift_integral(v: &CouplingSpectrum, omega: f64, cfg: &QuadConfig) -> Result<f64, FanoError> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let (a, b) = (0.0, v.cutoff);
    let features = v.features();
    if omega <= a || omega >= b {
        let pts = quad::breakpoints_in(a, b, &features);
        let est = quad::integrate_points(|y| v.v_sq(y) * (1.0 / (omega - y) - 1.0 / (omega + y)), &pts, cfg)?;
        return Ok(est.value);
    }
    let f0 = v.v_sq(omega);
    let mut interior = features;
    interior.push(omega);
    let pts = quad::breakpoints_in(a, b, &interior);
    let g = |y: f64| {
        let vy = v.v_sq(y);
        let dy = omega - y;
        let pv = if dy == 0.0 { 0.0 } else { (vy - f0) / dy };
        pv - vy / (omega + y)
    };
    let est = quad::integrate_points(g, &pts, cfg)?;
    Ok(est.value + f0 * ((omega - a) / (b - omega)).ln())
}

/// `Y(ω)` evaluated directly (no tabulation), relative accuracy ~1e-10.
pub fn y_function(v: &CouplingSpectrum, omega0: f64, omega: f64) -> Result<f64, FanoError> {
    if !(omega > 0.0) {
        return Err(FanoError::InvalidFrequency(omega));
    }
    let v2 = v.v_sq(omega);
    if v2 == 0.0 {
        return Err(FanoError::ZeroCoupling(omega));
    }
    let h = shift_integral(v, omega, &QuadConfig::default().with_rel_tol(1e-11).with_abs_tol(1e-14))?;
    Ok((2.0 * (omega * omega - omega0 * omega0) / omega0 - h) / v2)
}

/// Grid and accuracy settings for building a coupling-derived density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoOptions {
    /// Points in the geometric base grid up to the cutoff.
    pub base_points: usize,
    /// Density multiplier near the resonance root.
    pub refine_factor: usize,
    /// Half-width of the refined window in units of the resonance half-width.
    pub refine_widths: f64,
    /// Lowest grid frequency relative to the cutoff.
    pub min_ratio: f64,
    pub quad: QuadConfig,
}

impl Default for FanoOptions {
    fn default() -> Self {
        Self {
            base_points: 2048,
            refine_factor: 16,
            refine_widths: 5.0,
            min_ratio: 1e-6,
            quad: QuadConfig::default().with_rel_tol(1e-11).with_abs_tol(1e-14),
        }
    }
}

/// Spectral weight induced by a coupling spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoDensity {
    coupling: CouplingSpectrum,
    omega0: f64,
    shift: CubicSpline,
    root: Option<f64>,
    half_width: Option<f64>,
}

impl FanoDensity {
    /// Tabulate the shift integral and locate the resonance. No validation.
    pub fn build(v: &CouplingSpectrum, omega0: f64, opts: &FanoOptions) -> Result<Self, FanoError> {
        if !(omega0 > 0.0) {
            return Err(FanoError::InvalidFrequency(omega0));
        }
        let report = positivity_check(v, omega0)?;
        if !report.ok {
            return Err(FanoError::PositivityViolation { integral: report.integral, omega0 });
        }
        let cutoff = v.cutoff;
        let lo = cutoff * opts.min_ratio;
        let n = opts.base_points.max(16);
        let ratio = (cutoff / lo).powf(1.0 / (n - 1) as f64);
        let mut grid: Vec<f64> = (0..n).map(|i| lo * ratio.powi(i as i32)).collect();
        // Keep the last node strictly inside the support so the logarithm in
        // the principal value stays finite.
        *grid.last_mut().unwrap() = cutoff * (1.0 - 1e-9);
        // The shift integral is of the order of ∫V²/ω; an absolute tolerance
        // far below that scale cannot be met where H(ω) crosses zero.
        let quad = opts.quad.with_abs_tol(opts.quad.abs_tol.max(1e-13 * report.integral));
        let shifts = tabulate_shift(v, &grid, &quad)?;
        let spline = CubicSpline::new(grid.clone(), shifts);
        let d_of = |w: f64| 2.0 * (w * w - omega0 * omega0) / omega0 - spline.eval(w);

        let root = find_root_near(&grid, &d_of, omega0);
        let mut half_width = None;
        let mut shift = spline.clone();
        if let Some(r) = root {
            let slope = (4.0 * r / omega0 - spline.derivative(r)).abs().max(1e-300);
            let hw = PI * v.v_sq(r) / slope;
            half_width = Some(hw);
            if (r - omega0).abs() > 0.25 * omega0 {
                warn!(
                    "resonance at ω = {r:.6} is more than 25% away from Ω₀ = {omega0:.6}: \
                     large level shift (renormalised regime)"
                );
            }
            let window = opts.refine_widths * hw;
            let (w_lo, w_hi) = (r - window, r + window);
            let mut extra = Vec::new();
            for pair in grid.windows(2) {
                if pair[1] >= w_lo && pair[0] <= w_hi {
                    for k in 1..opts.refine_factor {
                        extra.push(pair[0] + (pair[1] - pair[0]) * k as f64 / opts.refine_factor as f64);
                    }
                }
            }
            if !extra.is_empty() {
                let extra_shift = tabulate_shift(v, &extra, &quad)?;
                let mut merged: Vec<(f64, f64)> =
                    grid.iter().copied().zip(spline.ys().iter().copied()).chain(extra.into_iter().zip(extra_shift)).collect();
                merged.sort_by(|a, b| a.0.total_cmp(&b.0));
                merged.dedup_by(|a, b| a.0 == b.0);
                let (xs, ys): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
                shift = CubicSpline::new(xs, ys);
            }
        }
        Ok(Self { coupling: v.clone(), omega0, shift, root, half_width })
    }

    pub fn coupling(&self) -> &CouplingSpectrum {
        &self.coupling
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Frequency grid on which the shift integral was tabulated.
    pub fn grid(&self) -> &[f64] {
        self.shift.xs()
    }

    /// Zero of `Y` nearest Ω₀, if any.
    pub fn resonance(&self) -> Option<f64> {
        self.root
    }

    /// Estimated half-width at half-maximum of the resonance.
    pub fn resonance_half_width(&self) -> Option<f64> {
        self.half_width
    }

    pub(crate) fn peak_estimate(&self) -> f64 {
        self.root.unwrap_or(self.omega0)
    }

    pub(crate) fn support_end(&self) -> f64 {
        self.coupling.cutoff
    }

    pub(crate) fn smooth_from(&self) -> f64 {
        let peak = self.peak_estimate();
        let hw = self.half_width.unwrap_or(0.0);
        (peak + 50.0 * hw).max(3.0 * peak).max(3.0 * self.omega0).min(self.support_end())
    }

    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        let mut pts = self.coupling.features();
        pts.push(self.omega0);
        let xs = self.shift.xs();
        pts.extend(xs.iter().step_by(32).copied());
        if let (Some(r), Some(hw)) = (self.root, self.half_width) {
            pts.push(r);
            for k in [0.3, 1.0, 3.0, 10.0, 30.0, 100.0] {
                pts.push(r - k * hw);
                pts.push(r + k * hw);
            }
        }
        pts.retain(|&x| x > 0.0 && x < self.support_end());
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `H(ω)` from the tabulation.
    pub fn shift_value(&self, omega: f64) -> f64 {
        let lo = self.shift.xs()[0];
        self.shift.eval(omega.max(lo))
    }

    /// `D(ω) = V²(ω)·Y(ω)`.
    pub fn d_value(&self, omega: f64) -> f64 {
        2.0 * (omega * omega - self.omega0 * self.omega0) / self.omega0 - self.shift_value(omega)
    }

    /// Weak-coupling level shift `F(ω) = H(ω)/4`.
    pub fn level_shift(&self, omega: f64) -> f64 {
        0.25 * self.shift_value(omega)
    }

    /// `Y(ω)`; `None` where the coupling vanishes.
    pub fn y(&self, omega: f64) -> Option<f64> {
        let v2 = self.coupling.v_sq(omega);
        (v2 > 0.0).then(|| self.d_value(omega) / v2)
    }

    /// `α(ω) = (ω+Ω₀)/(Ω₀ V (Y − iπ))`, written as `(ω+Ω₀)V/(Ω₀(D − iπV²))`.
    pub fn alpha(&self, omega: f64) -> Complex64 {
        let v = self.coupling.v(omega);
        if v == 0.0 || omega < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let denom = Complex64::new(self.d_value(omega), -PI * v * v) * self.omega0;
        Complex64::new((omega + self.omega0) * v, 0.0) / denom
    }

    /// `β(ω) = (ω−Ω₀)/(ω+Ω₀)·α(ω)`.
    pub fn beta(&self, omega: f64) -> Complex64 {
        self.alpha(omega) * ((omega - self.omega0) / (omega + self.omega0))
    }

    pub fn alpha_sq(&self, omega: f64) -> f64 {
        let v2 = self.coupling.v_sq(omega);
        if v2 == 0.0 || omega < 0.0 {
            return 0.0;
        }
        let d = self.d_value(omega);
        let s = omega + self.omega0;
        s * s * v2 / (self.omega0 * self.omega0 * (d * d + PI * PI * v2 * v2))
    }

    /// `π(ω) = |α|²·4Ω₀ω/(Ω₀+ω)² = 4ωV²/(Ω₀(D² + π²V⁴))`.
    pub fn eval(&self, omega: f64) -> f64 {
        if !(omega > 0.0) || omega >= self.support_end() {
            return 0.0;
        }
        let v2 = self.coupling.v_sq(omega);
        if v2 == 0.0 {
            return 0.0;
        }
        let d = self.d_value(omega);
        4.0 * omega * v2 / (self.omega0 * (d * d + PI * PI * v2 * v2))
    }
}

fn tabulate_shift(v: &CouplingSpectrum, grid: &[f64], cfg: &QuadConfig) -> Result<Vec<f64>, FanoError> {
    grid.par_iter().map(|&w| shift_integral(v, w, cfg)).collect()
}

fn find_root_near<F: Fn(f64) -> f64>(grid: &[f64], d: &F, target: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    let mut prev = d(grid[0]);
    for pair in grid.windows(2) {
        let next = d(pair[1]);
        if prev == 0.0 || prev.signum() != next.signum() {
            let (mut a, mut b, mut fa) = (pair[0], pair[1], prev);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let fm = d(m);
                if fm == 0.0 || (b - a) < 1e-15 * m {
                    a = m;
                    b = m;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let r = 0.5 * (a + b);
            if best.map_or(true, |x| (r - target).abs() < (x - target).abs()) {
                best = Some(r);
            }
        }
        prev = next;
    }
    best
}

/// Diagonalisation coefficients sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanoCoefficients {
    pub omega_grid: Vec<f64>,
    /// `Y(ω)`; NaN where the coupling vanishes.
    pub y: Vec<f64>,
    pub alpha_sq: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    /// Weak-coupling level shift `F(ω)`.
    pub level_shift: Vec<f64>,
    pub omega0: f64,
}

impl FanoCoefficients {
    pub fn from_density(fd: &FanoDensity, grid: &[f64]) -> Self {
        Self {
            omega_grid: grid.to_vec(),
            y: grid.iter().map(|&w| fd.y(w).unwrap_or(f64::NAN)).collect(),
            alpha_sq: grid.iter().map(|&w| fd.alpha_sq(w)).collect(),
            alpha: grid.iter().map(|&w| fd.alpha(w)).collect(),
            beta: grid.iter().map(|&w| fd.beta(w)).collect(),
            level_shift: grid.iter().map(|&w| fd.level_shift(w)).collect(),
            omega0: fd.omega0(),
        }
    }

    /// `π` on the grid recomputed from `|α|²`.
    pub fn spectral_weight(&self) -> Vec<f64> {
        self.omega_grid
            .iter()
            .zip(&self.alpha)
            .map(|(&w, a)| a.norm_sqr() * 4.0 * self.omega0 * w / (self.omega0 + w).powi(2))
            .collect()
    }

    /// Multiply every `α` and `β` by the same phase `e^{iθ}`.
    pub fn rephased(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self {
            alpha: self.alpha.iter().map(|a| a * phase).collect(),
            beta: self.beta.iter().map(|b| b * phase).collect(),
            ..self.clone()
        }
    }
}

/// Coefficients on the density's own adaptive grid.
pub fn alpha_beta(v: &CouplingSpectrum, omega0: f64) -> Result<FanoCoefficients, FanoError> {
    let fd = FanoDensity::build(v, omega0, &FanoOptions::default())?;
    Ok(FanoCoefficients::from_density(&fd, fd.grid()))
}

/// Build and validate the spectral weight induced by `V`.
pub fn density_from_coupling(v: &CouplingSpectrum, omega0: f64) -> Result<SpectralDensity, FanoError> {
    density_from_coupling_with(v, omega0, &FanoOptions::default())
}

pub fn density_from_coupling_with(
    v: &CouplingSpectrum,
    omega0: f64,
    opts: &FanoOptions,
) -> Result<SpectralDensity, FanoError> {
    let fd = FanoDensity::build(v, omega0, opts)?;
    let sd = SpectralDensity::FanoDerived(fd);
    let report = sd.validate();
    if !report.passed {
        return Err(FanoError::ValidationFailure(Box::new(report)));
    }
    Ok(sd)
}

/// Bath-operator coefficients of the dressed modes, kept in split form:
/// `δ(ω,ω′) = w(ω,ω′)/(ω+ω′)` and
/// `γ(ω,ω′) = [P/(ω−ω′) + Y(ω)δ_D(ω−ω′)]·w(ω,ω′)` with
/// `w(ω,ω′) = V(ω′)Ω₀α(ω)/(ω+Ω₀)`. The principal part is never sampled
/// across its singularity.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedModeKernels {
    pub omega_grid: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub omega0: f64,
}

impl DressedModeKernels {
    /// Common numerator `w(ω_i, ω_j)`.
    pub fn weight(&self, i: usize, j: usize) -> Complex64 {
        self.alpha[i] * (self.v[j] * self.omega0 / (self.omega_grid[i] + self.omega0))
    }

    pub fn delta(&self, i: usize, j: usize) -> Complex64 {
        self.weight(i, j) / (self.omega_grid[i] + self.omega_grid[j])
    }

    /// Principal-part weight: multiply by `P/(ω−ω′)` under an integral.
    pub fn gamma_principal_weight(&self, i: usize, j: usize) -> Complex64 {
        self.weight(i, j)
    }

    /// Coefficient of `δ_D(ω−ω′)` in `γ`: `Y(ω)·w(ω,ω)`.
    pub fn gamma_diagonal_weight(&self, i: usize) -> Complex64 {
        self.weight(i, i) * self.y[i]
    }

    /// Off-diagonal value `w/(ω−ω′)`; `None` on the diagonal.
    pub fn gamma_offdiagonal(&self, i: usize, j: usize) -> Option<Complex64> {
        let dw = self.omega_grid[i] - self.omega_grid[j];
        (dw != 0.0).then(|| self.weight(i, j) / dw)
    }

    /// Dense `δ` table.
    pub fn delta_table(&self) -> DMatrix<Complex64> {
        let n = self.omega_grid.len();
        DMatrix::from_fn(n, n, |i, j| self.delta(i, j))
    }
}

pub fn gamma_delta_kernels(coeffs: &FanoCoefficients, v: &CouplingSpectrum) -> DressedModeKernels {
    DressedModeKernels {
        omega_grid: coeffs.omega_grid.clone(),
        alpha: coeffs.alpha.clone(),
        y: coeffs.y.clone(),
        v: coeffs.omega_grid.iter().map(|&w| v.v(w)).collect(),
        omega0: coeffs.omega0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(omega_end: f64, amp: f64) -> CouplingSpectrum {
        // V² = amp·ω(1−ω/ω_e)², smooth at both ends.
        let grid: Vec<f64> = (0..=800).map(|i| omega_end * i as f64 / 800.0).collect();
        let v: Vec<f64> = grid.iter().map(|&w| (amp * w * (1.0 - w / omega_end).powi(2)).sqrt()).collect();
        CouplingSpectrum::tabulated(grid, v, None).unwrap()
    }

    #[test]
    fn zero_coupling_is_positive() {
        let r = positivity_check(&CouplingSpectrum::zero(10.0), 1.0).unwrap();
        assert_eq!(r.integral, 0.0);
        assert!(r.ok);
    }

    #[test]
    fn ohmic_positivity_matches_bound() {
        let bath = OhmicBath::new(1.0, 100.0, 1.0).unwrap();
        let bound = 2.0 * 100.0 / PI;
        let ok = positivity_check(&CouplingSpectrum::from_ohmic(&bath, 70f64.sqrt()), 70f64.sqrt()).unwrap();
        assert!(ok.ok);
        assert!((ok.integral - bound / 70f64.sqrt()).abs() < 1e-9 * ok.integral);
        let bad = positivity_check(&CouplingSpectrum::from_ohmic(&bath, 60f64.sqrt()), 60f64.sqrt()).unwrap();
        assert!(!bad.ok);
    }

    #[test]
    fn constant_v_at_zero_diverges() {
        let v = CouplingSpectrum::tabulated(vec![0.0, 1.0, 2.0], vec![0.3, 0.3, 0.0], None).unwrap();
        assert!(matches!(positivity_check(&v, 1.0), Err(FanoError::DivergentIntegral { .. })));
    }

    #[test]
    fn y_needs_nonzero_coupling() {
        let v = bump(3.0, 0.01);
        assert!(matches!(y_function(&v, 1.0, 3.5), Err(FanoError::ZeroCoupling(_))));
        assert!(y_function(&v, 1.0, 1.2).is_ok());
    }

    #[test]
    fn normalisation_and_second_moment() {
        let v = bump(3.0, 0.05);
        let sd = density_from_coupling(&v, 1.0).unwrap();
        let norm = sd.weighted_average(|_| 1.0).unwrap();
        assert!((norm - 1.0).abs() < 1e-6, "{norm}");
        let m2 = sd.weighted_average(|w| w * w).unwrap();
        assert!((m2 - 1.0).abs() < 1e-4, "{m2}");
        assert_eq!(sd.eval(0.0), 0.0);
    }

    #[test]
    fn beta_vanishes_at_bare_frequency() {
        let v = bump(3.0, 0.05);
        let fd = FanoDensity::build(&v, 1.0, &FanoOptions::default()).unwrap();
        assert_eq!(fd.beta(1.0), Complex64::new(0.0, 0.0));
        let w = 1.7;
        let ratio = fd.beta(w).norm_sqr() / fd.alpha_sq(w);
        assert!((ratio - ((w - 1.0) / (w + 1.0)).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn tabulated_shift_matches_direct_evaluation() {
        let v = bump(3.0, 0.05);
        let fd = FanoDensity::build(&v, 1.0, &FanoOptions::default()).unwrap();
        for &w in &[0.2, 0.97, 1.0, 1.4, 2.5] {
            let direct = y_function(&v, 1.0, w).unwrap();
            let tab = fd.y(w).unwrap();
            assert!((direct - tab).abs() < 1e-6 * direct.abs().max(1.0), "w={w} {direct} {tab}");
        }
    }

    #[test]
    fn phase_choice_does_not_change_weight() {
        let v = bump(3.0, 0.05);
        let coeffs = alpha_beta(&v, 1.0).unwrap();
        let base = coeffs.spectral_weight();
        for theta in [0.3, 1.9, -2.7] {
            let rot = coeffs.rephased(theta).spectral_weight();
            for (a, b) in base.iter().zip(&rot) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn delta_kernel_identity() {
        let v = bump(3.0, 0.05);
        let coeffs = alpha_beta(&v, 1.0).unwrap();
        let k = gamma_delta_kernels(&coeffs, &v);
        let (i, j) = (100, 900);
        let lhs = k.delta(i, j) * (k.omega_grid[i] + k.omega_grid[j]);
        let rhs = coeffs.alpha[i] * (v.v(k.omega_grid[j]) * 1.0 / (k.omega_grid[i] + 1.0));
        assert!((lhs - rhs).norm() < 1e-14 * rhs.norm().max(1e-300));
        assert!(k.gamma_offdiagonal(i, i).is_none());
        assert!(k.gamma_offdiagonal(i, j).unwrap().norm().is_finite());
    }
}
