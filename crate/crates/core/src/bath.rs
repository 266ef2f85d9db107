//! Bath spectral functions, friction memory kernels and the Markov limit.
//!
//! The memory kernel of the Heisenberg–Langevin equation is the cosine
//! transform `κ(t) = (2/πm) ∫₀^∞ J(ω)/ω · cos ωt dω` of the bath spectral
//! function `J`. The same bath is described by a coupling amplitude `V` with
//! `V²(ω) = 2J(ω)/(π m Ω₀)`, which makes `Ω₀ ∫V²/ω dω` equal to `κ(0)` and
//! so ties the two bare frequencies together: `Ω₀² = ω₀² + κ(0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fano::{CouplingSpectrum, FanoError};
use crate::interp::{CubicSpline, MonotoneCubic};
use crate::quad::{self, FourierOptions, QuadConfig, QuadError, Trig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BathError {
    #[error("invalid bath parameters: {0}")]
    InvalidParameters(String),
    #[error("J(ω)/ω is not integrable at zero frequency (J(0) = {0})")]
    DivergentKernel(f64),
    #[error("kernel has not decayed within the stored window: κ(t_end)/κ(0) = {ratio:.3e}")]
    NonDecayedKernel { ratio: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Coupling(#[from] FanoError),
}

/// `J(ω) = mγω e^{−ω/ω_c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhmicBath {
    pub gamma: f64,
    pub omega_c: f64,
    pub m: f64,
}

impl OhmicBath {
    pub fn new(gamma: f64, omega_c: f64, m: f64) -> Result<Self, BathError> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(BathError::InvalidParameters(format!("gamma = {gamma} must be positive")));
        }
        if !(omega_c > 0.0 && omega_c.is_finite()) {
            return Err(BathError::InvalidParameters(format!("omega_c = {omega_c} must be positive")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(BathError::InvalidParameters(format!("m = {m} must be positive")));
        }
        Ok(Self { gamma, omega_c, m })
    }

    pub fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            0.0
        } else {
            self.m * self.gamma * omega * (-omega / self.omega_c).exp()
        }
    }

    /// `κ(0) = 2γω_c/π`.
    pub fn kappa0(&self) -> f64 {
        2.0 * self.gamma * self.omega_c / PI
    }

    pub fn kappa(&self, t: f64) -> f64 {
        let x = self.omega_c * t;
        self.kappa0() / (1.0 + x * x)
    }

    /// Equivalent coupling amplitude for a given bare frequency Ω₀.
    pub fn coupling(&self, omega0_big: f64) -> CouplingSpectrum {
        CouplingSpectrum::from_ohmic(self, omega0_big)
    }
}

/// A bath spectral function `J(ω)`, either Ohmic or tabulated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectralFunction {
    Ohmic(OhmicBath),
    /// Monotone cubic through `(ω, J)` rows; `J ∝ ω` below the first node and
    /// zero beyond the last.
    Tabulated { table: MonotoneCubic, m: f64 },
}

impl SpectralFunction {
    pub fn tabulated(omega: Vec<f64>, j: Vec<f64>, m: f64) -> Result<Self, BathError> {
        if omega.len() < 2 || omega.len() != j.len() {
            return Err(BathError::InvalidParameters("need at least two (omega, J) rows".into()));
        }
        if omega.iter().chain(&j).any(|x| !x.is_finite()) || omega[0] < 0.0 {
            return Err(BathError::InvalidParameters("non-finite entry or negative frequency".into()));
        }
        if !omega.windows(2).all(|w| w[1] > w[0]) {
            return Err(BathError::InvalidParameters("frequencies must be strictly ascending".into()));
        }
        if !(m > 0.0) {
            return Err(BathError::InvalidParameters(format!("m = {m} must be positive")));
        }
        Ok(SpectralFunction::Tabulated { table: MonotoneCubic::new(omega, j), m })
    }

    pub fn mass(&self) -> f64 {
        match self {
            SpectralFunction::Ohmic(b) => b.m,
            SpectralFunction::Tabulated { m, .. } => *m,
        }
    }

    pub fn j(&self, omega: f64) -> f64 {
        match self {
            SpectralFunction::Ohmic(b) => b.j(omega),
            SpectralFunction::Tabulated { table, .. } => {
                let xs = table.xs();
                let (first, last) = (xs[0], xs[xs.len() - 1]);
                if omega <= 0.0 || omega > last {
                    0.0
                } else if omega < first {
                    table.ys()[0] * omega / first
                } else {
                    table.eval(omega)
                }
            }
        }
    }

    fn support_end(&self) -> f64 {
        match self {
            SpectralFunction::Ohmic(b) => 40.0 * b.omega_c,
            SpectralFunction::Tabulated { table, .. } => *table.xs().last().unwrap(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            SpectralFunction::Ohmic(b) => vec![b.omega_c, 3.0 * b.omega_c, 10.0 * b.omega_c],
            SpectralFunction::Tabulated { table, .. } => table.xs().to_vec(),
        }
    }

    /// Coupling amplitude `V = √(2J/(π m Ω₀))` describing the same bath.
    pub fn to_coupling(&self, omega0_big: f64) -> Result<CouplingSpectrum, BathError> {
        match self {
            SpectralFunction::Ohmic(b) => Ok(b.coupling(omega0_big)),
            SpectralFunction::Tabulated { table, m } => {
                let v = table.ys().iter().map(|&j| (2.0 * j.max(0.0) / (PI * m * omega0_big)).sqrt()).collect();
                Ok(CouplingSpectrum::tabulated(table.xs().to_vec(), v, None)?)
            }
        }
    }
}

/// Where a sampled kernel came from; decides how the tail beyond the window
/// is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelSource {
    Ohmic { gamma: f64, omega_c: f64 },
    Numeric,
}

/// `κ(t)` sampled on an ascending time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryKernel {
    pub times: Vec<f64>,
    pub kappa: Vec<f64>,
    /// `κ(0)`, independent of whether the grid contains `t = 0`.
    pub kappa0: f64,
    pub source: KernelSource,
}

/// The closed-form Ohmic kernel `κ(t) = (2/π)γω_c/(1+ω_c²t²)`.
pub fn ohmic_kernel(b: &OhmicBath, times: &[f64]) -> MemoryKernel {
    MemoryKernel {
        times: times.to_vec(),
        kappa: times.iter().map(|&t| b.kappa(t)).collect(),
        kappa0: b.kappa0(),
        source: KernelSource::Ohmic { gamma: b.gamma, omega_c: b.omega_c },
    }
}

/// `κ(t) = (2/πm) ∫ J(ω)/ω · cos ωt dω` by oscillatory quadrature.
pub fn kernel_from_density(j: &SpectralFunction, times: &[f64]) -> Result<MemoryKernel, BathError> {
    if let SpectralFunction::Tabulated { table, .. } = j {
        if table.xs()[0] == 0.0 && table.ys()[0] != 0.0 {
            return Err(BathError::DivergentKernel(table.ys()[0]));
        }
    }
    let m = j.mass();
    let prefactor = 2.0 / (PI * m);
    let end = j.support_end();
    let g = |w: f64| if w > 0.0 { j.j(w) / w } else { 0.0 };
    let breakpoints = j.breakpoints();
    let opts = FourierOptions {
        smooth_from: end,
        support_end: end,
        breakpoints: breakpoints.clone(),
        scale: breakpoints[0],
        cfg: QuadConfig::default().with_abs_tol(1e-12 / prefactor.max(1e-300)).with_max_subdivisions(200_000),
    };
    let kappa0 = prefactor * quad::integrate_points(g, &quad::breakpoints_in(0.0, end, &breakpoints), &opts.cfg)?.value;
    let kappa = times
        .par_iter()
        .map(|&t| fourier_with_tail(&g, t, &opts).map(|v| prefactor * v))
        .collect::<Result<Vec<_>, _>>()?;
    let source = match j {
        SpectralFunction::Ohmic(b) => KernelSource::Ohmic { gamma: b.gamma, omega_c: b.omega_c },
        _ => KernelSource::Numeric,
    };
    Ok(MemoryKernel { times: times.to_vec(), kappa, kappa0, source })
}

fn fourier_with_tail<G: Fn(f64) -> f64>(g: &G, t: f64, opts: &FourierOptions) -> Result<f64, QuadError> {
    Ok(quad::fourier_integral(g, t, Trig::Cos, opts)?.value)
}

/// Outcome of the bare-frequency checks for an Ohmic bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub kappa0: f64,
    /// `ω₀² > 0` (ω₀ = 0⁺ is allowed and counts as positive).
    pub long_time_ok: bool,
    /// `Ω₀² > 2γω_c/π`, the Hamiltonian positivity bound.
    pub short_time_ok: bool,
    /// `Ω₀²` implied by `ω₀² + κ(0)`.
    pub implied_omega0_big_sq: f64,
    /// Whether the given pair satisfies `Ω₀² = ω₀² + κ(0)` to 1e-9 relative.
    pub consistent: bool,
}

pub fn frequency_constraints(b: &OhmicBath, omega0_big: f64, omega0: f64) -> FrequencyReport {
    let kappa0 = b.kappa0();
    let implied = omega0 * omega0 + kappa0;
    let big_sq = omega0_big * omega0_big;
    FrequencyReport {
        kappa0,
        long_time_ok: omega0 >= 0.0,
        short_time_ok: big_sq > kappa0,
        implied_omega0_big_sq: implied,
        consistent: (big_sq - implied).abs() <= 1e-9 * implied.max(1e-300),
    }
}

/// The Markov damping rate `∫₀^∞ κ dt` split into the sampled window and the
/// estimated tail beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovEstimate {
    pub window: f64,
    pub tail: f64,
    pub rate: f64,
}

/// Integrate a sampled kernel. The window integral uses a cubic spline
/// through the samples (which must start at `t = 0`); the tail is analytic
/// for Ohmic kernels and an algebraic `C/t^p` fit to the last samples
/// otherwise.
pub fn markov_damping(k: &MemoryKernel) -> Result<MarkovEstimate, BathError> {
    if k.times.len() < 2 || k.times[0] != 0.0 {
        return Err(BathError::InvalidParameters("kernel samples must start at t = 0 and have at least two points".into()));
    }
    if k.kappa.iter().all(|&x| x == 0.0) {
        return Ok(MarkovEstimate { window: 0.0, tail: 0.0, rate: 0.0 });
    }
    let window = CubicSpline::new(k.times.clone(), k.kappa.clone()).integral();
    let n = k.times.len();
    let t_end = k.times[n - 1];
    let tail = match k.source {
        KernelSource::Ohmic { gamma, omega_c } => (2.0 * gamma / PI) * (0.5 * PI - (omega_c * t_end).atan()),
        KernelSource::Numeric => {
            let ratio = k.kappa[n - 1] / k.kappa0;
            if ratio.abs() > 1e-3 {
                return Err(BathError::NonDecayedKernel { ratio });
            }
            let (t1, t2) = (k.times[n - 2], t_end);
            let (k1, k2) = (k.kappa[n - 2], k.kappa[n - 1]);
            if k1 * k2 > 0.0 && t1 > 0.0 {
                let p = (k1 / k2).ln() / (t2 / t1).ln();
                if p > 1.0 {
                    k2 * t2 / (p - 1.0)
                } else {
                    return Err(BathError::NonDecayedKernel { ratio });
                }
            } else {
                0.0
            }
        }
    };
    Ok(MarkovEstimate { window, tail, rate: window + tail })
}

/// Solution of `ẍ + γẋ + ω₀²x = 0` with `x(0) = x0`, `m ẋ(0) = p0`;
/// returns `(x, p)` series.
pub fn markov_trajectory(gamma: f64, omega0: f64, m: f64, x0: f64, p0: f64, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    // Roots λ± = −γ/2 ± √(γ²/4 − ω₀²), possibly complex.
    let disc = Complex64::new(0.25 * gamma * gamma - omega0 * omega0, 0.0).sqrt();
    let half = Complex64::new(-0.5 * gamma, 0.0);
    let (l1, l2) = (half + disc, half - disc);
    let v0 = p0 / m;
    let mut xs = Vec::with_capacity(times.len());
    let mut ps = Vec::with_capacity(times.len());
    for &t in times {
        let (x, v) = if disc.norm() < 1e-12 * gamma.max(omega0) {
            // Critical damping.
            let l = -0.5 * gamma;
            let e = (l * t).exp();
            let b = v0 - l * x0;
            ((x0 + b * t) * e, (b + l * (x0 + b * t)) * e)
        } else {
            let a2 = (v0 - l1 * x0) / (l2 - l1);
            let a1 = x0 - a2;
            let (e1, e2) = ((l1 * t).exp(), (l2 * t).exp());
            ((a1 * e1 + a2 * e2).re, (a1 * l1 * e1 + a2 * l2 * e2).re)
        };
        xs.push(x);
        ps.push(m * v);
    }
    (xs, ps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ohmic_kernel_values() {
        let b = OhmicBath::new(1.5, 20.0, 1.0).unwrap();
        let k = ohmic_kernel(&b, &[0.0, 1.0 / 20.0]);
        assert_eq!(k.kappa[0], 2.0 * 1.5 * 20.0 / PI);
        assert!((k.kappa[1] - k.kappa0 / 2.0).abs() < 1e-14 * k.kappa0);
    }

    #[test]
    fn numeric_kernel_matches_closed_form() {
        let b = OhmicBath::new(0.7, 5.0, 2.0).unwrap();
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let num = kernel_from_density(&SpectralFunction::Ohmic(b), &times).unwrap();
        for (t, k) in times.iter().zip(&num.kappa) {
            assert!((k - b.kappa(*t)).abs() < 1e-7, "t={t}: {k} vs {}", b.kappa(*t));
        }
        assert!((num.kappa0 - b.kappa0()).abs() < 1e-9);
    }

    #[test]
    fn zero_spectral_function_gives_zero_kernel() {
        let j = SpectralFunction::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 0.0], 1.0).unwrap();
        let k = kernel_from_density(&j, &[0.0, 1.0, 5.0]).unwrap();
        assert!(k.kappa.iter().all(|&x| x == 0.0));
        assert_eq!(markov_damping(&k).unwrap().rate, 0.0);
    }

    #[test]
    fn divergent_table_is_rejected() {
        let j = SpectralFunction::tabulated(vec![0.0, 1.0], vec![0.5, 0.5], 1.0).unwrap();
        assert!(matches!(kernel_from_density(&j, &[0.0]), Err(BathError::DivergentKernel(_))));
    }

    #[test]
    fn markov_rate_for_ohmic_kernel() {
        let b = OhmicBath::new(2.0, 50.0, 1.0).unwrap();
        let times: Vec<f64> = (0..=4000).map(|i| i as f64 * (100.0 / 50.0) / 4000.0).collect();
        let est = markov_damping(&ohmic_kernel(&b, &times)).unwrap();
        assert!((est.rate - 2.0).abs() < 1e-4 * 2.0, "{est:?}");
        let short: Vec<f64> = (0..=400).map(|i| i as f64 * (1.0 / 50.0) / 400.0).collect();
        let est = markov_damping(&ohmic_kernel(&b, &short)).unwrap();
        assert!((est.window - 1.0).abs() < 1e-8, "{est:?}");
    }

    #[test]
    fn frequency_bound() {
        let b = OhmicBath::new(1.0, 100.0, 1.0).unwrap();
        assert!(frequency_constraints(&b, 70f64.sqrt(), 1.0).short_time_ok);
        assert!(!frequency_constraints(&b, 60f64.sqrt(), 1.0).short_time_ok);
        let r = frequency_constraints(&b, 0.0, 0.0);
        assert!(r.long_time_ok);
        assert_eq!(r.implied_omega0_big_sq, b.kappa0());
    }

    #[test]
    fn markov_trajectory_initial_conditions() {
        let times = [0.0, 1e-6];
        let (x, p) = markov_trajectory(0.1, 1.0, 2.0, 1.0, 0.4, &times);
        assert!((x[0] - 1.0).abs() < 1e-14 && (p[0] - 0.4).abs() < 1e-14);
        assert!((x[1] - (1.0 + 0.2e-6)).abs() < 1e-11);
    }
}
