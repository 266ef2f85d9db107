//! Brute-force discrete-bath model used to check every continuum result.
//!
//! The oscillator couples to `N` bath modes. In mass-weighted coordinates
//! `X₀ = √m·x`, `P₀ = p/√m` and unit-mass bath coordinates, the Hamiltonian
//! is `H = ½PᵀP + ½XᵀMX` with
//!
//! `M₀₀ = Ω₀²`, `M_μμ = ω_μ²`, `M₀μ = V_μ√(Ω₀ω_μ)`,
//!
//! which is positive definite exactly when `Ω₀ > Σ V_μ²/ω_μ`. Diagonalising
//! `M = O·diag(Ω_k²)·Oᵀ` once gives the exact propagator at any time, so the
//! oracle has no step-size error; finite `N` only shows up through
//! recurrences at the inverse level spacing.

use std::f64::consts::PI;

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bath::{KernelSource, MemoryKernel};
use crate::fano::CouplingSpectrum;
use crate::quad;
use crate::states::{thermal_weight, GaussianState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("discrete positivity violated: Σ V²/ω = {sum:.6e} is not below Ω₀ = {omega0:.6e}")]
    PositivityViolation { sum: f64, omega0: f64 },
    #[error("normal mode {index} has non-positive squared frequency {value:.6e}")]
    NonPositiveMode { index: usize, value: f64 },
    #[error("invalid bath: {0}")]
    InvalidBath(String),
}

/// `N` bath modes with frequencies `ω_μ` and effective couplings `V_μ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub omegas: Vec<f64>,
    pub couplings: Vec<f64>,
    pub m: f64,
    pub omega0: f64,
}

impl DiscreteBath {
    pub fn new(omegas: Vec<f64>, couplings: Vec<f64>, m: f64, omega0: f64) -> Result<Self, OracleError> {
        if omegas.len() != couplings.len() {
            return Err(OracleError::InvalidBath("frequency and coupling counts differ".into()));
        }
        if omegas.iter().any(|&w| !(w > 0.0 && w.is_finite())) || couplings.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::InvalidBath("frequencies must be positive and finite".into()));
        }
        if !(m > 0.0 && omega0 > 0.0) {
            return Err(OracleError::InvalidBath("mass and Ω₀ must be positive".into()));
        }
        let bath = Self { omegas, couplings, m, omega0 };
        let sum = bath.positivity_sum();
        if sum >= omega0 {
            return Err(OracleError::PositivityViolation { sum, omega0 });
        }
        Ok(bath)
    }

    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    /// `Σ V_μ²/ω_μ`.
    pub fn positivity_sum(&self) -> f64 {
        self.omegas.iter().zip(&self.couplings).map(|(w, v)| v * v / w).sum()
    }

    /// `2π/Δω` with Δω the largest spacing between neighbouring modes: the
    /// earliest time at which some part of the spectrum rephases.
    pub fn recurrence_time(&self) -> f64 {
        let mut w = self.omegas.clone();
        w.sort_by(f64::total_cmp);
        let max_gap = w.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        if max_gap > 0.0 {
            2.0 * PI / max_gap
        } else {
            f64::INFINITY
        }
    }

    /// The `(N+1)×(N+1)` potential matrix `M`.
    pub fn potential_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = self.omega0 * self.omega0;
        for (i, (&w, &v)) in self.omegas.iter().zip(&self.couplings).enumerate() {
            m[(i + 1, i + 1)] = w * w;
            let k = v * (self.omega0 * w).sqrt();
            m[(0, i + 1)] = k;
            m[(i + 1, 0)] = k;
        }
        m
    }

    /// Diagonalise the potential; fails if any normal mode is unstable.
    pub fn normal_modes(&self) -> Result<NormalModes, OracleError> {
        let eig = SymmetricEigen::new(self.potential_matrix());
        for (index, &value) in eig.eigenvalues.iter().enumerate() {
            if !(value > 0.0) {
                return Err(OracleError::NonPositiveMode { index, value });
            }
        }
        let freqs = eig.eigenvalues.map(f64::sqrt);
        Ok(NormalModes { freqs, vectors: eig.eigenvectors })
    }

    /// `κ(t) = Ω₀ Σ V_μ²/ω_μ · cos ω_μt`.
    pub fn memory_kernel(&self, times: &[f64]) -> MemoryKernel {
        let kappa: Vec<f64> = times
            .iter()
            .map(|&t| {
                self.omegas.iter().zip(&self.couplings).map(|(w, v)| v * v / w * (w * t).cos()).sum::<f64>() * self.omega0
            })
            .collect();
        MemoryKernel { times: times.to_vec(), kappa, kappa0: self.omega0 * self.positivity_sum(), source: KernelSource::Numeric }
    }
}

/// Gauss–Legendre discretisation of a coupling spectrum on `[0, ω_max]`:
/// nodes `ω_μ`, couplings `V(ω_μ)√w_μ`.
pub fn discretize(
    v: &CouplingSpectrum,
    omega0: f64,
    m: f64,
    n_modes: usize,
    omega_max: f64,
) -> Result<DiscreteBath, OracleError> {
    if n_modes < 2 {
        return Err(OracleError::InvalidBath("need at least two modes".into()));
    }
    discretize_composite(v, omega0, m, &[(0.0, omega_max, n_modes)])
}

/// Composite Gauss–Legendre rule: `segments` lists `(a, b, nodes)` panels.
/// Placing dense panels around a sharp resonance keeps the level spacing
/// there small, which pushes the recurrence time out.
pub fn discretize_composite(
    v: &CouplingSpectrum,
    omega0: f64,
    m: f64,
    segments: &[(f64, f64, usize)],
) -> Result<DiscreteBath, OracleError> {
    let mut omegas = Vec::new();
    let mut couplings = Vec::new();
    for &(a, b, n) in segments {
        if !(b > a && a >= 0.0) || n == 0 {
            return Err(OracleError::InvalidBath(format!("bad segment [{a}, {b}] with {n} nodes")));
        }
        let (nodes, weights) = quad::gauss_legendre(n, a, b);
        for (w, wt) in nodes.into_iter().zip(weights) {
            omegas.push(w);
            couplings.push(v.v(w) * wt.sqrt());
        }
    }
    DiscreteBath::new(omegas, couplings, m, omega0)
}

/// Normal-mode frequencies `Ω_k` and the orthogonal matrix `O` (columns are
/// modes; row 0 is the oscillator component).
#[derive(Debug, Clone)]
pub struct NormalModes {
    pub freqs: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl NormalModes {
    /// Discrete spectral weights `O₀ₖ²`, summing to one.
    pub fn weights(&self) -> Vec<f64> {
        self.vectors.row(0).iter().map(|o| o * o).collect()
    }

    /// Oscillator components of the dressed-mode annihilation operators:
    /// `(α_k, β_k)` with `r = √(Ω_k/Ω₀)`,
    /// `α_k = O₀ₖ(r + 1/r)/2`, `β_k = O₀ₖ(r − 1/r)/2`.
    pub fn oscillator_coefficients(&self, omega0: f64) -> Vec<(f64, f64)> {
        self.freqs
            .iter()
            .zip(self.vectors.row(0).iter())
            .map(|(&f, &o)| {
                let r = (f / omega0).sqrt();
                (0.5 * o * (r + 1.0 / r), 0.5 * o * (r - 1.0 / r))
            })
            .collect()
    }

    /// Bath components `(γ_kμ, δ_kμ)` of dressed mode `k` on bath mode `μ`.
    pub fn bath_coefficients(&self, bath: &DiscreteBath, k: usize) -> Vec<(f64, f64)> {
        let f = self.freqs[k];
        bath.omegas
            .iter()
            .enumerate()
            .map(|(mu, &w)| {
                let o = self.vectors[(mu + 1, k)];
                let r = (f / w).sqrt();
                (0.5 * o * (r + 1.0 / r), 0.5 * o * (r - 1.0 / r))
            })
            .collect()
    }

    /// Rows of the propagator for the oscillator coordinates at time `t`:
    /// `X₀(t) = Σ_j rx_j X_j + rp_j P_j` and `P₀(t) = Σ_j ux_j X_j + up_j P_j`.
    fn oscillator_rows(&self, t: f64) -> [DVector<f64>; 4] {
        let o = &self.vectors;
        let o0 = o.row(0).transpose();
        let n = self.freqs.len();
        let mut a = DVector::zeros(n);
        let mut b = DVector::zeros(n);
        let mut c = DVector::zeros(n);
        for k in 0..n {
            let f = self.freqs[k];
            let (s, co) = (f * t).sin_cos();
            a[k] = o0[k] * co;
            b[k] = o0[k] * s / f;
            c[k] = -o0[k] * f * s;
        }
        let rx = o * &a;
        let rp = o * &b;
        let ux = o * &c;
        // P₀ against P_j has the same cosine row as X₀ against X_j.
        let up = rx.clone();
        [rx, rp, ux, up]
    }

    /// The full `(2N+2)` symplectic map in the ordering `(X₀..X_N, P₀..P_N)`.
    pub fn propagator(&self, t: f64) -> DMatrix<f64> {
        let n = self.freqs.len();
        let o = &self.vectors;
        let cos = DMatrix::from_diagonal(&self.freqs.map(|f| (f * t).cos()));
        let sin_over = DMatrix::from_diagonal(&self.freqs.map(|f| (f * t).sin() / f));
        let minus_sin = DMatrix::from_diagonal(&self.freqs.map(|f| -(f * t).sin() * f));
        let c = o * cos * o.transpose();
        let s = o * sin_over * o.transpose();
        let u = o * minus_sin * o.transpose();
        let mut p = DMatrix::zeros(2 * n, 2 * n);
        p.view_mut((0, 0), (n, n)).copy_from(&c);
        p.view_mut((0, n), (n, n)).copy_from(&s);
        p.view_mut((n, 0), (n, n)).copy_from(&u);
        p.view_mut((n, n), (n, n)).copy_from(&c);
        p
    }
}

/// Oscillator means over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanTrajectory {
    pub times: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
}

/// Means for a bath at rest on average: only the oscillator row of the
/// propagator matters, `x̄(t) = Σ_k O₀ₖ²(x₀ cos Ω_k t + p₀ sin Ω_k t/(mΩ_k))`.
pub fn evolve_means_discrete(b: &DiscreteBath, x0: f64, p0: f64, times: &[f64]) -> Result<MeanTrajectory, OracleError> {
    let modes = b.normal_modes()?;
    let w = modes.weights();
    let (mut xs, mut ps) = (Vec::with_capacity(times.len()), Vec::with_capacity(times.len()));
    for &t in times {
        let (mut x, mut p) = (0.0, 0.0);
        for (k, &wk) in w.iter().enumerate() {
            let f = modes.freqs[k];
            let (s, c) = (f * t).sin_cos();
            x += wk * (x0 * c + p0 * s / (b.m * f));
            p += wk * (p0 * c - b.m * x0 * f * s);
        }
        xs.push(x);
        ps.push(p);
    }
    Ok(MeanTrajectory { times: times.to_vec(), mean_x: xs, mean_p: ps })
}

/// Oscillator moments over time under exact Gaussian evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceTrajectory {
    pub times: Vec<f64>,
    pub var_x: Vec<f64>,
    pub var_p: Vec<f64>,
    pub cov_xp: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub recurrence_time: f64,
    /// Times beyond 0.8 of the recurrence estimate, where finite-N revivals
    /// may contaminate the result.
    pub beyond_recurrence: Vec<f64>,
}

impl CovarianceTrajectory {
    pub fn state_at(&self, i: usize) -> GaussianState {
        GaussianState {
            mean_x: self.mean_x[i],
            mean_p: self.mean_p[i],
            var_x: self.var_x[i],
            var_p: self.var_p[i],
            cov_xp: self.cov_xp[i],
        }
    }
}

/// Initial covariance of the bath modes in thermal equilibrium at `beta`:
/// `Var X_μ = coth(βω_μ/2)/(2ω_μ)`, `Var P_μ = ω_μ coth(βω_μ/2)/2`.
fn bath_variances(b: &DiscreteBath, beta: f64) -> (Vec<f64>, Vec<f64>) {
    b.omegas
        .iter()
        .map(|&w| {
            let c = thermal_weight(beta, w);
            (0.5 * c / w, 0.5 * c * w)
        })
        .unzip()
}

/// Evolve the full Gaussian state of oscillator plus thermal bath and
/// extract the oscillator block. The oscillator starts uncorrelated with the
/// bath in `initial`.
pub fn evolve_covariance_discrete(
    b: &DiscreteBath,
    beta: f64,
    initial: &GaussianState,
    times: &[f64],
) -> Result<CovarianceTrajectory, OracleError> {
    let modes = b.normal_modes()?;
    let (vx, vp) = bath_variances(b, beta);
    let m = b.m;
    // Oscillator block in mass-weighted coordinates.
    let (sxx, spp, sxp) = (m * initial.var_x, initial.var_p / m, initial.cov_xp);
    let means = evolve_means_discrete(b, initial.mean_x, initial.mean_p, times)?;
    let rows: Vec<(f64, f64, f64)> = times
        .par_iter()
        .map(|&t| {
            let [rx, rp, ux, up] = modes.oscillator_rows(t);
            let mut var_x = rx[0] * rx[0] * sxx + rp[0] * rp[0] * spp + 2.0 * rx[0] * rp[0] * sxp;
            let mut var_p = ux[0] * ux[0] * sxx + up[0] * up[0] * spp + 2.0 * ux[0] * up[0] * sxp;
            let mut cov = rx[0] * ux[0] * sxx + rp[0] * up[0] * spp + (rx[0] * up[0] + rp[0] * ux[0]) * sxp;
            for j in 1..rx.len() {
                let (ax, ap) = (vx[j - 1], vp[j - 1]);
                var_x += rx[j] * rx[j] * ax + rp[j] * rp[j] * ap;
                var_p += ux[j] * ux[j] * ax + up[j] * up[j] * ap;
                cov += rx[j] * ux[j] * ax + rp[j] * up[j] * ap;
            }
            (var_x / m, var_p * m, cov)
        })
        .collect();
    let t_rec = b.recurrence_time();
    let beyond: Vec<f64> = times.iter().copied().filter(|&t| t > 0.8 * t_rec).collect();
    if !beyond.is_empty() {
        warn!(
            "{} requested times exceed 0.8 × the recurrence estimate {t_rec:.4}; finite-bath revivals may appear",
            beyond.len()
        );
    }
    Ok(CovarianceTrajectory {
        times: times.to_vec(),
        var_x: rows.iter().map(|r| r.0).collect(),
        var_p: rows.iter().map(|r| r.1).collect(),
        cov_xp: rows.iter().map(|r| r.2).collect(),
        mean_x: means.mean_x,
        mean_p: means.mean_p,
        recurrence_time: t_rec,
        beyond_recurrence: beyond,
    })
}

/// Symplectic eigenvalues of the full system-plus-bath covariance at time
/// `t`; all equal to 1/2 for a globally pure state. Cost is cubic in `N`.
pub fn global_symplectic_eigenvalues(
    b: &DiscreteBath,
    beta: f64,
    initial: &GaussianState,
    t: f64,
) -> Result<Vec<f64>, OracleError> {
    let modes = b.normal_modes()?;
    let n = b.n_modes() + 1;
    let (vx, vp) = bath_variances(b, beta);
    let mut sigma = DMatrix::zeros(2 * n, 2 * n);
    sigma[(0, 0)] = b.m * initial.var_x;
    sigma[(n, n)] = initial.var_p / b.m;
    sigma[(0, n)] = initial.cov_xp;
    sigma[(n, 0)] = initial.cov_xp;
    for j in 1..n {
        sigma[(j, j)] = vx[j - 1];
        sigma[(n + j, n + j)] = vp[j - 1];
    }
    let s = modes.propagator(t);
    let evolved = &s * sigma * s.transpose();
    Ok(symplectic_spectrum(&evolved))
}

/// Symplectic eigenvalues of a covariance matrix in `(X…, P…)` ordering,
/// ascending, each listed once.
pub fn symplectic_spectrum(sigma: &DMatrix<f64>) -> Vec<f64> {
    let dim = sigma.nrows();
    let n = dim / 2;
    let eig = SymmetricEigen::new(0.5 * (sigma + sigma.transpose()));
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|e| e.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let mut j = DMatrix::zeros(dim, dim);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    let a = &root * j * &root;
    let ata = a.transpose() * &a;
    let mut nu: Vec<f64> = SymmetricEigen::new(0.5 * (&ata + ata.transpose()))
        .eigenvalues
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    nu.sort_by(f64::total_cmp);
    nu.into_iter().step_by(2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::OhmicBath;

    #[test]
    fn uncoupled_bath_is_free_oscillator() {
        let b = discretize(&CouplingSpectrum::zero(10.0), 2.0, 1.5, 20, 10.0).unwrap();
        assert_eq!(b.positivity_sum(), 0.0);
        let tr = evolve_means_discrete(&b, 1.0, 0.5, &[0.0, 0.7, 3.1]).unwrap();
        for (i, &t) in tr.times.iter().enumerate() {
            let x = (2.0 * t).cos() + 0.5 * (2.0 * t).sin() / (1.5 * 2.0);
            assert!((tr.mean_x[i] - x).abs() < 1e-12);
        }
        let init = GaussianState::centred(0.3, 0.7);
        let cov = evolve_covariance_discrete(&b, f64::INFINITY, &init, &[PI / 4.0]).unwrap();
        // A quarter period of the free rotation swaps the scaled quadratures.
        assert!((cov.var_x[0] - 0.7 / (1.5 * 1.5 * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn violating_bath_is_rejected() {
        let err = DiscreteBath::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0, 1.0).unwrap_err();
        assert!(matches!(err, OracleError::PositivityViolation { .. }));
        // Constructing the matrix directly exposes the unstable mode.
        let bad = DiscreteBath { omegas: vec![1.0, 2.0], couplings: vec![1.0, 1.0], m: 1.0, omega0: 1.0 };
        assert!(matches!(bad.normal_modes(), Err(OracleError::NonPositiveMode { .. })));
    }

    #[test]
    fn short_time_momentum_change() {
        let bath = OhmicBath::new(0.5, 3.0, 1.0).unwrap();
        let omega0 = (1.0 + bath.kappa0()).sqrt();
        let b = discretize(&bath.coupling(omega0), omega0, 2.0, 200, 30.0).unwrap();
        let dt = 1e-5;
        let tr = evolve_means_discrete(&b, 1.0, 0.0, &[dt]).unwrap();
        let expected = -2.0 * omega0 * omega0 * dt;
        assert!((tr.mean_p[0] - expected).abs() < 1e-4 * expected.abs());
    }

    #[test]
    fn weights_sum_to_one_and_kernel_at_zero() {
        let bath = OhmicBath::new(0.5, 3.0, 1.0).unwrap();
        let omega0 = (1.0 + bath.kappa0()).sqrt();
        let b = discretize(&bath.coupling(omega0), omega0, 1.0, 400, 40.0).unwrap();
        let modes = b.normal_modes().unwrap();
        let total: f64 = modes.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let k = b.memory_kernel(&[0.0]);
        assert!((k.kappa[0] - bath.kappa0()).abs() < 1e-2 * bath.kappa0());
        // Bogoliubov normalisation of each dressed mode: Σ|α|²−|β|² = 1.
        let osc = modes.oscillator_coefficients(omega0);
        for k in [0, 17, 200] {
            let bc = modes.bath_coefficients(&b, k);
            let norm = osc[k].0.powi(2) - osc[k].1.powi(2) + bc.iter().map(|(g, d)| g * g - d * d).sum::<f64>();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn global_state_stays_pure() {
        let bath = OhmicBath::new(0.5, 3.0, 1.0).unwrap();
        let omega0 = (1.0 + bath.kappa0()).sqrt();
        let b = discretize(&bath.coupling(omega0), omega0, 1.0, 30, 30.0).unwrap();
        let init = GaussianState::vacuum(1.0, 1.3);
        for t in [0.0, 2.0, 11.0] {
            let nu = global_symplectic_eigenvalues(&b, f64::INFINITY, &init, t).unwrap();
            for v in nu {
                assert!((v - 0.5).abs() < 1e-9, "t={t}: {v}");
            }
        }
    }
}
