//! Reduced Gaussian states of the oscillator: ground and thermal moments,
//! energies, the decorrelated "diagonal" description, entropies and the
//! symmetrically ordered characteristic function.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{SpectralDensity, SpectralError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("state violates the uncertainty bound: var_x·var_p − cov² = {0:.6e} < 1/4")]
    NonPhysicalState(f64),
    #[error("thermal moment diverges: π(ω) ~ ω^{exponent:.3} at low frequency is too weak a suppression")]
    DivergentMoment { exponent: f64 },
    #[error("symmetric moments are available up to total order 4, requested {0}")]
    UnsupportedOrder(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// First and second moments of a single-mode Gaussian state (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// Symmetrised covariance `½⟨{Δx, Δp}⟩`.
    pub cov_xp: f64,
}

impl GaussianState {
    /// Zero-mean, uncorrelated state with the given variances.
    pub fn centred(var_x: f64, var_p: f64) -> Self {
        Self { mean_x: 0.0, mean_p: 0.0, var_x, var_p, cov_xp: 0.0 }
    }

    /// Vacuum of an oscillator with mass `m` and frequency `omega`.
    pub fn vacuum(m: f64, omega: f64) -> Self {
        Self::centred(0.5 / (m * omega), 0.5 * m * omega)
    }

    /// `var_x·var_p − cov_xp²`, at least 1/4 for a physical state.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x * self.var_p - self.cov_xp * self.cov_xp
    }

    /// The single symplectic eigenvalue `√(var_x·var_p − cov²)`.
    pub fn symplectic_eigenvalue(&self) -> f64 {
        self.uncertainty_product().max(0.0).sqrt()
    }

    pub fn check_physical(&self, tol: f64) -> Result<(), StateError> {
        let u = self.uncertainty_product();
        if !(self.var_x > 0.0 && self.var_p > 0.0) || u < 0.25 - tol {
            return Err(StateError::NonPhysicalState(u));
        }
        Ok(())
    }
}

/// `coth(βω/2) = 1 + 2n̄(ω)`; an infinite `beta` is the zero-temperature limit.
pub fn thermal_weight(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        return 1.0;
    }
    1.0 + 2.0 / (beta * omega).exp_m1()
}

/// Bose–Einstein occupation `1/(e^{βω} − 1)`.
pub fn bose_einstein(beta: f64, omega: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        1.0 / (beta * omega).exp_m1()
    }
}

/// `var_x = ⟨⟨ω⁻¹⟩⟩/2m`, `var_p = m⟨⟨ω⟩⟩/2`.
pub fn ground_state(sd: &SpectralDensity, m: f64) -> Result<GaussianState, StateError> {
    thermal_state(sd, m, f64::INFINITY)
}

/// `var_x = ⟨⟨ω⁻¹ coth(βω/2)⟩⟩/2m`, `var_p = m⟨⟨ω coth(βω/2)⟩⟩/2`.
pub fn thermal_state(sd: &SpectralDensity, m: f64, beta: f64) -> Result<GaussianState, StateError> {
    if !(m > 0.0) {
        return Err(StateError::InvalidParameter(format!("mass {m} must be positive")));
    }
    if !(beta > 0.0) {
        return Err(StateError::InvalidParameter(format!("inverse temperature {beta} must be positive")));
    }
    // ⟨⟨ω⁻¹⟩⟩ needs π/ω integrable at 0; the thermal version needs π/ω².
    let q = sd.low_frequency_exponent();
    let needed = if beta.is_infinite() { 0.05 } else { 1.05 };
    if q <= needed {
        return Err(StateError::DivergentMoment { exponent: q });
    }
    let inv = sd.weighted_average(|w| thermal_weight(beta, w) / w)?;
    let mean = sd.weighted_average(|w| w * thermal_weight(beta, w))?;
    Ok(GaussianState::centred(inv / (2.0 * m), 0.5 * m * mean))
}

/// `⟨p²⟩/2m + m f₀²⟨x²⟩/2` for a reference frequency `f₀`.
pub fn oscillator_energy(state: &GaussianState, m: f64, f0: f64) -> f64 {
    let p2 = state.var_p + state.mean_p * state.mean_p;
    let x2 = state.var_x + state.mean_x * state.mean_x;
    p2 / (2.0 * m) + 0.5 * m * f0 * f0 * x2
}

/// Description of a zero-mean, uncorrelated state as a thermal state of the
/// oscillator mode `c` at the frequency that removes `⟨c²⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub omega_diag: f64,
    pub n_bar_c: f64,
    /// Effective temperature; zero when `n_bar_c` is zero.
    pub t_eff: f64,
    /// Von Neumann entropy in nats.
    pub entropy: f64,
    /// Mutual information between oscillator and bath for a globally pure
    /// state, twice the entropy.
    pub mutual_information: f64,
}

/// `(n+1)ln(n+1) − n ln n` with `0·ln 0 = 0`.
pub fn bose_entropy(n: f64) -> f64 {
    let a = if n > 0.0 { n * n.ln() } else { 0.0 };
    (n + 1.0) * n.ln_1p() - a
}

/// Entropy of a single-mode Gaussian state from its symplectic eigenvalue
/// `ν ≥ 1/2`: `(ν+½)ln(ν+½) − (ν−½)ln(ν−½)`.
pub fn gaussian_entropy(state: &GaussianState) -> f64 {
    let nu = state.symplectic_eigenvalue();
    bose_entropy((nu - 0.5).max(0.0))
}

/// `ω_diag = √(var_p/(m² var_x))`, `n̄_c = (√(4 var_x var_p) − 1)/2`, with the
/// effective temperature, entropy and mutual information that follow.
pub fn diagonal_form(state: &GaussianState, m: f64) -> Result<DiagonalForm, StateError> {
    state.check_physical(1e-12)?;
    let omega_diag = (state.var_p / (m * m * state.var_x)).sqrt();
    let n = (0.5 * ((4.0 * state.var_x * state.var_p).sqrt() - 1.0)).max(0.0);
    let t_eff = if n > 0.0 { omega_diag / (1.0 / n).ln_1p() } else { 0.0 };
    let entropy = bose_entropy(n);
    Ok(DiagonalForm { omega_diag, n_bar_c: n, t_eff, entropy, mutual_information: 2.0 * entropy })
}

/// Quadrature parameters `(a, b, C)` of the characteristic-function
/// exponent: `a = 2var_p/(mΩ₀)`, `b = 2mΩ₀var_x`, `C = cov_xp`.
fn exponent_parameters(state: &GaussianState, m: f64, omega0: f64) -> (f64, f64, f64) {
    (2.0 * state.var_p / (m * omega0), 2.0 * m * omega0 * state.var_x, state.cov_xp)
}

/// Modulus of the symmetrically ordered characteristic function
/// `χ(ξ) = Tr[ρ exp(ξa† − ξ*a)]`, with `a` the ladder operator at frequency
/// Ω₀: `exp(−(a ξ_r² + b ξ_i² − 4C ξ_r ξ_i)/2)`. Non-zero means only add a
/// phase, which is not included.
pub fn characteristic_function(state: &GaussianState, m: f64, omega0: f64, xi: Complex64) -> f64 {
    let (a, b, c) = exponent_parameters(state, m, omega0);
    (-0.5 * (a * xi.re * xi.re + b * xi.im * xi.im - 4.0 * c * xi.re * xi.im)).exp()
}

/// Symmetrically ordered moment `S⟨a†^j a^k⟩` of the centred state, from
/// derivatives of `χ` at the origin. In terms of `u = ξ`, `v = ξ*` the
/// exponent is `P u² + P̄ v² + Q uv`, so the moment is
/// `j!·k!·(−1)^k` times the `u^j v^k` coefficient of `exp(P u² + P̄ v² + Q uv)`.
///
/// The result is complex in general (for instance `S⟨a†²⟩`); for `j = k` it
/// is real. Vacuum at Ω₀ gives `S⟨a†a⟩ = 1/2`.
pub fn symmetric_moment(
    state: &GaussianState,
    m: f64,
    omega0: f64,
    order_dagger: usize,
    order_a: usize,
) -> Result<Complex64, StateError> {
    let total = order_dagger + order_a;
    if total > 4 {
        return Err(StateError::UnsupportedOrder(total));
    }
    let (a, b, c) = exponent_parameters(state, m, omega0);
    let p = -Complex64::new(a - b, 4.0 * c) / 8.0;
    let pb = -Complex64::new(a - b, -4.0 * c) / 8.0;
    let q = Complex64::new(-(a + b) / 4.0, 0.0);
    let mut coef = [[Complex64::new(0.0, 0.0); 5]; 5];
    coef[0][0] = Complex64::new(1.0, 0.0);
    coef[2][0] = p;
    coef[0][2] = pb;
    coef[1][1] = q;
    // Quadratic term of the exponential series: E²/2.
    coef[4][0] = p * p / 2.0;
    coef[0][4] = pb * pb / 2.0;
    coef[2][2] = q * q / 2.0 + p * pb;
    coef[3][1] = p * q;
    coef[1][3] = pb * q;
    let fact = |n: usize| (1..=n).product::<usize>() as f64;
    let sign = if order_a % 2 == 0 { 1.0 } else { -1.0 };
    Ok(coef[order_dagger][order_a] * (fact(order_dagger) * fact(order_a) * sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_weight_limits() {
        assert_eq!(thermal_weight(f64::INFINITY, 2.0), 1.0);
        let x: f64 = 1e-4;
        assert!((thermal_weight(x, 1.0) - 2.0 / x).abs() < 1e-3 * (2.0 / x));
        let (b, w) = (0.7, 1.3);
        assert!(((thermal_weight(b, w) - 1.0) - 2.0 / ((b * w).exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn vacuum_moments() {
        let s = GaussianState::vacuum(2.0, 3.0);
        assert!((s.uncertainty_product() - 0.25).abs() < 1e-15);
        let one_one = symmetric_moment(&s, 2.0, 3.0, 1, 1).unwrap();
        assert!((one_one - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        let two_two = symmetric_moment(&s, 2.0, 3.0, 2, 2).unwrap();
        assert!((two_two - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(symmetric_moment(&s, 2.0, 3.0, 1, 0).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(symmetric_moment(&s, 2.0, 3.0, 3, 2), Err(StateError::UnsupportedOrder(5))));
        let d = diagonal_form(&s, 2.0).unwrap();
        assert_eq!((d.n_bar_c, d.entropy, d.t_eff), (0.0, 0.0, 0.0));
        assert!((d.omega_diag - 3.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_symmetric_number() {
        let (m, w, beta) = (1.5, 2.0, 0.8);
        let n = bose_einstein(beta, w);
        let s = GaussianState::centred((2.0 * n + 1.0) / (2.0 * m * w), (2.0 * n + 1.0) * m * w / 2.0);
        let sym = symmetric_moment(&s, m, w, 1, 1).unwrap();
        assert!((sym.re - (2.0 * n + 1.0) / 2.0).abs() < 1e-13);
        let xi = Complex64::new(0.3, -0.4);
        let chi = characteristic_function(&s, m, w, xi);
        assert!((chi - (-(xi.norm_sqr()) * (2.0 * n + 1.0) / 2.0).exp()).abs() < 1e-14);
        let d = diagonal_form(&s, m).unwrap();
        assert!((d.n_bar_c - n).abs() < 1e-12);
        assert!((d.t_eff - 1.0 / beta).abs() < 1e-10);
    }

    #[test]
    fn characteristic_function_curvature_gives_variance() {
        let s = GaussianState { mean_x: 0.0, mean_p: 0.0, var_x: 0.8, var_p: 0.6, cov_xp: 0.1 };
        let (m, w) = (1.0, 1.0);
        let h = 1e-4;
        let f = |xi_i: f64| characteristic_function(&s, m, w, Complex64::new(0.0, xi_i));
        let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        // ∂²χ/∂ξ_i² at 0 is −b = −2mΩ₀ var_x.
        assert!((second + 2.0 * m * w * s.var_x).abs() < 1e-6);
        assert_eq!(f(0.0), 1.0);
    }

    #[test]
    fn entropy_matches_symplectic_form() {
        let s = GaussianState::centred(1.3, 0.9);
        let d = diagonal_form(&s, 1.0).unwrap();
        assert!((d.entropy - gaussian_entropy(&s)).abs() < 1e-12);
        assert!((d.mutual_information - 2.0 * d.entropy).abs() < 1e-15);
        assert!(diagonal_form(&GaussianState::centred(0.1, 0.1), 1.0).is_err());
    }
}
