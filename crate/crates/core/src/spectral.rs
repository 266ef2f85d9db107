//! The spectral weight π(ω): the normalised distribution over dressed-mode
//! frequencies that carries every property of the damped oscillator.
//!
//! Three sources are supported: the three-pole parametric family, densities
//! induced by a bath coupling through exact diagonalisation
//! ([`crate::fano::FanoDensity`]), and tabulated data with an algebraic tail.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fano::FanoDensity;
use crate::interp::MonotoneCubic;
use crate::quad::{self, QuadConfig, QuadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("non-physical pole rates: {0}")]
    NonPhysicalPoles(String),
    #[error("negative frequency {0} has no spectral weight")]
    NegativeFrequency(f64),
    #[error("two pole rates coincide ({a} vs {b}); the closed forms need a limit formula")]
    DegenerateRates { a: Complex64, b: Complex64 },
    #[error("weighted average did not converge: {0}")]
    QuadratureNonConvergence(#[from] QuadError),
    #[error("closed form left an imaginary residue of {0:.3e}")]
    ImaginaryResidue(f64),
    #[error("operation requires a parametric density")]
    NotParametric,
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// Three-pole spectral weight
/// `π(ω) = (2ω²/π)·(γ₊+γ₋)(γ₋+Γ)(Γ+γ₊) / [(ω²+Γ²)(ω²+γ₊²)(ω²+γ₋²)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricDensity {
    /// The rate Γ, real and positive.
    pub big_gamma: f64,
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
}

impl ParametricDensity {
    fn prefactor(&self) -> f64 {
        let g = Complex64::new(self.big_gamma, 0.0);
        let num = (self.gamma_plus + self.gamma_minus) * (self.gamma_minus + g) * (g + self.gamma_plus);
        2.0 * num.re / PI
    }

    /// Coefficients of `ω⁴ + b1·ω² + b0 = (ω²+γ₊²)(ω²+γ₋²)`; both are real.
    fn quartic(&self) -> (f64, f64) {
        let gp2 = self.gamma_plus * self.gamma_plus;
        let gm2 = self.gamma_minus * self.gamma_minus;
        ((gp2 + gm2).re, (gp2 * gm2).re)
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let w2 = omega * omega;
        let (b1, b0) = self.quartic();
        let den = (w2 + self.big_gamma * self.big_gamma) * ((w2 + b1) * w2 + b0);
        self.prefactor() * w2 / den
    }

    /// `Γ(γ₊+γ₋) + γ₊γ₋`, the exact second moment.
    pub fn omega0_sq(&self) -> f64 {
        (self.big_gamma * (self.gamma_plus + self.gamma_minus) + self.gamma_plus * self.gamma_minus).re
    }

    /// `γ₊γ₋`, the squared long-time frequency of the classical oscillator
    /// with the same pair of rates.
    pub fn classical_omega0_sq(&self) -> f64 {
        (self.gamma_plus * self.gamma_minus).re
    }

    /// `γ₊+γ₋`, the classical damping rate.
    pub fn classical_damping(&self) -> f64 {
        (self.gamma_plus + self.gamma_minus).re
    }

    /// The three decay rates `[Γ, γ₊, γ₋]`.
    pub fn rates(&self) -> [Complex64; 3] {
        [Complex64::new(self.big_gamma, 0.0), self.gamma_plus, self.gamma_minus]
    }

    pub fn check_distinct(&self) -> Result<(), SpectralError> {
        let r = self.rates();
        for i in 0..3 {
            for j in i + 1..3 {
                let scale = r[i].norm().max(r[j].norm()).max(1.0);
                if (r[i] - r[j]).norm() <= 1e-12 * scale {
                    return Err(SpectralError::DegenerateRates { a: r[i], b: r[j] });
                }
            }
        }
        Ok(())
    }

    fn max_rate(&self) -> f64 {
        self.rates().iter().map(|r| r.norm()).fold(0.0, f64::max)
    }

    fn features(&self) -> Vec<f64> {
        let mut pts = vec![self.big_gamma, self.gamma_plus.norm(), self.gamma_minus.norm()];
        pts.push(self.gamma_plus.im.abs());
        pts.retain(|&x| x > 0.0);
        pts
    }
}

/// Tabulated π on an ascending grid, interpolated with a monotone cubic.
/// Below the first node the weight follows `ω²` (unless the grid starts at
/// zero); beyond the last node it decays as `C/ω^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedDensity {
    interp: MonotoneCubic,
    tail_exponent: f64,
}

impl TabulatedDensity {
    pub fn new(omega: Vec<f64>, values: Vec<f64>, tail_exponent: f64) -> Result<Self, SpectralError> {
        if omega.len() < 2 || omega.len() != values.len() {
            return Err(SpectralError::InvalidTable("need at least two (omega, pi) rows of equal length".into()));
        }
        if omega.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(SpectralError::InvalidTable("non-finite entry".into()));
        }
        if omega[0] < 0.0 || !omega.windows(2).all(|w| w[1] > w[0]) {
            return Err(SpectralError::InvalidTable("frequencies must be non-negative and strictly ascending".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(SpectralError::InvalidTable("negative spectral weight".into()));
        }
        if !(tail_exponent > 1.0) {
            return Err(SpectralError::InvalidTable(format!("tail exponent {tail_exponent} must exceed 1")));
        }
        Ok(Self { interp: MonotoneCubic::new(omega, values), tail_exponent })
    }

    pub fn omega_grid(&self) -> &[f64] {
        self.interp.xs()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.ys()
    }

    pub fn tail_exponent(&self) -> f64 {
        self.tail_exponent
    }

    fn grid_max(&self) -> f64 {
        *self.interp.xs().last().unwrap()
    }

    pub fn eval(&self, omega: f64) -> f64 {
        let xs = self.interp.xs();
        let ys = self.interp.ys();
        let (first, last) = (xs[0], xs[xs.len() - 1]);
        if omega > last {
            ys[ys.len() - 1] * (last / omega).powf(self.tail_exponent)
        } else if omega < first {
            let r = omega / first;
            ys[0] * r * r
        } else {
            self.interp.eval(omega).max(0.0)
        }
    }
}

/// A normalised spectral weight π(ω) on `ω ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpectralDensity {
    Parametric(ParametricDensity),
    FanoDerived(FanoDensity),
    Tabulated(TabulatedDensity),
}

/// Closed-form moments of a parametric density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormMoments {
    pub mean_omega: f64,
    pub mean_inv_omega: f64,
    pub omega0_sq: f64,
}

/// Tolerances used to turn measured residuals into pass/fail flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    /// Absolute tolerance for normalisation and `π(0) = 0`.
    pub absolute: f64,
    /// Relative tolerance for the second moment against its exact value.
    pub second_moment_relative: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self { absolute: 1e-6, second_moment_relative: 1e-4 }
    }
}

/// Individual outcomes of [`SpectralDensity::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationChecks {
    pub normalization: bool,
    pub pi_at_zero: bool,
    pub non_negative: bool,
    pub second_moment_finite: bool,
    pub second_moment_consistent: bool,
    pub mean_below_rms: bool,
    pub cauchy_schwartz: bool,
}

impl ValidationChecks {
    pub fn all(&self) -> bool {
        self.normalization
            && self.pi_at_zero
            && self.non_negative
            && self.second_moment_finite
            && self.second_moment_consistent
            && self.mean_below_rms
            && self.cauchy_schwartz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `∫π − 1`.
    pub normalization_residual: f64,
    pub pi_at_zero: f64,
    pub second_moment: f64,
    /// Exact second moment where the source defines one.
    pub expected_second_moment: Option<f64>,
    pub mean_omega: f64,
    pub mean_inv_omega: f64,
    /// `⟨⟨ω⟩⟩·⟨⟨ω⁻¹⟩⟩`, at least one for a legitimate weight.
    pub cauchy_schwartz_product: f64,
    /// Smallest value on the logarithmic sampling grid.
    pub min_sampled_value: f64,
    pub checks: ValidationChecks,
    pub passed: bool,
}

impl SpectralDensity {
    /// Three-pole parametric density. `γ±` must be both real and positive or
    /// a complex-conjugate pair with positive real part.
    pub fn parametric(big_gamma: f64, gamma_plus: Complex64, gamma_minus: Complex64) -> Result<Self, SpectralError> {
        if !(big_gamma > 0.0) || !big_gamma.is_finite() {
            return Err(SpectralError::NonPhysicalPoles(format!("Gamma = {big_gamma} must be positive")));
        }
        let scale = gamma_plus.norm().max(gamma_minus.norm());
        if !scale.is_finite() || scale == 0.0 {
            return Err(SpectralError::NonPhysicalPoles("rates must be finite and non-zero".into()));
        }
        let eps = 1e-14 * scale;
        let both_real = gamma_plus.im.abs() <= eps && gamma_minus.im.abs() <= eps;
        let (gp, gm) = if both_real {
            if !(gamma_plus.re > 0.0 && gamma_minus.re > 0.0) {
                return Err(SpectralError::NonPhysicalPoles(format!(
                    "real rates must be positive, got {gamma_plus} and {gamma_minus}"
                )));
            }
            (Complex64::new(gamma_plus.re, 0.0), Complex64::new(gamma_minus.re, 0.0))
        } else {
            if (gamma_plus - gamma_minus.conj()).norm() > 1e-12 * scale {
                return Err(SpectralError::NonPhysicalPoles(format!(
                    "complex rates must be a conjugate pair, got {gamma_plus} and {gamma_minus}"
                )));
            }
            if !(gamma_plus.re > 0.0) {
                return Err(SpectralError::NonPhysicalPoles(format!(
                    "complex rates need a positive real part, got {gamma_plus}"
                )));
            }
            (gamma_plus, gamma_plus.conj())
        };
        Ok(SpectralDensity::Parametric(ParametricDensity { big_gamma, gamma_plus: gp, gamma_minus: gm }))
    }

    /// Tabulated density with algebraic tail exponent `p` (4 matches the
    /// parametric family).
    pub fn tabulated(omega: Vec<f64>, values: Vec<f64>, tail_exponent: f64) -> Result<Self, SpectralError> {
        Ok(SpectralDensity::Tabulated(TabulatedDensity::new(omega, values, tail_exponent)?))
    }

    /// π(ω) for `ω ≥ 0`.
    pub fn value(&self, omega: f64) -> Result<f64, SpectralError> {
        if omega < 0.0 || omega.is_nan() {
            return Err(SpectralError::NegativeFrequency(omega));
        }
        Ok(self.eval(omega))
    }

    /// π(ω) without argument checking; zero for negative frequencies.
    pub fn eval(&self, omega: f64) -> f64 {
        if !(omega >= 0.0) {
            return 0.0;
        }
        match self {
            SpectralDensity::Parametric(p) => p.eval(omega),
            SpectralDensity::FanoDerived(f) => f.eval(omega),
            SpectralDensity::Tabulated(t) => t.eval(omega),
        }
    }

    pub fn as_parametric(&self) -> Option<&ParametricDensity> {
        match self {
            SpectralDensity::Parametric(p) => Some(p),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SpectralDensity::Parametric(_) => "parametric",
            SpectralDensity::FanoDerived(_) => "fano-derived",
            SpectralDensity::Tabulated(_) => "tabulated",
        }
    }

    /// Exact second moment (the short-time frequency squared) where the
    /// source fixes it: Γ(γ₊+γ₋)+γ₊γ₋ for parametric, Ω₀² for coupling-derived.
    pub fn omega0_sq_hint(&self) -> Option<f64> {
        match self {
            SpectralDensity::Parametric(p) => Some(p.omega0_sq()),
            SpectralDensity::FanoDerived(f) => Some(f.omega0() * f.omega0()),
            SpectralDensity::Tabulated(_) => None,
        }
    }

    /// Scale for the semi-infinite map.
    pub(crate) fn scale(&self) -> f64 {
        match self {
            SpectralDensity::Parametric(p) => p.big_gamma.max(p.gamma_plus.norm()).max(1.0),
            SpectralDensity::FanoDerived(f) => f.peak_estimate().max(f.omega0()),
            SpectralDensity::Tabulated(t) => {
                // Weighted centre of the table is a robust scale.
                let xs = t.omega_grid();
                let ys = t.values();
                let (num, den) = xs.iter().zip(ys).fold((0.0, 0.0), |(n, d), (x, y)| (n + x * y, d + y));
                if den > 0.0 {
                    (num / den).max(xs[0]).max(1e-300)
                } else {
                    t.grid_max()
                }
            }
        }
    }

    /// Frequencies at which the integrand may have kinks or sharp structure.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match self {
            SpectralDensity::Parametric(p) => p.features(),
            SpectralDensity::FanoDerived(f) => f.breakpoints(),
            SpectralDensity::Tabulated(t) => t.omega_grid().to_vec(),
        }
    }

    /// Beyond this frequency π is smooth, so asymptotic expansions apply.
    pub(crate) fn smooth_from(&self) -> f64 {
        match self {
            SpectralDensity::Parametric(p) => 10.0 * p.max_rate(),
            SpectralDensity::FanoDerived(f) => f.smooth_from(),
            SpectralDensity::Tabulated(t) => 1.01 * t.grid_max(),
        }
    }

    /// π vanishes identically beyond this frequency (infinite if it never does).
    pub(crate) fn support_end(&self) -> f64 {
        match self {
            SpectralDensity::FanoDerived(f) => f.support_end(),
            _ => f64::INFINITY,
        }
    }

    /// `⟨⟨f(ω)⟩⟩ = ∫π(ω) f(ω) dω` to the default relative tolerance 1e-9.
    pub fn weighted_average<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64, SpectralError> {
        self.weighted_average_with(f, &QuadConfig::default())
    }

    pub fn weighted_average_with<F: Fn(f64) -> f64>(&self, f: F, cfg: &QuadConfig) -> Result<f64, SpectralError> {
        let integrand = |w: f64| {
            let p = self.eval(w);
            if p == 0.0 {
                0.0
            } else {
                p * f(w)
            }
        };
        let end = self.support_end();
        let est = if end.is_finite() {
            let pts = quad::breakpoints_in(0.0, end, &self.breakpoints());
            quad::integrate_points(integrand, &pts, cfg)?
        } else {
            quad::integrate_semi_infinite(integrand, 0.0, self.scale(), &self.breakpoints(), cfg)?
        };
        Ok(est.value)
    }

    /// Exponent `q` of the low-frequency law π(ω) ~ ω^q, estimated from two
    /// nearby small frequencies. Infinite when π vanishes there.
    pub fn low_frequency_exponent(&self) -> f64 {
        let first = self.breakpoints().into_iter().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        let base = self.scale().min(first);
        let w1 = 1e-6 * base;
        let (p1, p2) = (self.eval(w1), self.eval(2.0 * w1));
        if p1 <= 0.0 || p2 <= 0.0 {
            return if p1 == 0.0 && p2 == 0.0 && self.eval(0.0) == 0.0 { f64::INFINITY } else { 0.0 };
        }
        (p2 / p1).ln() / 2f64.ln()
    }

    /// Closed-form ⟨⟨ω⟩⟩, ⟨⟨ω⁻¹⟩⟩ and Ω₀² of a parametric density, with
    /// principal-branch complex logarithms.
    pub fn closed_form_moments(&self) -> Result<ClosedFormMoments, SpectralError> {
        let p = self.as_parametric().ok_or(SpectralError::NotParametric)?;
        p.check_distinct()?;
        let g = Complex64::new(p.big_gamma, 0.0);
        let (gp, gm) = (p.gamma_plus, p.gamma_minus);
        let den = (g - gp) * (gp - gm) * (gm - g);
        let l_mp = (gm / gp).ln();
        let l_gm = (g / gm).ln();
        let l_pg = (gp / g).ln();
        let scale = 2.0 / PI;
        let mean = (gp * gp * gm * gm * l_mp + gm * gm * g * g * l_gm + g * g * gp * gp * l_pg) / den * scale;
        let inv = (g * g * l_mp + gp * gp * l_gm + gm * gm * l_pg) / den * scale;
        for z in [mean, inv] {
            if z.im.abs() > 1e-12 * z.re.abs().max(1.0) {
                return Err(SpectralError::ImaginaryResidue(z.im));
            }
        }
        Ok(ClosedFormMoments { mean_omega: mean.re, mean_inv_omega: inv.re, omega0_sq: p.omega0_sq() })
    }

    /// Check normalisation, `π(0) = 0`, non-negativity, finiteness of the
    /// second moment and the moment inequalities. Never fails: physics
    /// violations are reported in the flags.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(&ValidationTolerances::default())
    }

    pub fn validate_with(&self, tol: &ValidationTolerances) -> ValidationReport {
        let cfg = QuadConfig::default().with_max_subdivisions(4000);
        let moment = |f: &dyn Fn(f64) -> f64| self.weighted_average_with(f, &cfg).unwrap_or(f64::INFINITY);
        let norm = moment(&|_| 1.0);
        let second = moment(&|w| w * w);
        let mean = moment(&|w| w);
        let inv = moment(&|w| 1.0 / w);
        let pi0 = self.eval(0.0);
        let scale = self.scale();
        let min_sampled = (0..10_000)
            .map(|i| {
                let w = scale * 10f64.powf(-6.0 + 12.0 * i as f64 / 9_999.0);
                self.eval(w)
            })
            .fold(f64::INFINITY, f64::min);
        let expected = self.omega0_sq_hint();
        let cs = mean * inv;
        let checks = ValidationChecks {
            normalization: (norm - 1.0).abs() <= tol.absolute,
            pi_at_zero: pi0.abs() <= tol.absolute,
            non_negative: min_sampled >= 0.0,
            second_moment_finite: second.is_finite(),
            second_moment_consistent: match expected {
                Some(e) => second.is_finite() && (second - e).abs() <= tol.second_moment_relative * e.abs(),
                None => true,
            },
            mean_below_rms: mean.is_finite() && second.is_finite() && mean * mean < second,
            cauchy_schwartz: cs.is_finite() && cs >= 1.0 - tol.absolute,
        };
        ValidationReport {
            normalization_residual: norm - 1.0,
            pi_at_zero: pi0,
            second_moment: second,
            expected_second_moment: expected,
            mean_omega: mean,
            mean_inv_omega: inv,
            cauchy_schwartz_product: cs,
            min_sampled_value: min_sampled,
            passed: checks.all(),
            checks,
        }
    }

    /// Convert to a pure table: coupling-derived densities export their
    /// adaptive grid; tabulated densities are returned unchanged; parametric
    /// densities are sampled on a logarithmic grid.
    pub fn to_tabulated(&self) -> Result<SpectralDensity, SpectralError> {
        match self {
            SpectralDensity::Tabulated(_) => Ok(self.clone()),
            SpectralDensity::FanoDerived(f) => {
                let grid = f.grid().to_vec();
                let values = grid.iter().map(|&w| f.eval(w)).collect();
                SpectralDensity::tabulated(grid, values, 4.0)
            }
            SpectralDensity::Parametric(p) => {
                let s = self.scale();
                let grid: Vec<f64> = (0..4096).map(|i| s * 10f64.powf(-5.0 + 8.0 * i as f64 / 4095.0)).collect();
                let values = grid.iter().map(|&w| p.eval(w)).collect();
                SpectralDensity::tabulated(grid, values, 4.0)
            }
        }
    }

    /// Sample `(ω, π(ω))` pairs for export; coupling-derived and tabulated
    /// densities use their own grids.
    pub fn table(&self) -> (Vec<f64>, Vec<f64>) {
        let grid = match self {
            SpectralDensity::Tabulated(t) => t.omega_grid().to_vec(),
            SpectralDensity::FanoDerived(f) => f.grid().to_vec(),
            SpectralDensity::Parametric(_) => {
                let s = self.scale();
                (0..2048).map(|i| s * 10f64.powf(-4.0 + 6.0 * i as f64 / 2047.0)).collect()
            }
        };
        let values = grid.iter().map(|&w| self.eval(w)).collect();
        (grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig2a() -> SpectralDensity {
        SpectralDensity::parametric(0.01, c(0.75, 0.0), c(0.25, 0.0)).unwrap()
    }

    fn fig2b() -> SpectralDensity {
        SpectralDensity::parametric(0.01, c(0.5, 5.0), c(0.5, -5.0)).unwrap()
    }

    #[test]
    fn parametric_normalisation_and_second_moment() {
        let sd = fig2a();
        let norm = sd.weighted_average(|_| 1.0).unwrap();
        assert!((norm - 1.0).abs() < 1e-9, "{norm}");
        let m2 = sd.weighted_average(|w| w * w).unwrap();
        assert!((m2 - 0.1975).abs() < 1e-9 * 0.1975);
        assert_eq!(sd.omega0_sq_hint(), Some(0.1975));
    }

    #[test]
    fn closed_forms_match_independent_values() {
        // Reference values from an independent arbitrary-precision evaluation.
        let cases = [
            (fig2a(), 0.2752975282701807, 11.046819180330045),
            (fig2b(), 4.731430048139376, 0.3405472161389792),
            (SpectralDensity::parametric(10.0, c(0.75, 0.0), c(0.25, 0.0)).unwrap(), 1.7320385524924445, 1.523978629409984),
            (SpectralDensity::parametric(10.0, c(0.5, 5.0), c(0.5, -5.0)).unwrap(), 5.438818471352877, 0.19894831035654175),
        ];
        for (sd, mean, inv) in cases {
            let m = sd.closed_form_moments().unwrap();
            assert!((m.mean_omega - mean).abs() < 1e-12 * mean);
            assert!((m.mean_inv_omega - inv).abs() < 1e-12 * inv);
            let qm = sd.weighted_average(|w| w).unwrap();
            let qi = sd.weighted_average(|w| 1.0 / w).unwrap();
            assert!((qm - mean).abs() < 1e-8 * mean);
            assert!((qi - inv).abs() < 1e-8 * inv);
        }
    }

    #[test]
    fn value_checks_sign_and_limits() {
        let sd = fig2a();
        assert_eq!(sd.value(0.0).unwrap(), 0.0);
        assert!(matches!(sd.value(-1.0), Err(SpectralError::NegativeFrequency(_))));
        // ω⁻⁴ decay
        let r = sd.eval(1e4) / sd.eval(2e4);
        assert!((r - 16.0).abs() < 1e-6);
        assert!(fig2b().eval(4.9) > 0.0);
    }

    #[test]
    fn rejects_unphysical_rates() {
        assert!(SpectralDensity::parametric(0.0, c(1.0, 0.0), c(0.5, 0.0)).is_err());
        assert!(SpectralDensity::parametric(1.0, c(-1.0, 0.0), c(0.5, 0.0)).is_err());
        assert!(SpectralDensity::parametric(1.0, c(0.5, 1.0), c(0.5, 2.0)).is_err());
        assert!(SpectralDensity::parametric(1.0, c(-0.5, 1.0), c(-0.5, -1.0)).is_err());
    }

    #[test]
    fn degenerate_rates_are_reported() {
        let sd = SpectralDensity::parametric(0.5, c(0.5, 0.0), c(0.25, 0.0)).unwrap();
        assert!(matches!(sd.closed_form_moments(), Err(SpectralError::DegenerateRates { .. })));
    }

    #[test]
    fn validation_of_good_and_bad_densities() {
        let report = fig2a().validate();
        assert!(report.passed, "{report:?}");
        assert!(report.cauchy_schwartz_product > 1.0);

        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let vals: Vec<f64> = grid.iter().map(|&w| 0.1 + w * (-w).exp()).collect();
        let bad = SpectralDensity::tabulated(grid, vals, 4.0).unwrap();
        let report = bad.validate();
        assert!(!report.checks.pi_at_zero);
        assert!(!report.passed);
    }

    #[test]
    fn narrow_table_nearly_saturates_cauchy_schwartz() {
        let centre = 2.0;
        let width = 1e-3;
        let grid: Vec<f64> = (0..4001).map(|i| centre - 40.0 * width + i as f64 * 2e-5).collect();
        let edge = (width / PI) / (1600.0 * width * width + width * width);
        let lorentz = |w: f64| ((width / PI) / ((w - centre).powi(2) + width * width) - edge).max(0.0);
        let raw: Vec<f64> = grid.iter().map(|&w| lorentz(w)).collect();
        let sd = SpectralDensity::tabulated(grid.clone(), raw, 40.0).unwrap();
        let norm = sd.weighted_average(|_| 1.0).unwrap();
        let vals: Vec<f64> = grid.iter().map(|&w| lorentz(w) / norm).collect();
        let sd = SpectralDensity::tabulated(grid, vals, 40.0).unwrap();
        let r = sd.validate();
        assert!(r.cauchy_schwartz_product >= 1.0 && r.cauchy_schwartz_product < 1.0 + 1e-4, "{}", r.cauchy_schwartz_product);
    }

    #[test]
    fn tabulated_hits_nodes_and_extends() {
        let sd = SpectralDensity::tabulated(vec![1.0, 2.0, 3.0], vec![0.5, 0.25, 0.1], 4.0).unwrap();
        assert_eq!(sd.eval(2.0), 0.25);
        assert!((sd.eval(6.0) - 0.1 / 16.0).abs() < 1e-15);
        assert!((sd.eval(0.5) - 0.125).abs() < 1e-15);
        assert!(SpectralDensity::tabulated(vec![1.0, 0.5], vec![0.1, 0.1], 4.0).is_err());
    }
}
