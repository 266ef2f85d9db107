//! Exact-diagonalisation model of a damped quantum harmonic oscillator.
//!
//! An oscillator of mass `m` and bare frequency Ω₀ coupled linearly to a
//! harmonic reservoir can be rewritten exactly as a continuum of uncoupled
//! dressed modes. Everything about the oscillator then follows from one
//! normalised frequency distribution, the spectral weight π(ω):
//!
//! * [`spectral`] builds and validates π (parametric, coupling-derived, or
//!   tabulated) and computes weighted averages `⟨⟨f(ω)⟩⟩`;
//! * [`fano`] derives π and the diagonalisation coefficients from a bath
//!   coupling `V(ω)`;
//! * [`states`] gives ground and thermal reduced Gaussian states;
//! * [`dynamics`] propagates mean values and classifies damping;
//! * [`bath`] handles Ohmic spectral functions and memory kernels;
//! * [`oracle`] is a finite discrete bath, diagonalised exactly, used to
//!   check continuum predictions.
//!
//! Units: ħ = k_B = 1; all rates and inverse temperatures share one
//! frequency unit.

// Negated comparisons such as `!(x > 0.0)` are used on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Quadrature nodes are quoted to full published precision.
#![allow(clippy::excessive_precision)]

pub mod bath;
pub mod dynamics;
pub mod fano;
pub mod interp;
pub mod io;
pub mod oracle;
pub mod quad;
pub mod spectral;
pub mod states;

pub use bath::{MemoryKernel, OhmicBath, SpectralFunction};
pub use dynamics::{DampingClass, EvolutionSeries};
pub use fano::{CouplingSpectrum, FanoCoefficients, FanoDensity};
pub use oracle::{CovarianceTrajectory, DiscreteBath};
pub use spectral::{SpectralDensity, ValidationReport};
pub use states::{DiagonalForm, GaussianState};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Fano(#[from] fano::FanoError),
    #[error(transparent)]
    State(#[from] states::StateError),
    #[error(transparent)]
    Dynamics(#[from] dynamics::DynamicsError),
    #[error(transparent)]
    Bath(#[from] bath::BathError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}

/// Oscillator mass together with its two natural frequencies: Ω₀ governs
/// the ultra-short-time motion and ω₀ the long-time motion.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OscillatorParams {
    pub m: f64,
    pub omega0_big: f64,
    pub omega0: f64,
}

impl OscillatorParams {
    pub fn new(m: f64, omega0_big: f64, omega0: f64) -> Result<Self, states::StateError> {
        if !(m > 0.0) {
            return Err(states::StateError::InvalidParameter(format!("mass {m} must be positive")));
        }
        if !(omega0 > 0.0 && omega0_big >= omega0) {
            return Err(states::StateError::InvalidParameter(format!(
                "need Ω₀ ≥ ω₀ > 0, got Ω₀ = {omega0_big}, ω₀ = {omega0}"
            )));
        }
        Ok(Self { m, omega0_big, omega0 })
    }
}
