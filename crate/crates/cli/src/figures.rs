//! The reference trajectories of the parametric family: relaxation of
//! `⟨x(t)⟩/x₀ = c(t)` for weak and strong bath cut-offs, and the comparison
//! with the classical damped oscillator.

use num_complex::Complex64;

use dampo_core::dynamics::{self, EvolutionSeries};
use dampo_core::quad::QuadConfig;
use dampo_core::spectral::{ParametricDensity, SpectralDensity};

use crate::svg::{self, Curve};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    #[value(name = "2a")]
    WeakCutoffReal,
    #[value(name = "2b")]
    WeakCutoffComplex,
    #[value(name = "3a")]
    StrongCutoffReal,
    #[value(name = "3b")]
    StrongCutoffComplex,
    #[value(name = "4")]
    ClassicalComparison,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::WeakCutoffReal,
        FigureId::WeakCutoffComplex,
        FigureId::StrongCutoffReal,
        FigureId::StrongCutoffComplex,
        FigureId::ClassicalComparison,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            FigureId::WeakCutoffReal => "2a",
            FigureId::WeakCutoffComplex => "2b",
            FigureId::StrongCutoffReal => "3a",
            FigureId::StrongCutoffComplex => "3b",
            FigureId::ClassicalComparison => "4",
        }
    }

    /// `(Γ, γ₊, γ₋)`.
    pub fn parameters(&self) -> (f64, Complex64, Complex64) {
        let real = (Complex64::new(0.75, 0.0), Complex64::new(0.25, 0.0));
        let complex = (Complex64::new(0.5, 5.0), Complex64::new(0.5, -5.0));
        match self {
            FigureId::WeakCutoffReal => (0.01, real.0, real.1),
            FigureId::WeakCutoffComplex => (0.01, complex.0, complex.1),
            FigureId::StrongCutoffReal | FigureId::ClassicalComparison => (10.0, real.0, real.1),
            FigureId::StrongCutoffComplex => (10.0, complex.0, complex.1),
        }
    }

    /// Sampling grid `(stop, points)` starting at zero.
    pub fn window(&self) -> (f64, usize) {
        match self {
            FigureId::ClassicalComparison => (5.0, 501),
            _ => (20.0, 801),
        }
    }

    pub fn density(&self) -> SpectralDensity {
        let (g, gp, gm) = self.parameters();
        SpectralDensity::parametric(g, gp, gm).expect("reference parameters are valid")
    }

    pub fn title(&self) -> String {
        match self {
            FigureId::ClassicalComparison => "relaxation of <x>/x0 against the classical damped oscillator".into(),
            _ => format!("relaxation of <x>/x0, set {}", self.tag()),
        }
    }
}

fn fmt_rate(z: Complex64) -> String {
    if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) }
}

pub struct Figure {
    pub id: FigureId,
    pub times: Vec<f64>,
    /// Kernels by quadrature.
    pub quadrature: EvolutionSeries,
    /// Kernels from the residue closed forms.
    pub closed_form: EvolutionSeries,
    /// Classical comparison curve (figure 4 only).
    pub classical: Option<Vec<f64>>,
    pub stamp: Vec<String>,
}

impl Figure {
    pub fn parametric(&self) -> ParametricDensity {
        self.id.density().as_parametric().cloned().expect("parametric")
    }

    /// Largest `|quadrature − closed form|` over c, s and d.
    pub fn max_closed_form_deviation(&self) -> f64 {
        let q = &self.quadrature;
        let c = &self.closed_form;
        [(&q.c, &c.c), (&q.s, &c.s), (&q.d, &c.d)]
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn csv(&self) -> Result<String, CliError> {
        let mut comments = self.stamp.clone();
        comments.push(format!("max |quadrature - closed form| over c, s, d = {:.3e}", self.max_closed_form_deviation()));
        let mut names = vec!["t", "c", "s", "d", "c_closed_form"];
        let mut cols: Vec<&[f64]> = vec![&self.times, &self.quadrature.c, &self.quadrature.s, &self.quadrature.d, &self.closed_form.c];
        if let Some(cl) = &self.classical {
            names.push("c_classical");
            cols.push(cl);
        }
        let mut buf = Vec::new();
        dampo_core::io::write_columns(&mut buf, &comments, &names, &cols).map_err(dampo_core::Error::from)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    pub fn svg(&self) -> String {
        let mut curves = vec![Curve { label: "c(t)", values: &self.quadrature.c, dashed: false }];
        if let Some(cl) = &self.classical {
            curves.push(Curve { label: "classical", values: cl, dashed: true });
        }
        svg::line_plot(&self.id.title(), &self.stamp, "t", "<x(t)>/x0", &self.times, &curves)
    }
}

/// Compute one reference figure.
pub fn generate(id: FigureId, cfg: &QuadConfig) -> Result<Figure, CliError> {
    let sd = id.density();
    let (stop, points) = id.window();
    let times: Vec<f64> = (0..points).map(|i| stop * i as f64 / (points - 1) as f64).collect();
    let quadrature = dynamics::kernels_with(&sd, &times, cfg).map_err(dampo_core::Error::from)?;
    let closed_form = dynamics::closed_form_kernels(&sd, &times).map_err(dampo_core::Error::from)?;
    let par = sd.as_parametric().expect("parametric");
    let classical = (id == FigureId::ClassicalComparison).then(|| dynamics::classical_comparison(par, &times));
    let (g, gp, gm) = id.parameters();
    let stamp = vec![
        format!("dampo {} figure {}", env!("CARGO_PKG_VERSION"), id.tag()),
        format!("Gamma = {g}, gamma_plus = {}, gamma_minus = {}", fmt_rate(gp), fmt_rate(gm)),
        format!("Omega0^2 = {:.12e}, classical omega0^2 = {:.12e}", par.omega0_sq(), par.classical_omega0_sq()),
        format!("t in [0, {stop}] with {points} samples; x0 = 1, p0 = 0"),
        format!("quadrature rel_tol = {:e}, abs_tol = {:e}", cfg.rel_tol, cfg.abs_tol),
    ];
    Ok(Figure { id, times, quadrature, closed_form, classical, stamp })
}

/// Number of interior local extrema of a sampled curve.
pub fn count_extrema(values: &[f64]) -> usize {
    values.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_counting() {
        let v: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).cos()).collect();
        // cos on [0, 19.9] has interior extrema at π, 2π, ..., 6π.
        assert_eq!(count_extrema(&v), 6);
    }

    #[test]
    fn tags_round_trip() {
        use clap::ValueEnum;
        for id in FigureId::ALL {
            assert_eq!(FigureId::from_str(id.tag(), false).unwrap(), id);
        }
    }
}
