//! One-dimensional interpolants on ascending grids.

use serde::{Deserialize, Serialize};

fn locate(xs: &[f64], x: f64) -> usize {
    // Index k with xs[k] <= x < xs[k+1], clamped to valid segments.
    let k = xs.partition_point(|&v| v <= x);
    k.saturating_sub(1).min(xs.len() - 2)
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson
/// slopes with the Fritsch–Butland harmonic mean). Never overshoots the data,
/// so non-negative data stays non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Panics unless `xs` is strictly ascending with at least two entries and
    /// the same length as `ys`; callers validate user input beforehand.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self { xs, ys, slopes }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Evaluate inside the grid; outside it the end segments are extended.
    pub fn eval(&self, x: f64) -> f64 {
        let k = locate(&self.xs, x);
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1
    }
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Natural cubic spline; used for smooth data where shape preservation is
/// not needed but derivative accuracy is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len());
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
        let n = xs.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the interior second derivatives.
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for i in 0..m {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..m {
                let lower = xs[i + 1] - xs[i];
                let factor = lower / diag[i - 1];
                diag[i] -= factor * upper[i - 1];
                rhs[i] -= factor * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Self { xs, ys, second }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = locate(&self.xs, x);
        let h = self.xs[k + 1] - self.xs[k];
        let a = (self.xs[k + 1] - x) / h;
        let b = (x - self.xs[k]) / h;
        a * self.ys[k]
            + b * self.ys[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h / 6.0
    }

    /// Exact integral of the spline over the whole grid.
    pub fn integral(&self) -> f64 {
        (0..self.xs.len() - 1)
            .map(|k| {
                let h = self.xs[k + 1] - self.xs[k];
                0.5 * h * (self.ys[k] + self.ys[k + 1]) - h * h * h * (self.second[k] + self.second[k + 1]) / 24.0
            })
            .sum()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let k = locate(&self.xs, x);
        let h = self.xs[k + 1] - self.xs[k];
        let a = (self.xs[k + 1] - x) / h;
        let b = (x - self.xs[k]) / h;
        (self.ys[k + 1] - self.ys[k]) / h - (3.0 * a * a - 1.0) * h * self.second[k] / 6.0
            + (3.0 * b * b - 1.0) * h * self.second[k + 1] / 6.0
    }
}
