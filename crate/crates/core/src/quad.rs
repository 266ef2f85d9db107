//! Adaptive Gauss–Kronrod quadrature and the specialised integrals built on it:
//! semi-infinite ranges, Cauchy principal values and Fourier-type integrals.
//!
//! Everything here is deterministic: the subdivision order depends only on the
//! integrand values, and final sums are taken in left-to-right interval order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadConfig {
    /// Target relative error of the integral.
    pub rel_tol: f64,
    /// Target absolute error of the integral.
    pub abs_tol: f64,
    /// Maximum number of bisections before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-13, max_subdivisions: 20_000 }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Result of an integration: value, error estimate and work done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge: value {value:.6e}, estimated error {error:.3e} > target {target:.3e}")]
    NonConvergence { value: f64, error: f64, target: f64 },
    #[error("integrand is not finite at x = {at:.6e}")]
    NonFinite { at: f64 },
    #[error("invalid integration range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },
}

// 21-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 10-point Gauss weights.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite { at: centre });
    }
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let x1 = centre - dx;
        let x2 = centre + dx;
        let f1 = f(x1);
        let f2 = f(x2);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite { at: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

/// Integrate `f` over `[points[0], points[last]]`, using every entry of
/// `points` as an initial breakpoint. `points` must be ascending.
pub fn integrate_points<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    if points.len() < 2 {
        return Err(QuadError::InvalidRange { a: f64::NAN, b: f64::NAN });
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut evaluations = 0;
    for w in points.windows(2) {
        if !(w[1] >= w[0]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(QuadError::InvalidRange { a: w[0], b: w[1] });
        }
        if w[1] == w[0] {
            continue;
        }
        heap.push(gk21(&f, w[0], w[1])?);
        evaluations += 21;
    }
    if heap.is_empty() {
        return Ok(Estimate { value: 0.0, error: 0.0, evaluations });
    }
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut total_err: f64 = heap.iter().map(|s| s.error).sum();
    let mut subdivisions = 0;
    while total_err > cfg.target(total) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(QuadError::NonConvergence {
                value: total,
                error: total_err,
                target: cfg.target(total),
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            return Err(QuadError::NonConvergence {
                value: total,
                error: total_err,
                target: cfg.target(total),
            });
        }
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Periodically resum to stop drift from the running updates.
        if subdivisions % 256 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(Estimate { value, error, evaluations })
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate, QuadError> {
    integrate_points(f, &[a, b], cfg)
}

/// Build a sorted breakpoint list on `[a, b]` from arbitrary interior points.
pub fn breakpoints_in(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = Vec::with_capacity(interior.len() + 2);
    pts.push(a);
    pts.extend(interior.iter().copied().filter(|&x| x > a && x < b && x.is_finite()));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Integrate `f` over `[a, ∞)` through the map `x = a + s·u/(1−u)`.
/// Interior breakpoints are given in the original variable.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    interior: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    let s = scale;
    let mapped: Vec<f64> = interior
        .iter()
        .filter(|&&x| x > a && x.is_finite())
        .map(|&x| (x - a) / (x - a + s))
        .collect();
    let pts = breakpoints_in(0.0, 1.0, &mapped);
    let g = |u: f64| {
        let one_minus = 1.0 - u;
        let x = a + s * u / one_minus;
        let jac = s / (one_minus * one_minus);
        let v = f(x);
        // Far-tail points may overflow the Jacobian while the integrand has
        // already vanished.
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    integrate_points(g, &pts, cfg)
}

/// Cauchy principal value of `∫_a^b f(y)/(x−y) dy` by singularity subtraction:
/// the smooth remainder `[f(y)−f(x)]/(x−y)` is integrated numerically and the
/// subtracted pole term contributes `f(x)·ln((x−a)/(b−x))` analytically.
/// For `x` outside `(a, b)` the ordinary integral is returned.
pub fn principal_value<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    a: f64,
    b: f64,
    interior: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    if !(b > a) {
        return Err(QuadError::InvalidRange { a, b });
    }
    if x <= a || x >= b {
        let pts = breakpoints_in(a, b, interior);
        return integrate_points(|y| f(y) / (x - y), &pts, cfg);
    }
    let fx = f(x);
    if !fx.is_finite() {
        return Err(QuadError::NonFinite { at: x });
    }
    let mut with_x = interior.to_vec();
    with_x.push(x);
    let pts = breakpoints_in(a, b, &with_x);
    let g = |y: f64| {
        let dy = x - y;
        if dy == 0.0 {
            0.0
        } else {
            (f(y) - fx) / dy
        }
    };
    let smooth = integrate_points(g, &pts, cfg)?;
    let log_term = fx * ((x - a) / (b - x)).ln();
    Ok(Estimate { value: smooth.value + log_term, ..smooth })
}

/// Gauss–Legendre nodes and weights on `[a, b]`, ascending in `x`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton's method.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = mid - half * z;
        nodes[n - 1 - i] = mid + half * z;
        weights[i] = w * half;
        weights[n - 1 - i] = w * half;
    }
    (nodes, weights)
}

/// Which trigonometric factor multiplies the integrand in a Fourier integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// Options for [`fourier_integral`].
#[derive(Debug, Clone)]
pub struct FourierOptions {
    /// Frequency beyond which the amplitude is smooth and free of sharp features.
    pub smooth_from: f64,
    /// The amplitude vanishes identically beyond this frequency, if finite.
    pub support_end: f64,
    /// Interior breakpoints of the amplitude (kinks, peaks, table nodes).
    pub breakpoints: Vec<f64>,
    /// Scale used for the semi-infinite map when `t = 0`.
    pub scale: f64,
    pub cfg: QuadConfig,
}

/// `∫_0^∞ g(ω)·trig(ωt) dω`.
///
/// The range is split at a frequency `W`: below it the integral is done on
/// panels no wider than an eighth of an oscillation period; above it the
/// integration-by-parts asymptotic series with three derivatives of `g` is
/// used. `W` grows until the last retained term is below the tolerance.
pub fn fourier_integral<G: Fn(f64) -> f64>(
    g: G,
    t: f64,
    trig: Trig,
    opts: &FourierOptions,
) -> Result<Estimate, QuadError> {
    if t == 0.0 {
        return match trig {
            Trig::Sin => Ok(Estimate { value: 0.0, error: 0.0, evaluations: 0 }),
            Trig::Cos => {
                if opts.support_end.is_finite() {
                    let pts = breakpoints_in(0.0, opts.support_end, &opts.breakpoints);
                    integrate_points(&g, &pts, &opts.cfg)
                } else {
                    integrate_semi_infinite(&g, 0.0, opts.scale, &opts.breakpoints, &opts.cfg)
                }
            }
        };
    }
    let t_abs = t.abs();
    let tail_target = 0.1 * opts.cfg.abs_tol.max(1e-15);
    let mut w = opts.smooth_from.max(32.0 / t_abs);
    let mut tail = 0.0;
    let mut tail_err = 0.0;
    let mut resolved = false;
    for _ in 0..80 {
        if w >= opts.support_end {
            w = opts.support_end;
            tail = 0.0;
            tail_err = 0.0;
            resolved = true;
            break;
        }
        let (value, last) = asymptotic_tail(&g, w, t, trig);
        if last.abs() <= tail_target {
            tail = value;
            tail_err = last.abs();
            resolved = true;
            break;
        }
        w *= 2.0;
    }
    if !resolved {
        return Err(QuadError::NonConvergence { value: f64::NAN, error: f64::INFINITY, target: tail_target });
    }
    let panel = std::f64::consts::PI / (4.0 * t_abs);
    let n_panels = (w / panel).ceil().max(1.0) as usize;
    let mut pts: Vec<f64> = (0..=n_panels).map(|k| (k as f64 * w / n_panels as f64).min(w)).collect();
    pts.extend(opts.breakpoints.iter().copied().filter(|&x| x > 0.0 && x < w));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    // Each panel may contribute its own error; spread the absolute budget.
    let cfg = opts.cfg;
    let body = match trig {
        Trig::Cos => integrate_points(|x| g(x) * (x * t).cos(), &pts, &cfg)?,
        Trig::Sin => integrate_points(|x| g(x) * (x * t).sin(), &pts, &cfg)?,
    };
    Ok(Estimate {
        value: body.value + tail,
        error: body.error + tail_err,
        evaluations: body.evaluations + 5,
    })
}

/// Integration-by-parts series for `∫_W^∞ g(ω) e^{iωt} dω`, returning the
/// requested real or imaginary part and the size of the last retained term.
fn asymptotic_tail<G: Fn(f64) -> f64>(g: &G, w: f64, t: f64, trig: Trig) -> (f64, f64) {
    let h = 2e-3 * w;
    let f0 = g(w);
    let fp1 = g(w + h);
    let fm1 = g(w - h);
    let fp2 = g(w + 2.0 * h);
    let fm2 = g(w - 2.0 * h);
    let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
    let derivs = [f0, d1, d2, d3];
    // −e^{iWt} Σ_k (−1)^k g^(k)(W) / (it)^{k+1}; (it)^{-(k+1)} = t^{-(k+1)} · (−i)^{k+1}.
    let (sw, cw) = (w * t).sin_cos();
    let mut re = 0.0;
    let mut im = 0.0;
    let mut last = 0.0;
    for (k, &dk) in derivs.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mag = sign * dk / t.powi(k as i32 + 1);
        // (−i)^{k+1}
        let (pr, pi) = match (k + 1) % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, -1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, 1.0),
        };
        // term = −(cw + i sw) · mag · (pr + i pi)
        let ar = mag * pr;
        let ai = mag * pi;
        let tr = -(cw * ar - sw * ai);
        let ti = -(cw * ai + sw * ar);
        re += tr;
        im += ti;
        last = mag;
    }
    match trig {
        Trig::Cos => (re, last),
        Trig::Sin => (im, last),
    }
}
