//! Quadrature engine: adaptive Gauss–Kronrod on finite and logarithmic
//! ranges, power-law end corrections, singular time integrals, Gaussian
//! convolutions by Gauss–Hermite, and half-line integrals against power
//! kernels with decaying or periodic far fields.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::QuadError;

/// A value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn new(value: f64, error: f64) -> Self {
        Self {
            value,
            error: error.abs(),
        }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate::new(self.value + rhs.value, self.error + rhs.error)
    }
}

impl AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        *self = *self + rhs;
    }
}

impl Mul<f64> for Estimate {
    type Output = Estimate;
    fn mul(self, k: f64) -> Estimate {
        Estimate::new(self.value * k, self.error * k.abs())
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::ZERO, |a, b| a + b)
    }
}

/// Tolerances, node counts and cutoffs shared by every quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub hermite_nodes: usize,
    /// Split point between the adaptive body and the analytic far-field
    /// treatment of radial integrals.
    pub tail_radius: f64,
    /// Split point of time integrals over `(0, ∞)`.
    pub t_split: f64,
    /// Radius below which a radial integrand is replaced by its fitted
    /// power law.
    pub r_min: f64,
    /// Time below which a time integrand is replaced by its fitted power law.
    pub t_min: f64,
    /// Time above which a time integrand is replaced by its fitted power law.
    pub t_max: f64,
    pub y0: f64,
    pub y_ratio: f64,
    pub y_count: usize,
    /// Explicit principal-value cutoff; `0` selects the symmetrised integrand.
    pub epsilon_pv: f64,
    pub angular_nodes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            hermite_nodes: 64,
            tail_radius: 40.0,
            t_split: 1.0,
            r_min: 1e-7,
            t_min: 1e-13,
            t_max: 1e13,
            y0: 0.1,
            y_ratio: 0.25,
            y_count: 16,
            epsilon_pv: 0.0,
            angular_nodes: 64,
        }
    }
}

impl QuadConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol * 1e-3,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("tail_radius", self.tail_radius),
            ("t_split", self.t_split),
            ("r_min", self.r_min),
            ("t_min", self.t_min),
            ("t_max", self.t_max),
            ("y0", self.y0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(QuadError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.hermite_nodes < 8 {
            return Err(QuadError::Config("hermite_nodes must be >= 8".into()));
        }
        if !(self.y_ratio > 0.0 && self.y_ratio < 1.0) {
            return Err(QuadError::Config("y_ratio must lie in (0,1)".into()));
        }
        if self.y_count < 4 {
            return Err(QuadError::Config("y_count must be >= 4".into()));
        }
        if self.epsilon_pv < 0.0 {
            return Err(QuadError::Config("epsilon_pv must be >= 0".into()));
        }
        if self.angular_nodes < 4 || self.max_subdivisions == 0 {
            return Err(QuadError::Config("angular_nodes >= 4 and max_subdivisions >= 1".into()));
        }
        Ok(())
    }

    /// Absolute target for a quantity of size `scale`.
    pub fn target(&self, scale: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * scale.abs())
    }
}

// ---------------------------------------------------------------------------
// Gauss–Kronrod 10/21

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
    0.123_491_976_262_065_851_077_208_799_216_930,
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

/// `(value, error, ∫|f|)` on `[a, b]`.
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64, f64), QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(QuadError::NonFinite(center));
    }
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadError::NonFinite(x2));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err, res_abs))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over the panels
/// delimited by the sorted `points` (at least two).
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate, QuadError> {
    if points.len() < 2 {
        return Ok(Estimate::ZERO);
    }
    let mut heap = BinaryHeap::new();
    let mut settled = Estimate::ZERO;
    let (mut total, mut total_err, mut total_abs) = (0.0, 0.0, 0.0);
    for w in points.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let (v, e, m) = gk21(&f, w[0], w[1])?;
        total += v;
        total_err += e;
        total_abs += m;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            abs: m,
        });
    }
    let mut splits = 0;
    // below 200ε ∫|f| the error estimate is rounding noise
    while total_err > abs_tol.max(rel_tol * total.abs()).max(200.0 * f64::EPSILON * total_abs) {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if (seg.b - seg.a) <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
            // cannot be refined further; keep its error in the budget
            settled += Estimate::new(seg.value, seg.error);
            continue;
        }
        if splits >= max_subdivisions {
            return Err(QuadError::NoConvergence {
                subdivisions: splits,
                value: total,
                error: total_err,
            });
        }
        splits += 1;
        let (v1, e1, m1) = gk21(&f, seg.a, mid)?;
        let (v2, e2, m2) = gk21(&f, mid, seg.b)?;
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        total_abs += m1 + m2 - seg.abs;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
            abs: m1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
            abs: m2,
        });
    }
    // re-sum to shed accumulated rounding in the running totals
    let mut out = settled;
    for s in heap.into_iter() {
        out += Estimate::new(s.value, s.error);
    }
    Ok(out)
}

/// Adaptive quadrature of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    integrate_panels(f, &[a, b], cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)
}

/// `∫_a^b f(x) dx` for `0 < a < b`, computed in the variable `ln x` with
/// unit-width initial panels plus any extra `breakpoints`.
pub fn integrate_log<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate, QuadError> {
    if !(a > 0.0) || !(b > a) {
        return Ok(Estimate::ZERO);
    }
    let (la, lb) = (a.ln(), b.ln());
    let mut pts = vec![la];
    let mut x = la.floor() + 1.0;
    while x < lb {
        if x > la {
            pts.push(x);
        }
        x += 1.0;
    }
    for &bp in breakpoints {
        if bp > a && bp < b {
            pts.push(bp.ln());
        }
    }
    pts.push(lb);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|u, v| (*u - *v).abs() < 1e-12);
    integrate_panels(
        |tau: f64| {
            let x = tau.exp();
            f(x) * x
        },
        &pts,
        abs_tol,
        rel_tol,
        max_subdivisions,
    )
}

fn fitted_exponent(f_near: f64, f_far: f64, ratio: f64) -> Option<f64> {
    if f_near == 0.0 || f_far == 0.0 || f_near.signum() != f_far.signum() {
        return None;
    }
    Some((f_far / f_near).ln() / ratio.ln())
}

/// `∫_0^{x0} f`, assuming `f(x) ≈ A x^β` on `(0, x0]`. The exponent is
/// fitted from samples at `x0` and `x0/4`.
pub fn power_head<F: Fn(f64) -> f64>(f: F, x0: f64) -> Result<Estimate, QuadError> {
    let f0 = f(x0);
    let f1 = f(0.25 * x0);
    let f2 = f(0.0625 * x0);
    if f0 == 0.0 && f1 == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let Some(beta) = fitted_exponent(f1, f0, 4.0) else {
        // no clean power law; bound by the largest sample over the interval
        return Ok(Estimate::new(0.0, x0 * f0.abs().max(f1.abs()).max(f2.abs())));
    };
    if beta <= -1.0 {
        return Err(QuadError::NonIntegrable {
            at: "origin",
            exponent: beta,
        });
    }
    let value = f0 * x0 / (beta + 1.0);
    let error = match fitted_exponent(f2, f1, 4.0) {
        Some(b2) if b2 > -1.0 => (value - f0 * x0 / (b2 + 1.0)).abs(),
        _ => value.abs(),
    };
    Ok(Estimate::new(value, error + 1e-15 * value.abs()))
}

/// `∫_{x1}^∞ f`, assuming `f(x) ≈ A x^β` beyond `x1`.
pub fn power_tail<F: Fn(f64) -> f64>(f: F, x1: f64) -> Result<Estimate, QuadError> {
    let f0 = f(x1);
    let f1 = f(4.0 * x1);
    let f2 = f(16.0 * x1);
    if f0 == 0.0 && f1 == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let Some(beta) = fitted_exponent(f0, f1, 4.0) else {
        return Ok(Estimate::new(0.0, x1 * f0.abs().max(f1.abs())));
    };
    if beta >= -1.0 {
        return Err(QuadError::Divergent(format!(
            "integrand decays like x^{beta:.4} at infinity"
        )));
    }
    let value = -f0 * x1 / (beta + 1.0);
    let error = match fitted_exponent(f1, f2, 4.0) {
        Some(b2) if b2 < -1.0 => (value + f0 * x1 / (b2 + 1.0)).abs(),
        _ => value.abs(),
    };
    Ok(Estimate::new(value, error + 1e-15 * value.abs()))
}

/// Hurwitz zeta `ζ(σ, q) = Σ_{k≥0} (q+k)^{-σ}` for `σ > 1`, `q > 0`.
pub fn hurwitz_zeta(sigma: f64, q: f64) -> f64 {
    debug_assert!(sigma > 1.0 && q > 0.0);
    const N: usize = 12;
    // B_{2j} / (2j)!
    const B_OVER_FACT: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-sigma);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - sigma) / (sigma - 1.0) + 0.5 * a.powf(-sigma);
    // rising factorial σ(σ+1)…(σ+2j) times a^{-σ-2j-1}
    let mut poch = sigma;
    let mut pw = a.powf(-sigma - 1.0);
    for (j, c) in B_OVER_FACT.iter().enumerate() {
        if j > 0 {
            let m = (2 * j) as f64;
            poch *= (sigma + m - 1.0) * (sigma + m);
            pw /= a * a;
        }
        sum += c * poch * pw;
    }
    sum
}

/// Behaviour of a radial profile `g(r)` as `r → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarField {
    /// `g(r) → limit`, with an integrable remainder.
    Decaying { limit: f64 },
    /// `g(r + period) = g(r)`.
    Periodic { period: f64 },
}

/// `∫_R^∞ g(r) r^{-1-α} dr` for `α > 0`.
///
/// Decaying profiles use the exact map `w = (R/r)^α` onto `(0, 1)`.
/// Periodic profiles fold the half-line onto one period, where the power
/// kernel sums to a Hurwitz zeta value.
pub fn power_kernel_tail<G: Fn(f64) -> f64>(
    g: G,
    radius: f64,
    alpha: f64,
    far: FarField,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate, QuadError> {
    if !(alpha > 0.0) {
        return Err(QuadError::Divergent(format!("power tail with alpha = {alpha}")));
    }
    match far {
        FarField::Decaying { limit } => {
            let scale = radius.powf(-alpha) / alpha;
            let body = integrate_panels(
                |w: f64| {
                    let r = radius * w.powf(-1.0 / alpha);
                    if r.is_finite() {
                        g(r)
                    } else {
                        limit
                    }
                },
                &[0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0],
                abs_tol / scale,
                rel_tol,
                max_subdivisions,
            )?;
            Ok(body * scale)
        }
        FarField::Periodic { period } => {
            let sigma = 1.0 + alpha;
            let pts: Vec<f64> = (0..=8).map(|k| period * k as f64 / 8.0).collect();
            integrate_panels(
                |tau: f64| {
                    g(radius + tau) * period.powf(-sigma) * hurwitz_zeta(sigma, (radius + tau) / period)
                },
                &pts,
                abs_tol,
                rel_tol,
                max_subdivisions,
            )
        }
    }
}

/// `∫_0^∞ g(r) dr / r^{1+α}` for a profile with `|g(r)| ≲ r^γ`, `γ > α`,
/// near the origin.
///
/// The origin piece below `cfg.r_min` uses the fitted power law, the body
/// is adaptive in `ln r`, and the far field beyond `cfg.tail_radius` is
/// handled by [`power_kernel_tail`]. With `cfg.epsilon_pv > 0` the origin
/// piece is dropped and the lower limit becomes that cutoff instead.
pub fn integrate_power_kernel<G: Fn(f64) -> f64>(
    g: G,
    alpha: f64,
    far: FarField,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    let radius = cfg.tail_radius.max(breakpoints.iter().cloned().fold(0.0, f64::max) * 1.5);
    let integrand = |r: f64| g(r) * r.powf(-1.0 - alpha);
    let (lower, head) = if cfg.epsilon_pv > 0.0 {
        (cfg.epsilon_pv, Estimate::ZERO)
    } else {
        let head = power_head(&integrand, cfg.r_min).map_err(|e| match e {
            QuadError::NonIntegrable { exponent, .. } => QuadError::NonIntegrable {
                at: "origin (numerator does not vanish fast enough)",
                exponent,
            },
            other => other,
        })?;
        (cfg.r_min, head)
    };
    let tail = power_kernel_tail(
        &g,
        radius,
        alpha,
        far,
        cfg.abs_tol * 0.25,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;
    let body = integrate_log(
        integrand,
        lower,
        radius,
        breakpoints,
        cfg.abs_tol * 0.5,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;
    Ok(head + body + tail)
}

/// Symmetrised radial integral `∫_0^∞ g(r) dr / r^{1+sp}` of the direct
/// definition; `g` is the angular integral of the symmetrised numerator.
pub fn integrate_radial_symmetrized<G: Fn(f64) -> f64>(
    g: G,
    sp: f64,
    far: FarField,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    integrate_power_kernel(g, sp, far, &[], cfg)
}

/// `∫_0^∞ f(t) dt / t^{1+α}`.
///
/// The body `[t_min, t_max]` is integrated in `τ = ln t`, split at
/// `t_split`; both ends use fitted power laws. A tail that does not decay
/// faster than `1/t` is reported as divergent.
pub fn integrate_time_singular<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    let integrand = |t: f64| f(t) * t.powf(-1.0 - alpha);
    let head = power_head(&integrand, cfg.t_min)?;
    let tail = power_tail(&integrand, cfg.t_max)?;
    let body = integrate_log(
        &integrand,
        cfg.t_min,
        cfg.t_max,
        &[cfg.t_split],
        cfg.abs_tol * 0.5,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?;
    Ok(head + body + tail)
}

// ---------------------------------------------------------------------------
// Gaussian rules

/// Nodes and weights of the `n`-point Gauss–Hermite rule for the weight
/// `e^{-x²}`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.855_75 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn cached_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    static H64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    if n == 64 {
        H64.get_or_init(|| gauss_hermite(64)).clone()
    } else {
        gauss_hermite(n)
    }
}

/// One-dimensional rule `(nodes, weights)` for `∫ e^{-r²} φ(r) dr`.
///
/// Gauss–Hermite while the kernel width `sigma` stays below the unit
/// feature scale of `f`; beyond that the Hermite nodes are too sparse, and
/// the weight is folded into composite Gauss–Legendre panels of width
/// `~1/sigma` on `|r| ≤ 6.5`.
fn heat_rule(sigma: f64, hermite_nodes: usize, max_panels: usize) -> (Vec<f64>, Vec<f64>) {
    if sigma <= 1.0 {
        return cached_hermite(hermite_nodes);
    }
    const HALF_WIDTH: f64 = 6.5;
    let panels = ((2.0 * HALF_WIDTH * sigma).ceil() as usize).clamp(16, max_panels);
    let (gx, gw) = gauss_legendre(16);
    let width = 2.0 * HALF_WIDTH / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 16);
    let mut weights = Vec::with_capacity(panels * 16);
    for k in 0..panels {
        let mid = -HALF_WIDTH + (k as f64 + 0.5) * width;
        for (x, w) in gx.iter().zip(&gw) {
            let r = mid + 0.5 * width * x;
            nodes.push(r);
            weights.push(0.5 * width * w * (-r * r).exp());
        }
    }
    (nodes, weights)
}

/// Heat semigroup `e^{tΔ}[f](x)` by tensor quadrature after the
/// substitution `y = x + 2√t r`. Supports `n ∈ {1, 2}`.
pub fn heat_apply<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64, QuadError> {
    if !(t > 0.0) {
        return Err(QuadError::Config(format!("heat_apply needs t > 0, got {t}")));
    }
    let sigma = 2.0 * t.sqrt();
    match x.len() {
        1 => {
            let (nodes, weights) = heat_rule(sigma, cfg.hermite_nodes, 4000);
            let mut acc = 0.0;
            for (r, w) in nodes.iter().zip(&weights) {
                acc += w * f(&[x[0] + sigma * r]);
            }
            Ok(acc / PI.sqrt())
        }
        2 => {
            let (nodes, weights) = heat_rule(sigma, cfg.hermite_nodes, 160);
            let mut acc = 0.0;
            for (r1, w1) in nodes.iter().zip(&weights) {
                for (r2, w2) in nodes.iter().zip(&weights) {
                    acc += w1 * w2 * f(&[x[0] + sigma * r1, x[1] + sigma * r2]);
                }
            }
            Ok(acc / PI)
        }
        n => Err(QuadError::Config(format!("heat_apply supports n in {{1,2}}, got {n}"))),
    }
}
