//! Spectral-type fractional p-Laplacian on an interval `Ω = (0, L)`, built
//! from the Dirichlet heat semigroup, and the whole-space operator applied
//! to the zero extension for comparison.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{constant_set, FracParams};
use crate::error::{EvalError, QuadError};
use crate::funcs::{Field, RayBehaviour};
use crate::quad::{integrate_log, integrate_panels, power_head, Estimate, QuadConfig};
use crate::reps::{eval_direct_with_breakpoints, Nonlinearity, Numerator};

/// Heat-kernel quadrature spans `|r| ≤ 6.5 σ`.
const RHO_MAX: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub length: f64,
}

impl Interval {
    pub fn new(length: f64) -> Result<Self, EvalError> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(EvalError::Params(format!("interval length must be positive, got {length}")));
        }
        Ok(Self { length })
    }

    /// First Dirichlet eigenvalue `(π/L)²`.
    pub fn lambda1(&self) -> f64 {
        (PI / self.length).powi(2)
    }

    pub fn contains(&self, x: f64) -> bool {
        x > 0.0 && x < self.length
    }

    /// Below this time the image sum is used, above it the sine series.
    pub fn series_threshold(&self) -> f64 {
        self.length * self.length / 8.0
    }

    /// Smallest `M` with `M e^{-(Mπ/L)² t} ≤ tol`: the sine series beyond
    /// `M` terms is below `tol` times a geometric factor.
    pub fn series_terms(&self, t: f64, tol: f64) -> usize {
        let mut m = 1usize;
        while (m as f64) * (-(m as f64 * PI / self.length).powi(2) * t).exp() > tol {
            m += 1;
        }
        m
    }

    /// Number of image pairs on each side needed at time `t`.
    fn image_count(&self, t: f64) -> i64 {
        ((40.0 * 4.0 * t).sqrt() / (2.0 * self.length)).ceil() as i64 + 1
    }
}

fn free_kernel(z: f64, t: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// `K_Ω(t, x, y)`.
pub fn dirichlet_kernel(dom: &Interval, t: f64, x: f64, y: f64) -> f64 {
    if !(dom.contains(x) && dom.contains(y)) || !(t > 0.0) {
        return 0.0;
    }
    let l = dom.length;
    if t <= dom.series_threshold() {
        let k = dom.image_count(t);
        (-k..=k)
            .map(|j| {
                let shift = 2.0 * j as f64 * l;
                free_kernel(x - y + shift, t) - free_kernel(x + y + shift, t)
            })
            .sum::<f64>()
            .max(0.0)
    } else {
        let m = dom.series_terms(t, 1e-17);
        (1..=m)
            .map(|k| {
                let w = k as f64 * PI / l;
                (-w * w * t).exp() * (w * x).sin() * (w * y).sin()
            })
            .sum::<f64>()
            * (2.0 / l)
    }
}

/// `∫_Ω K_Ω(t, x, y) f(y) dy`.
pub fn dirichlet_heat_apply<G: Fn(f64) -> f64>(
    f: G,
    x: f64,
    t: f64,
    dom: &Interval,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    if !dom.contains(x) {
        return Err(EvalError::Params(format!("x = {x} outside (0, {})", dom.length)));
    }
    if !(t > 0.0) {
        return Err(EvalError::Params(format!("heat time must be positive, got {t}")));
    }
    let l = dom.length;
    let sigma = 2.0 * t.sqrt();
    let mut pts = vec![0.0, l, x];
    for k in [0.5, 2.0, 6.5] {
        pts.push(x - k * sigma);
        pts.push(x + k * sigma);
    }
    pts.retain(|p| (0.0..=l).contains(p));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(integrate_panels(
        |y| dirichlet_kernel(dom, t, x, y) * f(y),
        &pts,
        cfg.abs_tol,
        cfg.rel_tol,
        cfg.max_subdivisions,
    )?)
}

/// `u(y) = A exp(-1/(1 - ((y - c)/R)²))` on `|y - c| < R`, zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub const DEFAULT_RADIUS: f64 = 1.5;

    /// The bump centred in `dom` with the default radius.
    pub fn centered(dom: &Interval) -> Self {
        Self {
            center: 0.5 * dom.length,
            radius: Self::DEFAULT_RADIUS.min(0.45 * dom.length),
            amplitude: 1.0,
        }
    }

    /// `-1/(1 - z²)` at `z = (y - c)/R`, or `-∞` off the support.
    fn exponent(&self, y: f64) -> f64 {
        let z = (y - self.center) / self.radius;
        if z.abs() < 1.0 {
            -1.0 / (1.0 - z * z)
        } else {
            f64::NEG_INFINITY
        }
    }
}

impl Field for Bump {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * self.exponent(x[0]).exp()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let z = (x[0] - self.center) / self.radius;
        if z.abs() >= 1.0 {
            return vec![0.0];
        }
        let q = 1.0 - z * z;
        vec![self.amplitude * (-1.0 / q).exp() * (-2.0 * z / (q * q)) / self.radius]
    }

    fn ray(&self, _x: &[f64], _omega: &[f64]) -> RayBehaviour {
        RayBehaviour::Tends { limit: 0.0 }
    }

    fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        let (e0, e1) = (self.exponent(x[0]), self.exponent(x[0] + h[0]));
        match (e0.is_finite(), e1.is_finite()) {
            (false, false) => 0.0,
            (true, true) => {
                // e1 - e0 = (z0² - z1²) / ((1 - z0²)(1 - z1²)) without cancellation
                let z0 = (x[0] - self.center) / self.radius;
                let k = h[0] / self.radius;
                let z1 = z0 + k;
                let de = -k * (2.0 * z0 + k) / ((1.0 - z0 * z0) * (1.0 - z1 * z1));
                -self.amplitude * e0.exp() * de.exp_m1()
            }
            _ => self.amplitude * (e0.exp() - e1.exp()),
        }
    }

    fn landmarks(&self, x: &[f64], _omega: &[f64]) -> Vec<f64> {
        let d = (self.center - x[0]).abs();
        [d - self.radius, d, d + self.radius, 0.5 * self.radius]
            .into_iter()
            .filter(|r| *r > 0.0)
            .collect()
    }
}

/// `u` on `Ω`, zero outside.
pub struct ZeroExtended<'a, F: Field + ?Sized> {
    pub inner: &'a F,
    pub dom: Interval,
}

impl<F: Field + ?Sized> Field for ZeroExtended<'_, F> {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.dom.contains(x[0]) {
            self.inner.value(x)
        } else {
            0.0
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if self.dom.contains(x[0]) {
            self.inner.gradient(x)
        } else {
            vec![0.0]
        }
    }

    fn ray(&self, _x: &[f64], _omega: &[f64]) -> RayBehaviour {
        RayBehaviour::Tends { limit: 0.0 }
    }

    fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        if self.dom.contains(x[0]) && self.dom.contains(x[0] + h[0]) {
            self.inner.increment(x, h)
        } else {
            self.value(x) - self.value(&[x[0] + h[0]])
        }
    }

    fn landmarks(&self, x: &[f64], omega: &[f64]) -> Vec<f64> {
        let mut out = self.inner.landmarks(x, omega);
        out.push(x[0]);
        out.push(self.dom.length - x[0]);
        out
    }
}

/// `C2 ∫_0^∞ e^{tΔ_Ω}[Φ_p(u(x) - u(·))](x) dt / t^{1+sp/2}`.
pub fn eval_spectral<F: Field + ?Sized>(
    u: &F,
    x: f64,
    params: &FracParams,
    dom: &Interval,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    if params.n() != 1 || u.dim() != 1 {
        return Err(EvalError::Unsupported("the interval operator is one-dimensional".into()));
    }
    if !dom.contains(x) {
        return Err(EvalError::Params(format!("x = {x} outside (0, {})", dom.length)));
    }
    cfg.validate()?;
    if params.small_p_regime() {
        let g = u.gradient(&[x])[0].abs();
        if g < 1e-10 {
            return Err(EvalError::DegenerateGradient(g));
        }
    }
    let l = dom.length;
    let a = 0.5 * params.sp();
    let num = Numerator::new(u, &[x], params.p(), Nonlinearity::Odd);
    let v = |y: f64| num.of_diff(u.increment(&[x], &[y - x]));
    let near = x.min(l - x);
    let far = x.max(l - x);
    let far_sign = if l - x >= x { 1.0 } else { -1.0 };
    let mut bps: Vec<f64> = u.landmarks(&[x], &[1.0]);
    bps.retain(|r| *r > 0.0 && *r < far);
    let inner_rel = 0.1 * cfg.rel_tol;

    // image representation: free kernel around x (symmetrised where both
    // sides lie in Ω) minus the smooth remainder of the image sum
    let heat_images = |t: f64| -> Result<f64, QuadError> {
        let sigma = 2.0 * t.sqrt();
        let inner_abs = (1e-3 * cfg.abs_tol * t.powf(a)).max(1e-300);
        let reach = RHO_MAX * sigma;
        let mut rbps: Vec<f64> = bps.iter().map(|r| r / sigma).collect();
        rbps.push(1.0);
        let sym = |rho: f64| {
            let r = sigma * rho;
            let (aa, bb) = u.symmetric_increments(&[x], &[r]);
            num.symmetric(aa, bb) * (-rho * rho).exp()
        };
        let top = (near / sigma).min(RHO_MAX);
        let lo = 1e-9 * top.min(1.0);
        let mut acc = power_head(sym, lo)?.value
            + integrate_log(sym, lo, top, &rbps, inner_abs, inner_rel, cfg.max_subdivisions)?.value;
        if near < reach {
            let side = |rho: f64| v(x + far_sign * sigma * rho) * (-rho * rho).exp();
            let hi = (far / sigma).min(RHO_MAX);
            let mut pts = vec![near / sigma, hi];
            pts.extend(rbps.iter().filter(|r| **r > near / sigma && **r < hi));
            pts.sort_by(f64::total_cmp);
            acc += integrate_panels(side, &pts, inner_abs, inner_rel, cfg.max_subdivisions)?.value;
        }
        acc /= PI.sqrt();
        // remainder images, concentrated near the end points
        if near < reach + 2.0 * l {
            let k = dom.image_count(t);
            let rest = |y: f64| {
                let mut r = 0.0;
                for j in -k..=k {
                    let shift = 2.0 * j as f64 * l;
                    if j != 0 {
                        r += free_kernel(x - y + shift, t);
                    }
                    r -= free_kernel(x + y + shift, t);
                }
                r * v(y)
            };
            let mut pts = vec![0.0, l, x];
            for m in [0.5, 2.0, 6.5] {
                pts.push(m * sigma);
                pts.push(l - m * sigma);
            }
            pts.retain(|p| (0.0..=l).contains(p));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            acc += integrate_panels(rest, &pts, inner_abs, inner_rel, cfg.max_subdivisions)?.value;
        }
        Ok(acc)
    };

    // sine-series coefficients of v for the long-time part
    let t_switch = dom.series_threshold();
    let m = dom.series_terms(t_switch, 1e-3 * cfg.abs_tol);
    let mut coeff = Vec::with_capacity(m);
    let mut pts = vec![0.0, x, l];
    pts.extend(bps.iter().flat_map(|r| [x - r, x + r]).filter(|p| *p > 0.0 && *p < l));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    for k in 1..=m {
        let w = k as f64 * PI / l;
        let b = integrate_panels(|y| (w * y).sin() * v(y), &pts, 1e-3 * cfg.abs_tol, inner_rel, cfg.max_subdivisions)?;
        coeff.push((2.0 / l) * b.value * (w * x).sin());
    }
    let heat_series = |t: f64| -> f64 {
        coeff
            .iter()
            .enumerate()
            .map(|(k, c)| c * (-((k + 1) as f64 * PI / l).powi(2) * t).exp())
            .sum()
    };

    let failure = std::cell::RefCell::new(None::<QuadError>);
    let short = |t: f64| match heat_images(t) {
        Ok(h) => h * t.powf(-1.0 - a),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let long = |t: f64| heat_series(t) * t.powf(-1.0 - a);
    let t_end = 50.0 / dom.lambda1();
    let mut split = vec![cfg.t_split];
    split.retain(|t| *t > cfg.t_min && *t < t_switch);
    let total = power_head(short, cfg.t_min)?
        + integrate_log(short, cfg.t_min, t_switch, &split, 0.5 * cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?
        + integrate_log(long, t_switch, t_end, &[], 0.25 * cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    // beyond t_end every mode has decayed by e^{-50}
    let rest = coeff.first().map_or(0.0, |c| c.abs()) * (-50f64).exp() * t_end.powf(-a) / a;
    Ok((total + Estimate::new(0.0, rest)) * constant_set(params).c2)
}

/// Whole-space operator applied to the zero extension of `u` from `Ω`.
pub fn eval_restricted<F: Field + ?Sized>(
    u: &F,
    x: f64,
    params: &FracParams,
    dom: &Interval,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    if params.n() != 1 || u.dim() != 1 {
        return Err(EvalError::Unsupported("the interval operator is one-dimensional".into()));
    }
    if !dom.contains(x) {
        return Err(EvalError::Params(format!("x = {x} outside (0, {})", dom.length)));
    }
    let ext = ZeroExtended { inner: u, dom: *dom };
    eval_direct_with_breakpoints(&ext, &[x], params, cfg, &[x, dom.length - x])
}

/// Spectral, restricted and whole-space values of the centred bump at the
/// midpoint of `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub length: f64,
    pub spectral: Estimate,
    pub restricted: Estimate,
    pub whole_space: Estimate,
}

pub fn domain_study(lengths: &[f64], params: &FracParams, cfg: &QuadConfig) -> Result<Vec<SpectralRow>, EvalError> {
    lengths
        .iter()
        .map(|&l| {
            let dom = Interval::new(l)?;
            let bump = Bump::centered(&dom);
            let x = 0.5 * l;
            Ok(SpectralRow {
                length: l,
                spectral: eval_spectral(&bump, x, params, &dom, cfg)?,
                restricted: eval_restricted(&bump, x, params, &dom, cfg)?,
                whole_space: crate::reps::eval_direct(&bump, &[x], params, cfg)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::c1;
    use crate::funcs::TestFunction;

    fn p(s: f64, p: f64) -> FracParams {
        FracParams::new(1, s, p).unwrap()
    }

    #[test]
    fn eigenfunction_decays() {
        let dom = Interval::new(3.0).unwrap();
        let cfg = QuadConfig::default();
        let w = PI / 3.0;
        for &t in &[0.01, 0.5, 4.0] {
            for &x in &[0.2, 1.5, 2.9] {
                let v = dirichlet_heat_apply(|y| (w * y).sin(), x, t, &dom, &cfg).unwrap();
                let exact = (-w * w * t).exp() * (w * x).sin();
                assert!((v.value - exact).abs() < 1e-9, "t={t} x={x}: {v:?} {exact}");
            }
        }
        let late = dirichlet_heat_apply(|_| 1.0, 1.5, 200.0, &dom, &cfg).unwrap();
        assert!(late.value.abs() < 1e-9);
    }

    #[test]
    fn kernel_dominated_and_mass_deficit() {
        let dom = Interval::new(2.0).unwrap();
        let cfg = QuadConfig::default();
        for &t in &[1e-3, 0.1, 0.45, 0.6, 3.0] {
            for i in 1..20 {
                for j in 1..20 {
                    let (x, y) = (0.1 * i as f64, 0.1 * j as f64);
                    let k = dirichlet_kernel(&dom, t, x, y);
                    assert!(k >= 0.0 && k <= free_kernel(x - y, t) * (1.0 + 1e-12), "t={t} {x} {y}");
                }
            }
        }
        // both representations agree across the switch
        let t = dom.series_threshold();
        let images: f64 = (-4i64..=4)
            .map(|j| free_kernel(0.3 - 1.1 + 4.0 * j as f64, t) - free_kernel(0.3 + 1.1 + 4.0 * j as f64, t))
            .sum();
        assert!((dirichlet_kernel(&dom, t * 1.0000001, 0.3, 1.1) - images).abs() < 1e-7);
        let mut last = 1.0;
        for &t in &[0.01, 0.1, 0.5, 1.0, 5.0] {
            let m = dirichlet_heat_apply(|_| 1.0, 0.7, t, &dom, &cfg).unwrap().value;
            assert!(m <= 1.0 && m < last, "t={t}: {m}");
            last = m;
        }
    }

    #[test]
    fn constant_gives_zero() {
        let dom = Interval::new(4.0).unwrap();
        let u = TestFunction::constant(1, 0.7);
        let v = eval_spectral(&u, 1.3, &p(0.5, 3.0), &dom, &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
        let z = eval_restricted(&TestFunction::constant(1, 0.0), 1.3, &p(0.5, 3.0), &dom, &QuadConfig::default()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn spectral_below_restricted_for_bump() {
        let dom = Interval::new(4.0).unwrap();
        let bump = Bump::centered(&dom);
        let cfg = QuadConfig::default();
        for pp in [2.0, 3.0] {
            let q = p(0.5, pp);
            let sp = eval_spectral(&bump, 2.0, &q, &dom, &cfg).unwrap();
            let re = eval_restricted(&bump, 2.0, &q, &dom, &cfg).unwrap();
            assert!(sp.value > 0.0 && re.value - sp.value > 10.0 * (re.error + sp.error), "p={pp}: {sp:?} {re:?}");
        }
    }

    #[test]
    fn restricted_constant_matches_closed_form() {
        let dom = Interval::new(3.0).unwrap();
        let c = TestFunction::constant(1, 0.8);
        let q = p(0.4, 2.0);
        let cfg = QuadConfig::default();
        for &x in &[0.5, 1.5, 2.2] {
            let v = eval_restricted(&c, x, &q, &dom, &cfg).unwrap();
            let exact = 0.8 * c1(&q) * (x.powf(-0.8) + (3.0 - x).powf(-0.8)) / 0.8;
            assert!((v.value - exact).abs() < 1e-8 * exact, "x={x}: {v:?} {exact}");
            assert_eq!(eval_spectral(&c, x, &q, &dom, &cfg).unwrap().value, 0.0);
        }
    }

    #[test]
    fn reflection_symmetry_at_midpoint() {
        // a bump that is symmetric about L/2 but not centred on its own support
        let dom = Interval::new(4.0).unwrap();
        let bump = Bump::centered(&dom);
        let cfg = QuadConfig::default();
        let q = p(0.5, 2.5);
        let v = eval_spectral(&bump, 2.0, &q, &dom, &cfg).unwrap();
        let mirrored = Bump { center: 4.0 - bump.center, ..bump };
        let w = eval_spectral(&mirrored, 2.0, &q, &dom, &cfg).unwrap();
        assert!((v.value - w.value).abs() < 1e-10);
    }

    /// `1 - e^{tΔ_Ω}1(x)` as an alternating sum of boundary killings.
    fn killed_mass(x: f64, l: f64, t: f64) -> f64 {
        let z = 2.0 * t.sqrt();
        let mut acc = 0.0;
        for n in 0..10_000 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let term = libm::erfc((n as f64 * l + x) / z) + libm::erfc(((n + 1) as f64 * l - x) / z);
            acc += sign * term;
            if term < 1e-18 {
                break;
            }
        }
        acc
    }

    #[test]
    fn linear_case_matches_eigen_expansion() {
        // at p = 2 the operator is (-Δ_Ω)^s u(x) - u(x) C2 ∫ (1 - e^{tΔ_Ω}1(x)) t^{-1-s} dt
        let l = 4.0;
        let dom = Interval::new(l).unwrap();
        let bump = Bump::centered(&dom);
        let cfg = QuadConfig::default();
        for &(s, x) in &[(0.5, 2.0), (0.3, 1.4), (0.8, 2.5)] {
            let q = p(s, 2.0);
            let mut spectral = 0.0;
            for k in 1..=400 {
                let w = k as f64 * PI / l;
                let b = integrate_panels(|y| (w * y).sin() * bump.value(&[y]), &[0.5, 2.0, 3.5], 1e-16, 1e-13, 4000).unwrap();
                spectral += (2.0 / l) * b.value * (w * x).sin() * w.powf(2.0 * s);
            }
            let t_cap = 1e6;
            let kill = integrate_log(|t| killed_mass(x, l, t) * t.powf(-1.0 - s), 1e-4, t_cap, &[], 1e-14, 1e-12, 4000)
                .unwrap()
                .value
                + t_cap.powf(-s) / s;
            let c2 = constant_set(&q).c2;
            let oracle = spectral - bump.value(&[x]) * c2 * kill;
            let v = eval_spectral(&bump, x, &q, &dom, &cfg).unwrap();
            assert!((v.value - oracle).abs() < 1e-7 * oracle.abs().max(1.0), "s={s} x={x}: {v:?} vs {oracle}");
        }
    }

    #[test]
    fn approaches_whole_space_as_interval_grows() {
        let rows = domain_study(&[4.0, 8.0, 16.0], &p(0.5, 3.0), &QuadConfig::default()).unwrap();
        let gaps: Vec<f64> = rows.iter().map(|r| (r.spectral.value - r.whole_space.value).abs()).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{rows:?}");
    }
}
