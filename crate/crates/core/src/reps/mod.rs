//! The four representations of the fractional p-Laplacian and the
//! machinery they share.
//!
//! Every evaluator works with the same numerator `v_x(y) = Φ_p(u(x) - u(y))`
//! and reduces the n-dimensional integral to half-lines `x ± rω`: the
//! symmetrised profile `g_ω(r) = v_x(x + rω) + v_x(x - rω)` is integrated
//! against a radial kernel, and the directions are averaged with the
//! midpoint rule on the half circle in 2-D.

pub mod balakrishnan;
pub mod checks;
pub mod direct;
pub mod extension;
pub mod kernels;
pub mod semigroup;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::FracParams;
use crate::error::EvalError;
use crate::funcs::{phi_p, Field, RayBehaviour};
use crate::quad::{Estimate, FarField, QuadConfig};

pub use balakrishnan::eval_balakrishnan;
pub use checks::{appendix_bound_check, limit_experiment_s_to_1, BoundCheck};
pub use direct::{eval_direct, eval_direct_with_breakpoints};
pub use extension::{eval_extension, extension_apply, extension_forms, extension_trace, ExtensionForms, ExtensionTrace};
pub use kernels::{poisson_kernel, resolvent_kernel, resolvent_profile, resolvent_profile_numeric, KernelSet};
pub use semigroup::eval_semigroup;

/// The scalar nonlinearity applied to `u(x) - u(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nonlinearity {
    /// `Φ_p(t) = |t|^{p-2} t`, for the operator.
    Odd,
    /// `|t|^p`, for the seminorm.
    Abs,
}

/// `y ↦ N(u(x) - u(y))` with `N` one of the [`Nonlinearity`] choices.
#[derive(Debug, Clone, Copy)]
pub struct Numerator {
    pub ux: f64,
    pub p: f64,
    pub kind: Nonlinearity,
}

impl Numerator {
    pub fn new<F: Field + ?Sized>(u: &F, x: &[f64], p: f64, kind: Nonlinearity) -> Self {
        Self {
            ux: u.value(x),
            p,
            kind,
        }
    }

    /// The numerator as a function of the value `u(y)`.
    #[inline]
    pub fn of_value(&self, uy: f64) -> f64 {
        self.of_diff(self.ux - uy)
    }

    /// The numerator as a function of the increment `d = u(x) - u(y)`.
    #[inline]
    pub fn of_diff(&self, d: f64) -> f64 {
        match self.kind {
            Nonlinearity::Odd => phi_p(d, self.p),
            Nonlinearity::Abs => d.abs().powf(self.p),
        }
    }

    /// `N(b - a) + N(b + a)`, the symmetrised numerator for the odd part
    /// `a` and second difference `b` of the increments; the cancellation
    /// between the two terms for `|b| ≪ |a|` is done analytically.
    #[inline]
    pub fn symmetric(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            Nonlinearity::Odd if a != 0.0 && b.abs() < 0.5 * a.abs() => {
                // |a|^{p-1} ((1 + x)^{p-1} - (1 - x)^{p-1}), x = b/|a|
                let q = self.p - 1.0;
                let x = b / a.abs();
                let (lp, lm) = (x.ln_1p(), (-x).ln_1p());
                a.abs().powf(q) * (q * lm).exp() * (q * (lp - lm)).exp_m1()
            }
            _ => self.of_diff(b - a) + self.of_diff(b + a),
        }
    }

    /// `v_x(y)`.
    pub fn at<F: Field + ?Sized>(&self, u: &F, y: &[f64]) -> f64 {
        self.of_value(u.value(y))
    }
}

/// One half-line direction of the angular decomposition.
#[derive(Debug, Clone)]
pub(crate) struct Ray {
    pub omega: [f64; 2],
    pub weight: f64,
    pub far: FarField,
    pub landmarks: Vec<f64>,
}

/// Symmetrised radial profiles about `x`: along a ray, `map(a, b)` with
/// `a`, `b` the odd part and second difference of `u(x) - u(x ± rω)`, so
/// that `map(a, b) = N(b - a) + N(b + a)` for a pointwise numerator `N`.
pub(crate) struct RayProfile<'a, F: Field + ?Sized, M: Fn(f64, f64) -> f64> {
    field: &'a F,
    x: [f64; 2],
    n: usize,
    map: M,
    pub rays: Vec<Ray>,
}

impl<'a, F: Field + ?Sized, M: Fn(f64, f64) -> f64> RayProfile<'a, F, M> {
    /// Directions on which the profile vanishes identically are dropped.
    pub fn new(field: &'a F, x: &[f64], map: M, angular_nodes: usize) -> Self {
        let n = field.dim();
        let mut xa = [0.0; 2];
        xa[..n].copy_from_slice(x);
        let ux = field.value(x);
        let dirs: Vec<([f64; 2], f64)> = if n == 1 {
            vec![([1.0, 0.0], 1.0)]
        } else {
            (0..angular_nodes)
                .map(|k| {
                    let th = (k as f64 + 0.5) * PI / angular_nodes as f64;
                    ([th.cos(), th.sin()], PI / angular_nodes as f64)
                })
                .collect()
        };
        let mut rays = Vec::with_capacity(dirs.len());
        for (omega, weight) in dirs {
            let far = match field.ray(x, &omega[..n]) {
                RayBehaviour::Tends { limit } => FarField::Decaying {
                    limit: map(0.0, ux - limit),
                },
                RayBehaviour::Periodic { period } => FarField::Periodic { period },
                RayBehaviour::Flat => {
                    let at_x = map(0.0, 0.0);
                    if at_x == 0.0 {
                        continue;
                    }
                    FarField::Decaying { limit: at_x }
                }
            };
            let mut landmarks = field.landmarks(x, &omega[..n]);
            landmarks.retain(|r| r.is_finite() && *r > 0.0);
            rays.push(Ray {
                omega,
                weight,
                far,
                landmarks,
            });
        }
        Self {
            field,
            x: xa,
            n,
            map,
            rays,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn g(&self, ray: &Ray, r: f64) -> f64 {
        let n = self.n;
        let hp = [r * ray.omega[0], r * ray.omega[1]];
        let (a, b) = self.field.symmetric_increments(&self.x[..n], &hp[..n]);
        (self.map)(a, b)
    }

    pub fn has_periodic(&self) -> bool {
        self.rays.iter().any(|r| matches!(r.far, FarField::Periodic { .. }))
    }

    /// Sum over rays of `weight · f(ray)`.
    pub fn sum<E>(&self, mut f: impl FnMut(&Ray) -> Result<Estimate, E>) -> Result<Estimate, E> {
        let mut acc = Estimate::ZERO;
        for ray in &self.rays {
            acc += f(ray)? * ray.weight;
        }
        Ok(acc)
    }
}

/// Mass of a radial profile per ray: `Σ_rays weight · ∫_0^∞ k(ρ) ρ^{n-1} dρ`
/// equals `mass_factor(n) · ∫_{R^n} k`.
#[cfg(test)]
pub(crate) fn half_sphere(n: usize) -> f64 {
    if n == 1 {
        1.0
    } else {
        PI
    }
}

/// Validates the dimension of `x` and the gradient hypothesis of the
/// small-p regime.
pub fn check_point<F: Field + ?Sized>(u: &F, x: &[f64], params: &FracParams) -> Result<(), EvalError> {
    let n = params.n();
    if u.dim() != n || x.len() != n {
        return Err(EvalError::Params(format!(
            "dimension mismatch: n = {n}, function dim {}, point dim {}",
            u.dim(),
            x.len()
        )));
    }
    if n > 2 {
        return Err(EvalError::Unsupported(format!("evaluators support n in {{1,2}}, got {n}")));
    }
    if params.small_p_regime() {
        let g = u.gradient(x).iter().map(|v| v * v).sum::<f64>().sqrt();
        if g < 1e-10 {
            return Err(EvalError::DegenerateGradient(g));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Direct,
    Semigroup,
    Extension,
    Balakrishnan,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::Direct,
        Representation::Semigroup,
        Representation::Extension,
        Representation::Balakrishnan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Direct => "direct",
            Representation::Semigroup => "semigroup",
            Representation::Extension => "extension",
            Representation::Balakrishnan => "balakrishnan",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn evaluate<F: Field + ?Sized>(
    rep: Representation,
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    match rep {
        Representation::Direct => eval_direct(u, x, params, cfg),
        Representation::Semigroup => eval_semigroup(u, x, params, cfg),
        Representation::Extension => eval_extension(u, x, params, cfg),
        Representation::Balakrishnan => eval_balakrishnan(u, x, params, cfg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepResult {
    pub rep: Representation,
    pub value: Option<Estimate>,
    pub failure: Option<String>,
}

/// Results of several representations at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub x: Vec<f64>,
    pub params: FracParams,
    pub results: Vec<RepResult>,
}

impl EvalReport {
    pub fn compute<F: Field + ?Sized>(
        u: &F,
        x: &[f64],
        params: &FracParams,
        cfg: &QuadConfig,
        reps: &[Representation],
    ) -> Self {
        let results = reps
            .iter()
            .map(|&rep| match evaluate(rep, u, x, params, cfg) {
                Ok(v) => RepResult {
                    rep,
                    value: Some(v),
                    failure: None,
                },
                Err(e) => RepResult {
                    rep,
                    value: None,
                    failure: Some(e.to_string()),
                },
            })
            .collect();
        Self {
            x: x.to_vec(),
            params: *params,
            results,
        }
    }

    pub fn get(&self, rep: Representation) -> Option<Estimate> {
        self.results.iter().find(|r| r.rep == rep).and_then(|r| r.value)
    }

    /// `|value_a - value_b|` for every pair that produced a value.
    pub fn discrepancies(&self) -> Vec<(Representation, Representation, f64)> {
        let ok: Vec<(Representation, Estimate)> =
            self.results.iter().filter_map(|r| r.value.map(|v| (r.rep, v))).collect();
        let mut out = Vec::new();
        for i in 0..ok.len() {
            for j in i + 1..ok.len() {
                out.push((ok[i].0, ok[j].0, (ok[i].1.value - ok[j].1.value).abs()));
            }
        }
        out
    }

    pub fn max_gap(&self) -> f64 {
        self.discrepancies().iter().fold(0.0, |m, d| m.max(d.2))
    }

    /// Largest pairwise gap relative to the largest magnitude.
    pub fn max_relative_gap(&self) -> f64 {
        let scale = self
            .results
            .iter()
            .filter_map(|r| r.value)
            .fold(0.0f64, |m, v| m.max(v.value.abs()));
        if scale == 0.0 {
            self.max_gap()
        } else {
            self.max_gap() / scale
        }
    }

    pub fn error_budget(&self) -> f64 {
        self.results.iter().filter_map(|r| r.value).map(|v| v.error).sum()
    }

    pub fn all_ok(&self) -> bool {
        self.results.iter().all(|r| r.value.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::catalog;

    #[test]
    fn numerator_vanishes_at_x() {
        let u = catalog("gaussian", 1).unwrap();
        let v = Numerator::new(&u, &[0.3], 3.0, Nonlinearity::Odd);
        assert_eq!(v.at(&u, &[0.3]), 0.0);
        assert!(v.at(&u, &[2.0]) > 0.0);
        let w = Numerator::new(&u, &[0.3], 3.0, Nonlinearity::Abs);
        assert!(w.at(&u, &[0.0]) > 0.0);
    }

    #[test]
    fn ray_weights_cover_half_circle() {
        let u = catalog("gaussian", 2).unwrap();
        let v = Numerator::new(&u, &[0.1, 0.2], 2.0, Nonlinearity::Odd);
        let prof = RayProfile::new(&u, &[0.1, 0.2], |a, b| v.symmetric(a, b), 64);
        let total: f64 = prof.rays.iter().map(|r| r.weight).sum();
        assert!((total - half_sphere(2)).abs() < 1e-14);
        assert_eq!(prof.g(&prof.rays[3], 0.0), 0.0);
    }

    #[test]
    fn flat_rays_are_dropped() {
        let u = catalog("cosine", 2).unwrap();
        let v = Numerator::new(&u, &[0.0, 0.0], 2.0, Nonlinearity::Odd);
        let prof = RayProfile::new(&u, &[0.0, 0.0], |a, b| v.symmetric(a, b), 8);
        assert_eq!(prof.rays.len(), 8);
        let c = crate::funcs::TestFunction::constant(1, 2.0);
        let vc = Numerator::new(&c, &[0.0], 2.0, Nonlinearity::Odd);
        let pc = RayProfile::new(&c, &[0.0], |a, b| vc.symmetric(a, b), 8);
        assert!(pc.rays.is_empty());
    }

    #[test]
    fn degenerate_gradient_refused() {
        let u = catalog("gaussian", 1).unwrap();
        let small = FracParams::new(1, 0.5, 1.3).unwrap();
        assert!(matches!(check_point(&u, &[0.0], &small), Err(EvalError::DegenerateGradient(_))));
        assert!(check_point(&u, &[0.5], &small).is_ok());
        let big = FracParams::new(1, 0.5, 3.0).unwrap();
        assert!(check_point(&u, &[0.0], &big).is_ok());
    }
}
