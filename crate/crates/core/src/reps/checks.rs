//! Independent oracles, pointwise bounds on truncated integrals, and the
//! `s → 1` limit experiment.

use serde::{Deserialize, Serialize};

use crate::constants::{constant_set, gamma, FracParams};
use crate::error::EvalError;
use crate::funcs::{p_laplacian_1d, Field, TestFunction};
use crate::quad::{integrate_log, integrate_time_singular, power_head, Estimate, QuadConfig};

use super::kernels::sphere_area;
use super::{check_point, eval_direct, Nonlinearity, Numerator, RayProfile};

/// `(-Δ)^s e^{-|x|²}` from its Fourier multiplier:
/// `4^s Γ(s+n/2)/Γ(n/2) · ₁F₁(s+n/2; n/2; -|x|²)`, summed after Kummer's
/// transformation so that the series has no cancellation.
pub fn gaussian_fractional_laplacian(s: f64, x: &[f64]) -> f64 {
    let h = 0.5 * x.len() as f64;
    let z: f64 = x.iter().map(|v| v * v).sum();
    // ₁F₁(-s; n/2; z)
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..500 {
        let kf = k as f64;
        term *= (kf - s) / (h + kf) * z / (kf + 1.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    4f64.powf(s) * gamma(s + h).unwrap() / gamma(h).unwrap() * (-z).exp() * sum
}

pub fn gaussian_fractional_laplacian_1d(s: f64, x: f64) -> f64 {
    gaussian_fractional_laplacian(s, &[x])
}

/// `C2 ∫_0^∞ (u(x) - e^{tΔ}u(x)) dt / t^{1+s}` from closed-form heat
/// images; the linear operator that every representation reduces to at
/// `p = 2`.
pub fn linear_semigroup_oracle(u: &TestFunction, x: &[f64], s: f64, cfg: &QuadConfig) -> Result<Estimate, EvalError> {
    let params = FracParams::new(u.dim(), s, 2.0)?;
    if !u.has_closed_form_heat() {
        return Err(EvalError::Unsupported(format!("{} has no closed-form heat image", u.name())));
    }
    let v = integrate_time_singular(|t| u.heat_decrement(x, t).unwrap_or(f64::NAN), s, cfg);
    Ok(v? * constant_set(&params).c2)
}

/// Outcome of a pointwise bound on the integral truncated to `|z| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub regime: &'static str,
    /// `|PV ∫_{|z|<1} Φ_p(u(x) - u(x+z)) |z|^{-n-sp} dz|`.
    pub lhs: f64,
    pub lhs_error: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.lhs - self.lhs_error <= self.rhs
    }
}

/// Checks the bound on the truncated kernel `|z|^{-n-sp} χ_{|z|<1}`.
///
/// For `p ≥ 2`: `(p-1) ‖∇u‖^{p-2} ‖D²u‖ ∫_{|z|<1} |z|^{p-n-sp} dz`.
/// For `p < 2`: `2^{2-p} ‖D²u‖^{p-1} ∫_{|z|<1} |z|^{2p-2-n-sp} dz`, from
/// `(p-1)`-Hölder continuity of `Φ_p`; only finite when `p > 2/(2-s)`.
/// Returns `None` when the right-hand side is infinite.
pub fn appendix_bound_check(
    u: &TestFunction,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Option<BoundCheck>, EvalError> {
    let n = params.n();
    let (p, sp) = (params.p(), params.sp());
    if u.dim() != n || x.len() != n || n > 2 {
        return Err(EvalError::Params("bound check needs matching n in {1,2}".into()));
    }
    let area = sphere_area(n);
    let (regime, rhs) = if p >= 2.0 {
        let moment = area / (p - sp);
        (
            "p >= 2",
            (p - 1.0) * u.grad_sup_norm().powf(p - 2.0) * u.hess_sup_norm() * moment,
        )
    } else {
        if 2.0 * p - 2.0 <= sp {
            return Ok(None);
        }
        let moment = area / (2.0 * p - 2.0 - sp);
        ("1 < p < 2", 2f64.powf(2.0 - p) * u.hess_sup_norm().powf(p - 1.0) * moment)
    };
    let v = Numerator::new(u, x, p, Nonlinearity::Odd);
    let prof = RayProfile::new(u, x, |a, b| v.symmetric(a, b), cfg.angular_nodes);
    let lhs = prof.sum(|ray| {
        let f = |r: f64| prof.g(ray, r) * r.powf(-1.0 - sp);
        let head = power_head(f, cfg.r_min)?;
        let body = integrate_log(f, cfg.r_min, 1.0, &ray.landmarks, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
        Ok::<_, EvalError>(head + body)
    })?;
    Ok(Some(BoundCheck {
        regime,
        lhs: lhs.value.abs(),
        lhs_error: lhs.error,
        rhs,
    }))
}

/// One row of the `s → 1` experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub s: f64,
    pub value: Estimate,
    pub target: f64,
    pub gap: f64,
}

/// `|(-Δ)_p^s u(x) - (-Δ_p u(x))|` along `s_list`, in the given order.
pub fn limit_experiment_s_to_1(
    u: &TestFunction,
    x: f64,
    p: f64,
    s_list: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<LimitRow>, EvalError> {
    let target = -p_laplacian_1d(u, x, p)?;
    s_list
        .iter()
        .map(|&s| {
            let params = FracParams::new(1, s, p)?;
            check_point(u, &[x], &params)?;
            let value = eval_direct(u, &[x], &params, cfg)?;
            Ok(LimitRow {
                s,
                value,
                target,
                gap: (value.value - target).abs(),
            })
        })
        .collect()
}
