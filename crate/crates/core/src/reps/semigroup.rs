//! Heat-semigroup representation `C2 ∫_0^∞ e^{tΔ}[v_x](x) dt / t^{1+sp/2}`.
//!
//! The heat image at `x` is computed per ray as
//! `π^{-n/2} ∫_0^∞ g(σρ) e^{-ρ²} ρ^{n-1} dρ` with `σ = 2√t`. For large `t`
//! the far-field value is subtracted inside the integral and its
//! contribution to the time integral is added analytically.

use std::f64::consts::PI;

use crate::constants::{constant_set, ln_gamma, FracParams};
use crate::error::{EvalError, QuadError};
use crate::funcs::Field;
use crate::quad::{integrate_log, integrate_panels, power_head, power_tail, Estimate, FarField, QuadConfig};

use super::{check_point, Nonlinearity, Numerator, Ray, RayProfile};

/// Heat-kernel quadrature spans `ρ ≤ 6.5`, where `e^{-ρ²} < 5e-19`.
const RHO_MAX: f64 = 6.5;

/// `π^{-n/2} ∫_0^∞ ρ^{n-1} e^{-ρ²} dρ`, the heat mass carried by one ray.
pub(crate) fn ray_heat_mass(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    0.5 * ln_gamma(h).unwrap().exp() / PI.powf(h)
}

/// `π^{-n/2} ∫_0^∞ (g(σρ) - shift) e^{-ρ²} ρ^{n-1} dρ` along one ray.
pub(crate) fn heat_ray<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    ray: &Ray,
    sigma: f64,
    shift: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate, QuadError> {
    let n = prof.dim();
    let nm1 = n as i32 - 1;
    let f = |rho: f64| (prof.g(ray, sigma * rho) - shift) * (-rho * rho).exp() * rho.powi(nm1);
    let mut bps: Vec<f64> = ray.landmarks.iter().map(|r| r / sigma).collect();
    bps.push(1.0 / sigma);
    bps.push(1.0);
    let lo = 1e-9 * (1.0 / sigma).min(1.0);
    let head = power_head(f, lo)?;
    let body = integrate_log(f, lo, RHO_MAX, &bps, abs_tol, rel_tol, max_subdivisions)?;
    Ok((head + body) * PI.powf(-0.5 * n as f64))
}

/// Mean of `g` over one period.
pub(crate) fn periodic_mean<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    ray: &Ray,
    period: f64,
) -> Result<f64, QuadError> {
    let pts: Vec<f64> = (0..=8).map(|k| period * k as f64 / 8.0).collect();
    Ok(integrate_panels(|r| prof.g(ray, r), &pts, 1e-13 * period, 1e-13, 2000)?.value / period)
}

/// Beyond this time the 1-D heat image of a `period`-periodic profile
/// equals its mean up to `e^{-40}`.
pub(crate) fn periodic_cap(period: f64) -> f64 {
    40.0 * (period / (2.0 * PI)).powi(2)
}

/// `∫_0^∞ e^{tΔ}[v](x) dt / t^{1+a}` without the constant, for the
/// profile `prof` of `v`.
pub(crate) fn radial_semigroup<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    a: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    let n = prof.dim();
    if prof.rays.is_empty() {
        return Ok(Estimate::ZERO);
    }
    let inner_rel = 0.1 * cfg.rel_tol;
    let inner_abs = |t: f64| (1e-3 * cfg.abs_tol * t.powf(a)).max(1e-300);
    let heat = |t: f64, subtract: bool| -> Result<f64, QuadError> {
        let sigma = 2.0 * t.sqrt();
        let mut acc = 0.0;
        for ray in &prof.rays {
            let shift = match (subtract, ray.far) {
                (true, FarField::Decaying { limit }) => limit,
                _ => 0.0,
            };
            acc += ray.weight
                * heat_ray(prof, ray, sigma, shift, inner_abs(t), inner_rel, cfg.max_subdivisions)?.value;
        }
        Ok(acc)
    };
    // quadrature closures cannot return errors; stash the first one
    let failure = std::cell::RefCell::new(None::<QuadError>);
    let guarded = |t: f64, subtract: bool| -> f64 {
        match heat(t, subtract) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let weight = |t: f64| t.powf(-1.0 - a);
    let t_split = cfg.t_split;
    let outer = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        integrate_log(f, lo, hi, &[], cfg.abs_tol * 0.25, cfg.rel_tol, cfg.max_subdivisions)
    };

    let result = if prof.has_periodic() {
        if n != 1 {
            return Err(EvalError::Unsupported(
                "periodic far field in n = 2 is only supported by the direct and extension evaluators".into(),
            ));
        }
        let ray = &prof.rays[0];
        let FarField::Periodic { period } = ray.far else { unreachable!() };
        let mean = ray.weight * periodic_mean(prof, ray, period)? * ray_heat_mass(1);
        let cap = periodic_cap(period).max(2.0 * t_split);
        let f = |t: f64| guarded(t, false) * weight(t);
        let head = power_head(f, cfg.t_min)?;
        let body = outer(cfg.t_min, t_split, &f)? + outer(t_split, cap, &f)?;
        head + body + Estimate::exact(mean * cap.powf(-a) / a)
    } else {
        let limit: f64 = prof
            .rays
            .iter()
            .map(|r| match r.far {
                FarField::Decaying { limit } => r.weight * limit,
                FarField::Periodic { .. } => 0.0,
            })
            .sum::<f64>()
            * ray_heat_mass(n);
        let near = |t: f64| guarded(t, false) * weight(t);
        let far = |t: f64| guarded(t, true) * weight(t);
        let head = power_head(near, cfg.t_min)?;
        let body = outer(cfg.t_min, t_split, &near)?;
        let mid = outer(t_split, cfg.t_max, &far)?;
        let tail = power_tail(far, cfg.t_max)?;
        head + body + mid + tail + Estimate::exact(limit * t_split.powf(-a) / a)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(result)
}

pub fn eval_semigroup<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    check_point(u, x, params)?;
    cfg.validate()?;
    let v = Numerator::new(u, x, params.p(), Nonlinearity::Odd);
    let prof = RayProfile::new(u, x, |a, b| v.symmetric(a, b), cfg.angular_nodes);
    Ok(radial_semigroup(&prof, 0.5 * params.sp(), cfg)? * constant_set(params).c2)
}
