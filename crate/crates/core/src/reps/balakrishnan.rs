//! Resolvent representation `C4 ∫_0^∞ (R_t ⋆ v_x)(x) t^{sp/2 - 1} dt`.
//!
//! Per ray, `(R_t ⋆ v)(x)` is `∫_0^∞ g(ρ/√t) W(ρ) ρ^{n-1} dρ`. For small
//! `t` the far-field value is subtracted inside the integral and its
//! contribution added analytically; a 1-D periodic profile uses the exact
//! single-period sum of the exponential kernel.

use std::cell::RefCell;

use crate::constants::{constant_set, FracParams};
use crate::error::{EvalError, QuadError};
use crate::funcs::Field;
use crate::quad::{integrate_log, power_head, power_tail, Estimate, FarField, QuadConfig};

use super::kernels::{resolvent_profile, sphere_area};
use super::{check_point, Nonlinearity, Numerator, Ray, RayProfile};

/// `W` is below `1e-19` beyond this radius.
const RHO_MAX: f64 = 45.0;

/// `∫_0^∞ (g(ρ/λ) - shift) W(ρ) ρ^{n-1} dρ` along one ray.
pub(crate) fn resolvent_ray<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    ray: &Ray,
    lambda: f64,
    shift: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<Estimate, QuadError> {
    let n = prof.dim();
    let nm1 = n as i32 - 1;
    if let (1, FarField::Periodic { period }) = (n, ray.far) {
        // (λ/2) ∫_0^T g e^{-λr} dr / (1 - e^{-λT}), in the variable r
        let reach = period.min(RHO_MAX / lambda);
        let f = |r: f64| prof.g(ray, r) * (-lambda * r).exp();
        let bps: Vec<f64> = (1..8).map(|k| period * k as f64 / 8.0).collect();
        let lo = 1e-9 * reach;
        let head = power_head(f, lo)?;
        let body = integrate_log(f, lo, reach, &bps, abs_tol, rel_tol, max_subdivisions)?;
        let norm = if reach < period { 1.0 } else { -(-lambda * period).exp_m1() };
        return Ok((head + body) * (0.5 * lambda / norm));
    }
    let f = |rho: f64| (prof.g(ray, rho / lambda) - shift) * resolvent_profile(rho, n) * rho.powi(nm1);
    let mut bps: Vec<f64> = ray.landmarks.iter().map(|r| r * lambda).collect();
    bps.push(lambda);
    bps.push(1.0);
    let lo = 1e-9 * lambda.min(1.0);
    let head = power_head(f, lo)?;
    let body = integrate_log(f, lo, RHO_MAX, &bps, abs_tol, rel_tol, max_subdivisions)?;
    Ok(head + body)
}

/// `∫_0^∞ (R_t ⋆ v)(x) t^{a-1} dt` without the constant.
pub(crate) fn radial_balakrishnan<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    a: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    let n = prof.dim();
    if prof.rays.is_empty() {
        return Ok(Estimate::ZERO);
    }
    if n != 1 && prof.has_periodic() {
        return Err(EvalError::Unsupported(
            "periodic far field in n = 2 is only supported by the direct and extension evaluators".into(),
        ));
    }
    let inner_rel = 0.1 * cfg.rel_tol;
    let failure = RefCell::new(None::<QuadError>);
    let resolvent = |t: f64, subtract: bool| -> f64 {
        let lambda = t.sqrt();
        let inner_abs = (1e-3 * cfg.abs_tol * t.powf(-a)).max(1e-300);
        let mut acc = 0.0;
        for ray in &prof.rays {
            let shift = match (subtract, ray.far) {
                (true, FarField::Decaying { limit }) => limit,
                _ => 0.0,
            };
            match resolvent_ray(prof, ray, lambda, shift, inner_abs, inner_rel, cfg.max_subdivisions) {
                Ok(v) => acc += ray.weight * v.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        acc
    };
    let weight = |t: f64| t.powf(a - 1.0);
    let outer = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
        integrate_log(f, lo, hi, &[], cfg.abs_tol * 0.25, cfg.rel_tol, cfg.max_subdivisions)
    };
    let t_split = cfg.t_split;
    let result = if prof.has_periodic() {
        let f = |t: f64| resolvent(t, false) * weight(t);
        power_head(f, cfg.t_min)?
            + outer(cfg.t_min, t_split, &f)?
            + outer(t_split, cfg.t_max, &f)?
            + power_tail(f, cfg.t_max)?
    } else {
        let limit: f64 = prof
            .rays
            .iter()
            .map(|r| match r.far {
                FarField::Decaying { limit } => r.weight * limit,
                FarField::Periodic { .. } => 0.0,
            })
            .sum::<f64>()
            / sphere_area(n);
        let near = |t: f64| resolvent(t, true) * weight(t);
        let far = |t: f64| resolvent(t, false) * weight(t);
        power_head(near, cfg.t_min)?
            + outer(cfg.t_min, t_split, &near)?
            + outer(t_split, cfg.t_max, &far)?
            + power_tail(far, cfg.t_max)?
            + Estimate::exact(limit * t_split.powf(a) / a)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(result)
}

pub fn eval_balakrishnan<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    check_point(u, x, params)?;
    cfg.validate()?;
    let v = Numerator::new(u, x, params.p(), Nonlinearity::Odd);
    let prof = RayProfile::new(u, x, |a, b| v.symmetric(a, b), cfg.angular_nodes);
    Ok(radial_balakrishnan(&prof, 0.5 * params.sp(), cfg)? * constant_set(params).c4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{catalog, TestFunction};

    fn p(n: usize, s: f64, p: f64) -> FracParams {
        FracParams::new(n, s, p).unwrap()
    }

    #[test]
    fn resolvent_of_cosine() {
        // (R_t ⋆ cos)(0) = t / (t + 1)
        let u = catalog("cosine", 1).unwrap();
        let prof = RayProfile::new(&u, &[0.0], |_, b| 2.0 * (1.0 - b), 8);
        for &t in &[1e-4f64, 0.3, 1.0, 50.0, 1e5] {
            let v = resolvent_ray(&prof, &prof.rays[0], t.sqrt(), 0.0, 1e-13, 1e-12, 2000).unwrap();
            assert!((v.value - t / (t + 1.0)).abs() < 1e-10, "t={t}: {v:?}");
        }
    }

    #[test]
    fn constant_gives_zero() {
        let u = TestFunction::constant(1, 0.4);
        let v = eval_balakrishnan(&u, &[1.0], &p(1, 0.5, 2.0), &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn cosine_multiplier() {
        let u = catalog("cosine", 1).unwrap();
        for &s in &[0.25, 0.5, 0.75] {
            let v = eval_balakrishnan(&u, &[0.0], &p(1, s, 2.0), &QuadConfig::default()).unwrap();
            assert!((v.value - 1.0).abs() < 1e-7, "s={s}: {v:?}");
        }
    }

    #[test]
    fn agrees_with_direct() {
        let cfg = QuadConfig::default();
        for name in ["gaussian", "rational_bump"] {
            let u = catalog(name, 1).unwrap();
            for &(s, pp) in &[(0.25, 3.0), (0.5, 1.5), (0.75, 2.0)] {
                let q = p(1, s, pp);
                let a = eval_balakrishnan(&u, &[0.5], &q, &cfg).unwrap();
                let b = crate::reps::eval_direct(&u, &[0.5], &q, &cfg).unwrap();
                assert!((a.value - b.value).abs() < 1e-6 * b.value.abs().max(1e-3), "{name} {s} {pp}: {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn agrees_with_direct_in_two_dimensions() {
        let cfg = QuadConfig::default();
        let u = catalog("rational_bump", 2).unwrap();
        let q = p(2, 0.5, 2.5);
        let a = eval_balakrishnan(&u, &[0.4, -0.2], &q, &cfg).unwrap();
        let b = crate::reps::eval_direct(&u, &[0.4, -0.2], &q, &cfg).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * b.value.abs(), "{a:?} {b:?}");
    }
}
