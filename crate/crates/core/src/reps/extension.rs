//! Extension representation: the limit as `y → 0` of
//! `C1 ∫ v_x(ξ) (|x - ξ|² + y²)^{-(n+sp)/2} dξ`, plus the extension
//! operator itself in its Poisson and subordinated forms.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::constants::{c1, gamma, FracParams};
use crate::error::{EvalError, QuadError};
use crate::funcs::Field;
use crate::quad::{
    integrate_log, integrate_time_singular, power_head, power_kernel_tail, Estimate, FarField, QuadConfig,
};

use super::kernels::poisson_kernel;
use super::semigroup::{heat_ray, periodic_cap, periodic_mean, ray_heat_mass};
use super::{check_point, Nonlinearity, Numerator, Ray, RayProfile};

/// `∫_0^∞ g(r) r^{n-1} (r² + y²)^{-(n+sp)/2} dr` along one ray.
pub(crate) fn extension_ray<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    ray: &Ray,
    y: f64,
    sp: f64,
    cfg: &QuadConfig,
) -> Result<Estimate, QuadError> {
    let nf = prof.dim() as f64;
    let m = 0.5 * (nf + sp);
    let radius = cfg
        .tail_radius
        .max(ray.landmarks.iter().cloned().fold(0.0, f64::max) * 1.5);
    let f = |r: f64| prof.g(ray, r) * r.powf(nf - 1.0) * (r * r + y * y).powf(-m);
    let lo = cfg.r_min.min(1e-3 * y);
    let mut bps = ray.landmarks.clone();
    bps.push(y);
    let head = power_head(f, lo)?;
    let body = integrate_log(f, lo, radius, &bps, cfg.abs_tol * 0.5, cfg.rel_tol, cfg.max_subdivisions)?;
    // beyond R: r^{n-1}(r²+y²)^{-m} = r^{-1-sp} (1 + y²/r²)^{-m}
    let tail = match ray.far {
        FarField::Decaying { .. } => power_kernel_tail(
            |r: f64| prof.g(ray, r) * (1.0 + y * y / (r * r)).powf(-m),
            radius,
            sp,
            ray.far,
            cfg.abs_tol * 0.25,
            cfg.rel_tol,
            cfg.max_subdivisions,
        )?,
        FarField::Periodic { .. } => {
            // binomial series in (y/r)², four terms suffice for y ≪ R
            let mut acc = Estimate::ZERO;
            let mut coef = 1.0;
            for k in 0..4 {
                if k > 0 {
                    coef *= -(m + k as f64 - 1.0) / k as f64;
                }
                let t = power_kernel_tail(
                    |r: f64| prof.g(ray, r),
                    radius,
                    sp + 2.0 * k as f64,
                    ray.far,
                    cfg.abs_tol * 0.05,
                    cfg.rel_tol,
                    cfg.max_subdivisions,
                )?;
                acc += t * (coef * y.powi(2 * k as i32));
            }
            let next = (m + 3.0) / 4.0 * (y / radius).powi(8);
            acc + Estimate::new(0.0, next * acc.value.abs())
        }
    };
    Ok(head + body + tail)
}

/// The sampled sequence and its extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionTrace {
    pub ys: Vec<f64>,
    pub values: Vec<Estimate>,
    /// Exponents `e_k` of the model `E(y) = E(0) + Σ b_k y^{e_k}`.
    pub exponents: Vec<f64>,
    pub limit: Estimate,
}

/// Exponents of `E(y) - E(0)`. With `g(r) ~ r^γ` at the origin the local
/// part contributes `y^{γ-sp}, y^{γ-sp+2}, …` and the smooth remainder
/// `y², y⁴, …`; `γ = p` when `∇u(x) ≠ 0`, else `2p - 2`.
fn model_exponents(params: &FracParams, gradient_vanishes: bool) -> Vec<f64> {
    let p = params.p();
    let gamma_r = if gradient_vanishes { 2.0 * p - 2.0 } else { p };
    let k = gamma_r - params.sp();
    let mut e = vec![k, 2.0, k + 2.0, 4.0, k + 4.0];
    e.sort_by(f64::total_cmp);
    e.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    e
}

/// Value at `y = 0` of the interpolant `c0 + Σ_k c_k y^{e_k}` through the
/// last `exps.len() + 1` samples.
fn richardson(ys: &[f64], vals: &[f64], exps: &[f64]) -> f64 {
    let m = exps.len() + 1;
    let start = ys.len() - m;
    let scale = ys[start];
    let mut a = vec![vec![0.0; m + 1]; m];
    for (i, row) in a.iter_mut().enumerate() {
        let y = ys[start + i] / scale;
        row[0] = 1.0;
        for (k, e) in exps.iter().enumerate() {
            row[k + 1] = y.powf(*e);
        }
        row[m] = vals[start + i];
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        for i in 0..m {
            if i != col {
                let f = a[i][col] / a[col][col];
                for j in col..=m {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    a[0][m] / a[0][0]
}

/// Samples `E(y)` along the configured geometric sequence and
/// extrapolates to `y = 0`.
pub fn extension_trace<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<ExtensionTrace, EvalError> {
    check_point(u, x, params)?;
    cfg.validate()?;
    let sp = params.sp();
    let c = c1(params);
    let v = Numerator::new(u, x, params.p(), Nonlinearity::Odd);
    let prof = RayProfile::new(u, x, |a, b| v.symmetric(a, b), cfg.angular_nodes);
    let ys: Vec<f64> = (0..cfg.y_count).map(|j| cfg.y0 * cfg.y_ratio.powi(j as i32)).collect();
    let mut values = Vec::with_capacity(ys.len());
    for &y in &ys {
        values.push(prof.sum(|ray| extension_ray(&prof, ray, y, sp, cfg))? * c);
    }
    let grad = u.gradient(x).iter().map(|g| g * g).sum::<f64>().sqrt();
    let exponents = model_exponents(params, grad < 1e-8);
    let raw: Vec<f64> = values.iter().map(|e| e.value).collect();
    let noise = values.iter().fold(0.0f64, |m, e| m.max(e.error));
    let r1 = richardson(&ys, &raw, &exponents[..1]);
    let r2 = richardson(&ys, &raw, &exponents[..2]);
    let r3 = richardson(&ys, &raw, &exponents[..3]);
    // sensitivity of the two-term eliminant to sample noise
    let q = cfg.y_ratio.powf(exponents[0]);
    let amplification = 4.0 / (1.0 - q).max(1e-3);
    let limit = Estimate::new(r2, (r2 - r1).abs() + (r3 - r2).abs() + amplification * noise);
    if !limit.value.is_finite() || limit.error > 1e-3 * limit.value.abs().max(1e-3) {
        return Err(EvalError::Extrapolation(format!(
            "y -> 0 extrapolation unsettled: value {} error {}",
            limit.value, limit.error
        )));
    }
    Ok(ExtensionTrace {
        ys,
        values,
        exponents,
        limit,
    })
}

pub fn eval_extension<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    Ok(extension_trace(u, x, params, cfg)?.limit)
}

/// Both forms of the extension `E[f](x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionForms {
    pub poisson: Estimate,
    pub subordinated: Estimate,
}

/// The extension of `f` computed as a Poisson convolution and through
/// heat subordination.
pub fn extension_forms<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    y: f64,
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<ExtensionForms, EvalError> {
    if !(y > 0.0) {
        return Err(EvalError::Params(format!("extension height must be positive, got {y}")));
    }
    let n = params.n();
    if f.dim() != n || x.len() != n {
        return Err(EvalError::Params("dimension mismatch".into()));
    }
    let sp = params.sp();
    let a = 0.5 * sp;
    let fx = f.value(x);
    let prof = RayProfile::new(f, x, |_, b| 2.0 * (fx - b), cfg.angular_nodes);
    // P(r, y) = P(0, 1) y^{sp} (r² + y²)^{-(n+sp)/2}
    let origin = vec![0.0; n];
    let pc = poisson_kernel(&origin, 1.0, params) * y.powf(sp);
    let poisson = prof.sum(|ray| extension_ray(&prof, ray, y, sp, cfg))? * pc;

    let periodic = prof.has_periodic();
    if periodic && n != 1 {
        return Err(EvalError::Unsupported(
            "subordinated extension of a periodic profile needs n = 1".into(),
        ));
    }
    // a 1-D periodic heat image settles to the period mean, whose
    // contribution is Γ(a) (4/y²)^a exactly
    let mean = match prof.rays.first().map(|r| r.far) {
        Some(FarField::Periodic { period }) if periodic => {
            let ray = &prof.rays[0];
            ray.weight * periodic_mean(&prof, ray, period)? * ray_heat_mass(1)
        }
        _ => 0.0,
    };
    let failure = RefCell::new(None::<QuadError>);
    let heat = |t: f64| -> f64 {
        let sigma = 2.0 * t.sqrt();
        let mut acc = 0.0;
        for ray in &prof.rays {
            match heat_ray(&prof, ray, sigma, 0.0, 1e-3 * cfg.abs_tol * t.powf(a), 0.1 * cfg.rel_tol, cfg.max_subdivisions) {
                Ok(v) => acc += ray.weight * v.value,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                }
            }
        }
        (acc - mean) * (-y * y / (4.0 * t)).exp()
    };
    let tcfg = QuadConfig {
        t_split: (y * y).max(1e-6),
        ..cfg.clone()
    };
    let sub = if periodic {
        let FarField::Periodic { period } = prof.rays[0].far else { unreachable!() };
        let cap = periodic_cap(period).max(2.0 * tcfg.t_split);
        let f = |t: f64| heat(t) * t.powf(-1.0 - a);
        power_head(f, tcfg.t_min)?
            + integrate_log(f, tcfg.t_min, cap, &[tcfg.t_split], cfg.abs_tol * 0.5, cfg.rel_tol, cfg.max_subdivisions)?
            + Estimate::exact(mean * gamma(a)? * (4.0 / (y * y)).powf(a))
    } else {
        integrate_time_singular(heat, a, &tcfg)?
    };
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    let subordinated = sub * (y.powf(sp) / (2f64.powf(sp) * gamma(a)?));
    Ok(ExtensionForms { poisson, subordinated })
}

/// `E[f](x, y)` by Poisson convolution, checked against the subordinated
/// form.
pub fn extension_apply<F: Field + ?Sized>(
    f: &F,
    x: &[f64],
    y: f64,
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    let forms = extension_forms(f, x, y, params, cfg)?;
    let gap = (forms.poisson.value - forms.subordinated.value).abs();
    let allowed = 10.0 * (forms.poisson.error + forms.subordinated.error)
        + 1e3 * cfg.rel_tol * forms.poisson.value.abs().max(1.0);
    if gap > allowed {
        return Err(EvalError::Mismatch(format!(
            "Poisson form {} vs subordinated form {} (gap {gap:e})",
            forms.poisson.value, forms.subordinated.value
        )));
    }
    Ok(forms.poisson)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{catalog, RayBehaviour, TestFunction};

    fn p(n: usize, s: f64, p: f64) -> FracParams {
        FracParams::new(n, s, p).unwrap()
    }

    #[test]
    fn richardson_recovers_model() {
        let exps = [0.4, 2.0, 2.4];
        let ys: Vec<f64> = (0..10).map(|j| 0.1 * 0.25f64.powi(j)).collect();
        let vals: Vec<f64> = ys.iter().map(|y| 1.5 - 2.0 * y.powf(0.4) + 0.3 * y * y).collect();
        assert!((richardson(&ys, &vals, &exps[..2]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_gives_zero() {
        let u = TestFunction::constant(1, 5.0);
        let v = eval_extension(&u, &[0.0], &p(1, 0.5, 3.0), &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn cosine_multiplier() {
        let u = catalog("cosine", 1).unwrap();
        for &s in &[0.25, 0.5, 0.75] {
            let v = eval_extension(&u, &[0.0], &p(1, s, 2.0), &QuadConfig::default()).unwrap();
            assert!((v.value - 1.0).abs() < 1e-6, "s={s}: {v:?}");
        }
    }

    #[test]
    fn small_p_regime_matches_direct() {
        let u = catalog("gaussian", 1).unwrap();
        let q = p(1, 0.9, 1.5);
        let cfg = QuadConfig::default();
        let a = eval_extension(&u, &[0.5], &q, &cfg).unwrap();
        let b = crate::reps::eval_direct(&u, &[0.5], &q, &cfg).unwrap();
        assert!((a.value - b.value).abs() < 1e-6 * b.value.abs(), "{a:?} {b:?}");
    }

    #[test]
    fn extension_of_one_is_one() {
        let one = TestFunction::constant(1, 1.0);
        let cfg = QuadConfig::default();
        for &y in &[0.05, 1.0, 7.0] {
            let e = extension_apply(&one, &[0.3], y, &p(1, 0.5, 3.0), &cfg).unwrap();
            assert!((e.value - 1.0).abs() < 1e-8, "y={y}: {e:?}");
        }
    }

    #[test]
    fn extension_of_cosine_decreases() {
        let u = catalog("cosine", 1).unwrap();
        let q = p(1, 0.75, 2.0);
        let cfg = QuadConfig::default();
        let mut last = f64::INFINITY;
        for &y in &[0.01, 0.1, 0.5, 1.0, 3.0] {
            let e = extension_apply(&u, &[0.0], y, &q, &cfg).unwrap().value;
            assert!(e < last && e > 0.0, "y={y}");
            last = e;
        }
    }

    /// Smooth bump vanishing on `|y| ≤ 1`.
    struct FarBump;
    impl Field for FarBump {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            let d = x[0].abs() - 3.0;
            if d.abs() < 1.0 {
                (-1.0 / (1.0 - d * d)).exp()
            } else {
                0.0
            }
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            vec![0.0]
        }
        fn ray(&self, _x: &[f64], _omega: &[f64]) -> RayBehaviour {
            RayBehaviour::Tends { limit: 0.0 }
        }
        fn landmarks(&self, _x: &[f64], _omega: &[f64]) -> Vec<f64> {
            vec![2.0, 3.0, 4.0]
        }
    }

    #[test]
    fn locally_vanishing_data_has_vanishing_trace() {
        let q = p(1, 0.5, 2.0);
        let cfg = QuadConfig::default();
        let mut last = f64::INFINITY;
        for &y in &[1.0, 0.1, 0.01, 0.001] {
            let e = extension_apply(&FarBump, &[0.0], y, &q, &cfg).unwrap().value;
            assert!(e >= 0.0 && e < last, "y={y}");
            last = e;
        }
        assert!(last < 1e-3);
    }
}
