//! Principal-value definition `C1 PV∫ Φ_p(u(x) - u(y)) |x - y|^{-n-sp} dy`.

use crate::constants::{c1, FracParams};
use crate::error::EvalError;
use crate::funcs::Field;
use crate::quad::{integrate_power_kernel, Estimate, QuadConfig};

use super::{check_point, Nonlinearity, Numerator, RayProfile};

/// `Σ_rays weight · ∫_0^∞ g_ω(r) r^{-1-sp} dr` without the constant.
pub(crate) fn radial_direct<F: Field + ?Sized, M: Fn(f64, f64) -> f64>(
    prof: &RayProfile<'_, F, M>,
    sp: f64,
    extra_breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    prof.sum(|ray| {
        let mut bps = ray.landmarks.clone();
        bps.extend_from_slice(extra_breakpoints);
        integrate_power_kernel(|r| prof.g(ray, r), sp, ray.far, &bps, cfg).map_err(EvalError::from)
    })
}

pub fn eval_direct<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
) -> Result<Estimate, EvalError> {
    eval_direct_with_breakpoints(u, x, params, cfg, &[])
}

/// As [`eval_direct`], with extra radial breakpoints (e.g. distances to
/// jumps of a zero extension).
pub fn eval_direct_with_breakpoints<F: Field + ?Sized>(
    u: &F,
    x: &[f64],
    params: &FracParams,
    cfg: &QuadConfig,
    breakpoints: &[f64],
) -> Result<Estimate, EvalError> {
    check_point(u, x, params)?;
    cfg.validate()?;
    let v = Numerator::new(u, x, params.p(), Nonlinearity::Odd);
    let prof = RayProfile::new(u, x, |a, b| v.symmetric(a, b), cfg.angular_nodes);
    Ok(radial_direct(&prof, params.sp(), breakpoints, cfg)? * c1(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::{catalog, TestFunction};

    fn p(n: usize, s: f64, p: f64) -> FracParams {
        FracParams::new(n, s, p).unwrap()
    }

    #[test]
    fn constant_gives_zero() {
        let u = TestFunction::constant(1, 3.0);
        let v = eval_direct(&u, &[0.2], &p(1, 0.5, 3.0), &QuadConfig::default()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn cosine_multiplier() {
        let u = catalog("cosine", 1).unwrap();
        let cfg = QuadConfig::default();
        for &s in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let v = eval_direct(&u, &[0.0], &p(1, s, 2.0), &cfg).unwrap();
            assert!((v.value - 1.0).abs() < 1e-7, "s={s}: {v:?}");
            let w = eval_direct(&u, &[0.4], &p(1, s, 2.0), &cfg).unwrap();
            assert!((w.value - 0.4f64.cos()).abs() < 1e-7, "s={s}: {w:?}");
        }
    }

    #[test]
    fn cosine_2d_multiplier() {
        // the angular profile has a |cos θ|^{sp} kink, so the midpoint rule
        // converges only algebraically
        let u = catalog("cosine", 2).unwrap();
        let cfg = QuadConfig {
            angular_nodes: 2048,
            ..QuadConfig::default()
        };
        let v = eval_direct(&u, &[0.0, 0.3], &p(2, 0.5, 2.0), &cfg).unwrap();
        assert!((v.value - 1.0).abs() < 1e-6, "{v:?}");
    }

    #[test]
    fn antisymmetric_point_vanishes() {
        // u(π/2 + r) + u(π/2 - r) = 0 = 2u(π/2)
        let u = catalog("cosine", 1).unwrap();
        let v = eval_direct(&u, &[std::f64::consts::FRAC_PI_2], &p(1, 0.5, 3.0), &QuadConfig::default())
            .unwrap();
        assert!(v.value.abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn gaussian_fourier_oracle() {
        // (−Δ)^s e^{-x²} = 4^s Γ(s+½)/√π · ₁F₁(s+½; ½; -x²)
        let u = catalog("gaussian", 1).unwrap();
        let cfg = QuadConfig::default();
        for &s in &[0.25, 0.5, 0.75] {
            for &x in &[0.0, 0.5, 1.0, 2.5] {
                let v = eval_direct(&u, &[x], &p(1, s, 2.0), &cfg).unwrap();
                let exact = crate::reps::checks::gaussian_fractional_laplacian_1d(s, x);
                assert!((v.value - exact).abs() < 1e-7 * exact.abs().max(1.0), "s={s} x={x}");
            }
        }
    }

    #[test]
    fn small_p_at_critical_point_refused() {
        let u = catalog("gaussian", 1).unwrap();
        let r = eval_direct(&u, &[0.0], &p(1, 0.5, 1.3), &QuadConfig::default());
        assert!(matches!(r, Err(EvalError::DegenerateGradient(_))));
    }

    #[test]
    fn rational_bump_tail_is_exact() {
        // raising the split radius must not change the value
        let u = catalog("rational_bump", 1).unwrap();
        let q = p(1, 0.25, 1.5);
        let a = eval_direct(&u, &[0.5], &q, &QuadConfig::default()).unwrap();
        let b = eval_direct(
            &u,
            &[0.5],
            &q,
            &QuadConfig {
                tail_radius: 1e4,
                ..QuadConfig::default()
            },
        )
        .unwrap();
        assert!((a.value - b.value).abs() < 1e-8 * a.value.abs(), "{a:?} {b:?}");
    }
}
