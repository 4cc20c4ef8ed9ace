//! Three characterisations of the Gagliardo seminorm
//! `[u]^p = C1 ∬ |u(x) - u(y)|^p |x - y|^{-n-sp} dx dy`: the double
//! integral itself, a heat-semigroup form and a resolvent form, each built
//! from the pointwise machinery with `|·|^p` in place of `Φ_p`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{c1, constant_set, FracParams};
use crate::error::EvalError;
use crate::funcs::{Field, Kind, RayBehaviour, TestFunction};
use crate::quad::{integrate_panels, Estimate, QuadConfig};
use crate::reps::balakrishnan::radial_balakrishnan;
use crate::reps::direct::radial_direct;
use crate::reps::semigroup::radial_semigroup;
use crate::reps::{Nonlinearity, Numerator, RayProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeminormForm {
    Direct,
    Semigroup,
    Balakrishnan,
}

impl SeminormForm {
    pub const ALL: [SeminormForm; 3] = [SeminormForm::Direct, SeminormForm::Semigroup, SeminormForm::Balakrishnan];

    pub fn name(self) -> &'static str {
        match self {
            SeminormForm::Direct => "direct",
            SeminormForm::Semigroup => "semigroup",
            SeminormForm::Balakrishnan => "balakrishnan",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub direct: Estimate,
    pub semigroup: Estimate,
    pub balakrishnan: Estimate,
}

impl SeminormReport {
    pub fn compute(u: &TestFunction, params: &FracParams, cfg: &QuadConfig) -> Result<Self, EvalError> {
        Ok(Self {
            direct: seminorm_direct(u, params, cfg)?,
            semigroup: seminorm_semigroup(u, params, cfg)?,
            balakrishnan: seminorm_balakrishnan(u, params, cfg)?,
        })
    }

    pub fn values(&self) -> [Estimate; 3] {
        [self.direct, self.semigroup, self.balakrishnan]
    }

    /// Largest pairwise `|a - b| / max(|a|, |b|)`; zero when all vanish.
    pub fn max_relative_gap(&self) -> f64 {
        let v = self.values();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                let scale = v[i].value.abs().max(v[j].value.abs());
                if scale > 0.0 {
                    worst = worst.max((v[i].value - v[j].value).abs() / scale);
                }
            }
        }
        worst
    }
}

/// Half-width of the outer window in units of `1/scale`.
fn outer_radius(kind: Kind) -> Option<f64> {
    match kind {
        Kind::Gaussian | Kind::ShiftedGaussian => Some(12.0),
        Kind::RationalBump => Some(400.0),
        Kind::Cosine | Kind::Constant => None,
    }
}

/// Breakpoints `c ± d` for `d = 0.25/scale, 0.5/scale, …` up to `big_r`.
fn doubling_points(c: f64, first: f64, big_r: f64) -> Vec<f64> {
    let mut pts = vec![c - big_r, c, c + big_r];
    let mut d = first;
    while d < big_r {
        pts.push(c - d);
        pts.push(c + d);
        d *= 2.0;
    }
    pts
}

fn sorted(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `D(z) = ∫ |u(x) - u(x + z)|^p dx`, presented as the field `y ↦ -D(y)`
/// so that the pointwise machinery at `x = 0` integrates `D` against the
/// radial kernels: by Fubini the semigroup and resolvent seminorm forms
/// are single radial integrals of `D`.
/// Chebyshev nodes per dyadic segment of the structure-function table.
const CHEB_NODES: usize = 16;

/// `D(z) = ∫ |u(x) - u(x + z)|^p dx`, presented as the field `y ↦ -D(y)`
/// so that the pointwise machinery at `x = 0` integrates `D` against the
/// radial kernels: by Fubini the semigroup and resolvent seminorm forms
/// are single radial integrals of `D`.
///
/// `E(z) = D(z)/z^p` is tabulated once on dyadic segments of
/// `[z_lo, z_hi]` and interpolated; below `z_lo`, `E ≈ E(0) + c z²` and above
/// `z_hi` the two copies of `u` no longer overlap and `D = D(∞)`.
struct Structure {
    p: f64,
    z_lo: f64,
    e0: f64,
    e_lo: f64,
    /// Values of `E` at the Chebyshev points of each `[2^k z_lo, 2^{k+1} z_lo]`.
    segments: Vec<[f64; CHEB_NODES + 1]>,
    /// `D(±∞) = 2 ∫ |u|^p`.
    limit: f64,
    scale: f64,
    /// Largest relative interpolation error seen at off-node checkpoints.
    table_error: f64,
}

impl Structure {
    fn new(u: &TestFunction, p: f64, big_r: f64, cfg: &QuadConfig) -> Result<Self, EvalError> {
        let c = u.center()[0];
        let rel = 1e-11;
        let window = sorted(doubling_points(c, 0.25 / u.scale(), big_r));
        let quad = |f: &dyn Fn(f64) -> f64, pts: &[f64]| integrate_panels(f, pts, 1e-300, rel, cfg.max_subdivisions);
        let mass = quad(&|x| u.value(&[x]).abs().powf(p), &window)?.value;
        let e0 = quad(&|x| u.gradient(&[x])[0].abs().powf(p), &window)?.value;
        let d = |z: f64| -> Result<f64, EvalError> {
            let mut pts = window.clone();
            pts.extend([c - z, c - 0.5 * z, c - z - big_r, c - z + big_r]);
            Ok(quad(&|x| u.increment(&[x], &[z]).abs().powf(p), &sorted(pts))?.value)
        };
        let z_lo = 1e-4 / u.scale();
        let z_hi = 4.0 * big_r;
        let mut segments = Vec::new();
        let mut a = z_lo;
        while a < z_hi {
            let mut vals = [0.0; CHEB_NODES + 1];
            for (j, v) in vals.iter_mut().enumerate() {
                let z = a * (1.5 + 0.5 * (PI * j as f64 / CHEB_NODES as f64).cos());
                *v = d(z)? / z.powf(p);
            }
            segments.push(vals);
            a *= 2.0;
        }
        let mut table = Self {
            p,
            z_lo,
            e0,
            e_lo: d(z_lo)? / z_lo.powf(p),
            segments,
            limit: 2.0 * mass,
            scale: u.scale(),
            table_error: 0.0,
        };
        let mut worst: f64 = 0.0;
        let mut a = z_lo;
        for _ in 0..table.segments.len() {
            let z = 1.77 * a;
            let exact = d(z)?;
            if exact > 0.0 {
                worst = worst.max((table.d(z) - exact).abs() / exact);
            }
            a *= 2.0;
        }
        table.table_error = worst;
        Ok(table)
    }

    fn d(&self, z: f64) -> f64 {
        let z = z.abs();
        if z == 0.0 {
            return 0.0;
        }
        if z < self.z_lo {
            let w = (z / self.z_lo).powi(2);
            return z.powf(self.p) * (self.e0 + (self.e_lo - self.e0) * w);
        }
        let k = (z / self.z_lo).log2().floor() as usize;
        let Some(vals) = self.segments.get(k) else {
            return self.limit;
        };
        let a = self.z_lo * 2f64.powi(k as i32);
        // barycentric interpolation at Chebyshev points of the second kind
        let t = (z - 1.5 * a) / (0.5 * a);
        let (mut num, mut den) = (0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            let xj = (PI * j as f64 / CHEB_NODES as f64).cos();
            if t == xj {
                return v * z.powf(self.p);
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == CHEB_NODES {
                w *= 0.5;
            }
            let q = w / (t - xj);
            num += q * v;
            den += q;
        }
        (num / den) * z.powf(self.p)
    }
}

impl Field for Structure {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        -self.d(x[0])
    }

    fn gradient(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0]
    }

    fn ray(&self, _x: &[f64], _omega: &[f64]) -> RayBehaviour {
        RayBehaviour::Tends { limit: -self.limit }
    }

    fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        self.d(x[0] + h[0]) - self.d(x[0])
    }

    fn symmetric_increments(&self, _x: &[f64], h: &[f64]) -> (f64, f64) {
        (0.0, self.d(h[0].abs()))
    }

    fn landmarks(&self, _x: &[f64], _omega: &[f64]) -> Vec<f64> {
        [0.5, 1.0, 2.0, 4.0].iter().map(|k| k / self.scale).collect()
    }
}

/// `[u]^p` in the given form.
///
/// The direct form integrates the pointwise inner integral over
/// `|x - x₀| ≤ R` and adds the exact contribution of `|x - x₀| > R` with
/// `u(x)` set to zero there. The other two forms integrate the structure
/// function `D` against their kernels.
pub fn seminorm_power(u: &TestFunction, form: SeminormForm, params: &FracParams, cfg: &QuadConfig) -> Result<Estimate, EvalError> {
    if params.n() != 1 || u.dim() != 1 {
        return Err(EvalError::Unsupported("seminorms are implemented for n = 1".into()));
    }
    cfg.validate()?;
    if u.amplitude() == 0.0 || u.kind() == Kind::Constant {
        return Ok(Estimate::ZERO);
    }
    let Some(radius) = outer_radius(u.kind()) else {
        return Err(EvalError::Params(format!("{} has an infinite seminorm", u.name())));
    };
    let (p, sp) = (params.p(), params.sp());
    let consts = constant_set(params);
    let c = u.center()[0];
    let big_r = radius / u.scale();
    let edge = u.value(&[c + big_r]).abs() / u.sup_norm();

    match form {
        SeminormForm::Direct => {}
        SeminormForm::Semigroup | SeminormForm::Balakrishnan => {
            let dz = Structure::new(u, p, big_r, cfg)?;
            let prof = RayProfile::new(&dz, &[0.0], |_, b| 2.0 * b, 1);
            let v = if form == SeminormForm::Semigroup {
                radial_semigroup(&prof, 0.5 * sp, cfg)? * consts.c2
            } else {
                radial_balakrishnan(&prof, 0.5 * sp, cfg)? * consts.c4
            };
            // |x| > R is cut from D
            let neglected = 2.0 * u.sup_norm().powf(p) * edge.powf(p) * big_r * v.value.abs() / dz.limit.max(f64::MIN_POSITIVE)
                + dz.table_error * v.value.abs();
            return Ok(v + Estimate::new(0.0, neglected));
        }
    }

    let worst = Cell::new(0.0f64);
    let failure = std::cell::RefCell::new(None::<EvalError>);
    let inner = |x: f64| -> f64 {
        let v = Numerator::new(u, &[x], p, Nonlinearity::Abs);
        let prof = RayProfile::new(u, &[x], |a, b| v.symmetric(a, b), 1);
        match radial_direct(&prof, sp, &[], cfg) {
            Ok(e) => {
                worst.set(worst.get().max(e.error));
                e.value
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        }
    };
    let pts = sorted(doubling_points(c, 0.25 / u.scale(), big_r));
    let body = integrate_panels(inner, &pts, cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let body = body + Estimate::new(0.0, worst.get() * 2.0 * big_r);

    // ∫_{|x-c|>R} ∫_{|y-c|<R/2} |u(y)|^p |x - y|^{-1-sp} dy dx
    let tail_density = |y: f64| {
        u.value(&[y]).abs().powf(p) * ((c + big_r - y).powf(-sp) + (y - c + big_r).powf(-sp))
    };
    let half: Vec<f64> = pts.iter().copied().filter(|y| (y - c).abs() <= 0.5 * big_r).chain([c - 0.5 * big_r, c + 0.5 * big_r]).collect();
    let tail = integrate_panels(tail_density, &sorted(half), 1e-3 * cfg.abs_tol, cfg.rel_tol, cfg.max_subdivisions)? * (1.0 / sp);
    // neglected: u(x) ≠ 0 beyond the window, and |y - c| > R/2 there
    let mid = u.value(&[c + 0.5 * big_r]).abs();
    let neglected = tail.value * p * edge + mid.powf(p) * big_r * (0.5 * big_r).powf(-sp) / sp;
    Ok((body + tail + Estimate::new(0.0, neglected)) * c1(params))
}

fn root(power: Estimate, p: f64) -> Estimate {
    if power.value <= 0.0 {
        return Estimate::new(0.0, power.error.powf(1.0 / p));
    }
    let v = power.value.powf(1.0 / p);
    Estimate::new(v, v * power.error / (p * power.value))
}

/// `(C1 ∬ |u(x) - u(y)|^p |x - y|^{-1-sp} dx dy)^{1/p}`.
pub fn seminorm_direct(u: &TestFunction, params: &FracParams, cfg: &QuadConfig) -> Result<Estimate, EvalError> {
    Ok(root(seminorm_power(u, SeminormForm::Direct, params, cfg)?, params.p()))
}

/// `(C2 ∫∫_0^∞ e^{tΔ}[|u(x) - u(·)|^p](x) dt/t^{1+sp/2} dx)^{1/p}`.
pub fn seminorm_semigroup(u: &TestFunction, params: &FracParams, cfg: &QuadConfig) -> Result<Estimate, EvalError> {
    Ok(root(seminorm_power(u, SeminormForm::Semigroup, params, cfg)?, params.p()))
}

/// `(C4 ∫∫_0^∞ (R_t ⋆ |u(x) - u(·)|^p)(x) t^{sp/2-1} dt dx)^{1/p}`.
pub fn seminorm_balakrishnan(u: &TestFunction, params: &FracParams, cfg: &QuadConfig) -> Result<Estimate, EvalError> {
    Ok(root(seminorm_power(u, SeminormForm::Balakrishnan, params, cfg)?, params.p()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::gamma;
    use crate::funcs::catalog;

    fn q(s: f64, p: f64) -> FracParams {
        FracParams::new(1, s, p).unwrap()
    }

    /// `[e^{-x²}]² = (1/π) ∫ |ξ|^{2s} |û(ξ)|² dξ = 2^{s+½} Γ(s+½)`.
    fn plancherel_gaussian(s: f64) -> f64 {
        (2f64.powf(s + 0.5) * gamma(s + 0.5).unwrap()).sqrt()
    }

    fn cfg() -> QuadConfig {
        QuadConfig::with_tolerance(1e-7)
    }

    #[test]
    fn structure_table_matches_quadrature() {
        for (name, p) in [("gaussian", 1.5), ("rational_bump", 3.0), ("shifted_gaussian", 2.2)] {
            let u = catalog(name, 1).unwrap();
            let big_r = outer_radius(u.kind()).unwrap();
            let dz = Structure::new(&u, p, big_r, &cfg()).unwrap();
            for z in [1e-6, 3.7e-4, 0.013, 0.4, 1.0, 2.9, 7.5, 30.0] {
                let direct = integrate_panels(|x| u.increment(&[x], &[z]).abs().powf(p), &sorted(vec![-big_r - z, -z - 1.0, -z, -0.5 * z, 0.0, 1.0, big_r]), 1e-300, 1e-12, 10_000)
                    .unwrap()
                    .value;
                assert!((dz.d(z) - direct).abs() < 1e-9 * direct, "{name} z={z}: {} vs {direct}", dz.d(z));
            }
        }
    }

    #[test]
    fn zero_and_constant() {
        let z = catalog("gaussian", 1).unwrap().with_amplitude(0.0);
        for form in SeminormForm::ALL {
            assert_eq!(seminorm_power(&z, form, &q(0.5, 2.0), &cfg()).unwrap().value, 0.0);
        }
        let c = TestFunction::constant(1, 3.0);
        assert_eq!(seminorm_direct(&c, &q(0.5, 3.0), &cfg()).unwrap().value, 0.0);
        assert!(seminorm_direct(&catalog("cosine", 1).unwrap(), &q(0.5, 2.0), &cfg()).is_err());
    }

    #[test]
    fn gaussian_plancherel() {
        let u = catalog("gaussian", 1).unwrap();
        for s in [0.25, 0.5, 0.75] {
            let exact = plancherel_gaussian(s);
            for form in SeminormForm::ALL {
                let v = root(seminorm_power(&u, form, &q(s, 2.0), &cfg()).unwrap(), 2.0);
                assert!((v.value - exact).abs() < 1e-5 * exact, "{} s={s}: {v:?} vs {exact}", form.name());
            }
        }
    }

    #[test]
    fn rational_bump_plancherel() {
        // û = π e^{-|ξ|}: [u]² = π Γ(2s+1) / 4^s
        let u = catalog("rational_bump", 1).unwrap();
        for s in [0.25, 0.5, 0.75] {
            let exact = (PI * gamma(2.0 * s + 1.0).unwrap() / 4f64.powf(s)).sqrt();
            let r = SeminormReport::compute(&u, &q(s, 2.0), &cfg()).unwrap();
            for v in r.values() {
                assert!((v.value - exact).abs() < 1e-6 * exact, "s={s}: {r:?} vs {exact}");
            }
        }
    }

    #[test]
    fn homogeneity_and_translation() {
        let u = catalog("gaussian", 1).unwrap();
        let params = q(0.5, 3.0);
        let base = seminorm_direct(&u, &params, &cfg()).unwrap().value;
        let scaled = seminorm_direct(&u.clone().with_amplitude(2.5), &params, &cfg()).unwrap().value;
        assert!((scaled - 2.5 * base).abs() < 1e-6 * scaled);
        let moved = seminorm_direct(&u.translated(&[1.7]), &params, &cfg()).unwrap().value;
        assert!((moved - base).abs() < 1e-6 * base);
    }

    #[test]
    fn three_forms_agree_on_rational_bump() {
        let u = catalog("rational_bump", 1).unwrap();
        let r = SeminormReport::compute(&u, &q(0.5, 3.0), &cfg()).unwrap();
        assert!(r.max_relative_gap() < 1e-4, "{r:?}");
    }
}
