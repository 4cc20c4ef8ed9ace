//! Analytic test functions, the power nonlinearity, the classical 1-D
//! p-Laplacian, and lattice samples.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

/// `Φ_p(t) = |t|^{p-2} t`.
pub fn phi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().powf(p - 1.0).copysign(t)
    }
}

/// How a function behaves along the ray `y = x + rω` as `r → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RayBehaviour {
    /// `u(y) → limit`.
    Tends { limit: f64 },
    /// `u(x + (r + period)ω) = u(x + rω)`.
    Periodic { period: f64 },
    /// `u` is constant along the ray.
    Flat,
}

/// A real function on `R^n` with a known gradient and far-field behaviour.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn ray(&self, x: &[f64], omega: &[f64]) -> RayBehaviour;

    /// `u(x) - u(x + h)`. Implementations should avoid the cancellation of
    /// the naive difference for small `h`.
    fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        let y: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + b).collect();
        self.value(x) - self.value(&y)
    }

    /// `(a, b)` with `u(x) - u(x ± h) = b ∓ a`: the odd part
    /// `a = (u(x + h) - u(x - h)) / 2` and the second difference
    /// `b = u(x) - (u(x + h) + u(x - h)) / 2`.
    fn symmetric_increments(&self, x: &[f64], h: &[f64]) -> (f64, f64) {
        let neg: Vec<f64> = h.iter().map(|v| -v).collect();
        let (dp, dm) = (self.increment(x, h), self.increment(x, &neg));
        (0.5 * (dm - dp), 0.5 * (dp + dm))
    }

    /// Distances `r > 0` along `x ± rω` where the function has features
    /// worth a quadrature breakpoint.
    fn landmarks(&self, _x: &[f64], _omega: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gaussian,
    Cosine,
    RationalBump,
    ShiftedGaussian,
    Constant,
}

impl Kind {
    pub const CATALOG: [&'static str; 4] = ["gaussian", "cosine", "rational_bump", "shifted_gaussian"];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Gaussian => "gaussian",
            Kind::Cosine => "cosine",
            Kind::RationalBump => "rational_bump",
            Kind::ShiftedGaussian => "shifted_gaussian",
            Kind::Constant => "constant",
        }
    }
}

/// `u(x) = A φ(c (x - x₀))` for one of the base profiles `φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    kind: Kind,
    n: usize,
    amplitude: f64,
    scale: f64,
    center: Vec<f64>,
}

/// Default centre of `shifted_gaussian` in every coordinate.
pub const DEFAULT_SHIFT: f64 = 0.75;

/// Look up a catalog function by name in dimension `n`.
pub fn catalog(name: &str, n: usize) -> Result<TestFunction, EvalError> {
    let kind = match name {
        "gaussian" => Kind::Gaussian,
        "cosine" => Kind::Cosine,
        "rational_bump" => Kind::RationalBump,
        "shifted_gaussian" => Kind::ShiftedGaussian,
        "constant" => Kind::Constant,
        other => return Err(EvalError::UnknownFunction(other.to_string())),
    };
    TestFunction::new(kind, n)
}

impl TestFunction {
    pub fn new(kind: Kind, n: usize) -> Result<Self, EvalError> {
        if n == 0 {
            return Err(EvalError::Params("dimension n must be >= 1".into()));
        }
        let shift = if kind == Kind::ShiftedGaussian { DEFAULT_SHIFT } else { 0.0 };
        Ok(Self {
            kind,
            n,
            amplitude: 1.0,
            scale: 1.0,
            center: vec![shift; n],
        })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            kind: Kind::Constant,
            n,
            amplitude: c,
            scale: 1.0,
            center: vec![0.0; n],
        }
    }

    /// `h · u`.
    pub fn with_amplitude(mut self, a: f64) -> Self {
        self.amplitude *= a;
        self
    }

    /// `u(h ·)`.
    pub fn dilated(mut self, h: f64) -> Self {
        assert!(h > 0.0, "dilation factor must be positive");
        self.scale *= h;
        for c in &mut self.center {
            *c /= h;
        }
        self
    }

    /// `u(· - a)`.
    pub fn translated(mut self, a: &[f64]) -> Self {
        for (c, d) in self.center.iter_mut().zip(a) {
            *c += d;
        }
        self
    }

    pub fn with_center(mut self, center: &[f64]) -> Self {
        assert_eq!(center.len(), self.n);
        self.center = center.to_vec();
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .map(|(xi, ci)| self.scale * (xi - ci))
            .collect()
    }

    fn base_value(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => (-r2).exp(),
            Kind::Cosine => z[0].cos(),
            Kind::RationalBump => 1.0 / (1.0 + r2),
            Kind::Constant => 1.0,
        }
    }

    fn base_gradient(&self, z: &[f64]) -> Vec<f64> {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                let e = (-r2).exp();
                z.iter().map(|v| -2.0 * v * e).collect()
            }
            Kind::Cosine => {
                let mut g = vec![0.0; z.len()];
                g[0] = -z[0].sin();
                g
            }
            Kind::RationalBump => {
                let q = 1.0 / (1.0 + r2);
                z.iter().map(|v| -2.0 * v * q * q).collect()
            }
            Kind::Constant => vec![0.0; z.len()],
        }
    }

    fn base_hessian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        let n = z.len();
        let r2: f64 = z.iter().map(|v| v * v).sum();
        let mut h = vec![vec![0.0; n]; n];
        match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                let e = (-r2).exp();
                for i in 0..n {
                    for j in 0..n {
                        h[i][j] = (4.0 * z[i] * z[j] - if i == j { 2.0 } else { 0.0 }) * e;
                    }
                }
            }
            Kind::Cosine => h[0][0] = -z[0].cos(),
            Kind::RationalBump => {
                let q = 1.0 / (1.0 + r2);
                for i in 0..n {
                    for j in 0..n {
                        h[i][j] = 8.0 * q * q * q * z[i] * z[j] - if i == j { 2.0 * q * q } else { 0.0 };
                    }
                }
            }
            Kind::Constant => {}
        }
        h
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let k = self.amplitude * self.scale * self.scale;
        let mut h = self.base_hessian(&self.local(x));
        for row in &mut h {
            for v in row.iter_mut() {
                *v *= k;
            }
        }
        h
    }

    /// `sup |u|`.
    pub fn sup_norm(&self) -> f64 {
        self.amplitude.abs()
    }

    /// `sup |∇u|`.
    pub fn grad_sup_norm(&self) -> f64 {
        let base = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => (2.0 * (-1.0f64).exp()).sqrt(),
            Kind::Cosine => 1.0,
            Kind::RationalBump => 9.0 / (8.0 * 3f64.sqrt()),
            Kind::Constant => 0.0,
        };
        base * self.amplitude.abs() * self.scale
    }

    /// `sup ‖D²u‖` in the operator norm.
    pub fn hess_sup_norm(&self) -> f64 {
        let base = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian | Kind::RationalBump => 2.0,
            Kind::Cosine => 1.0,
            Kind::Constant => 0.0,
        };
        base * self.amplitude.abs() * self.scale * self.scale
    }

    pub fn has_closed_form_heat(&self) -> bool {
        !matches!(self.kind, Kind::RationalBump)
    }

    /// `e^{tΔ}u(x)` where a closed form exists.
    pub fn heat_closed_form(&self, x: &[f64], t: f64) -> Result<f64, EvalError> {
        if t < 0.0 {
            return Err(EvalError::Params(format!("heat time must be >= 0, got {t}")));
        }
        let z = self.local(x);
        let c2 = self.scale * self.scale;
        let v = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                let d = 1.0 + 4.0 * c2 * t;
                let r2: f64 = z.iter().map(|v| v * v).sum();
                d.powf(-0.5 * self.n as f64) * (-r2 / d).exp()
            }
            Kind::Cosine => (-c2 * t).exp() * z[0].cos(),
            Kind::Constant => 1.0,
            Kind::RationalBump => {
                return Err(EvalError::Unsupported(
                    "rational_bump has no closed-form heat image".into(),
                ))
            }
        };
        Ok(self.amplitude * v)
    }

    /// `u(x) - e^{tΔ}u(x)`, accurate for small `t`.
    pub fn heat_decrement(&self, x: &[f64], t: f64) -> Result<f64, EvalError> {
        if t < 0.0 {
            return Err(EvalError::Params(format!("heat time must be >= 0, got {t}")));
        }
        let z = self.local(x);
        let k = 4.0 * self.scale * self.scale * t;
        let v = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                let r2: f64 = z.iter().map(|v| v * v).sum();
                let e = -0.5 * self.n as f64 * k.ln_1p() + r2 * k / (1.0 + k);
                -(-r2).exp() * e.exp_m1()
            }
            Kind::Cosine => -z[0].cos() * (-0.25 * k).exp_m1(),
            Kind::Constant => 0.0,
            Kind::RationalBump => {
                return Err(EvalError::Unsupported(
                    "rational_bump has no closed-form heat image".into(),
                ))
            }
        };
        Ok(self.amplitude * v)
    }
}

impl Field for TestFunction {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.amplitude * self.base_value(&self.local(x))
    }

    fn increment(&self, x: &[f64], h: &[f64]) -> f64 {
        let a = self.local(x);
        let ch: Vec<f64> = h.iter().map(|v| self.scale * v).collect();
        // |a|² - |a + ch|², without cancellation
        let dq = -ch.iter().zip(&a).map(|(d, ai)| d * (2.0 * ai + d)).sum::<f64>();
        let a2: f64 = a.iter().map(|v| v * v).sum();
        let d = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                if dq > 1.0 {
                    (-a2).exp() - (dq - a2).exp()
                } else {
                    -(-a2).exp() * dq.exp_m1()
                }
            }
            Kind::Cosine => 2.0 * (a[0] + 0.5 * ch[0]).sin() * (0.5 * ch[0]).sin(),
            Kind::RationalBump => -dq / ((1.0 + a2) * (1.0 + a2 - dq)),
            Kind::Constant => 0.0,
        };
        self.amplitude * d
    }

    fn symmetric_increments(&self, x: &[f64], h: &[f64]) -> (f64, f64) {
        let a = self.local(x);
        let k: Vec<f64> = h.iter().map(|v| self.scale * v).collect();
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if k2 > 0.25 || self.kind == Kind::Constant {
            // no cancellation to avoid at this distance
            let neg: Vec<f64> = h.iter().map(|v| -v).collect();
            let (dp, dm) = (self.increment(x, h), self.increment(x, &neg));
            return (0.5 * (dm - dp), 0.5 * (dp + dm));
        }
        let a2: f64 = a.iter().map(|v| v * v).sum();
        let w = 2.0 * a.iter().zip(&k).map(|(ai, ki)| ai * ki).sum::<f64>();
        let (odd, even) = match self.kind {
            Kind::Gaussian | Kind::ShiftedGaussian => {
                let sh = (0.5 * w).sinh();
                let odd = -(-a2 - k2).exp() * w.sinh();
                let even = -(-a2).exp() * ((-k2).exp_m1() * w.cosh() + 2.0 * sh * sh);
                (odd, even)
            }
            Kind::Cosine => {
                let sk = (0.5 * k[0]).sin();
                (-a[0].sin() * k[0].sin(), 2.0 * a[0].cos() * sk * sk)
            }
            Kind::RationalBump => {
                let p = 1.0 + a2 + k2;
                let den = (p - w) * (p + w);
                (-w / den, (p * k2 - w * w) / ((1.0 + a2) * den))
            }
            Kind::Constant => (0.0, 0.0),
        };
        (self.amplitude * odd, self.amplitude * even)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let k = self.amplitude * self.scale;
        self.base_gradient(&self.local(x))
            .into_iter()
            .map(|g| g * k)
            .collect()
    }

    fn ray(&self, _x: &[f64], omega: &[f64]) -> RayBehaviour {
        match self.kind {
            Kind::Constant => RayBehaviour::Flat,
            Kind::Cosine => {
                let w = (self.scale * omega[0]).abs();
                if w < 1e-12 {
                    RayBehaviour::Flat
                } else {
                    RayBehaviour::Periodic { period: 2.0 * PI / w }
                }
            }
            _ => RayBehaviour::Tends { limit: 0.0 },
        }
    }

    fn landmarks(&self, x: &[f64], omega: &[f64]) -> Vec<f64> {
        let width = 1.0 / self.scale;
        let mut out = vec![width];
        if matches!(self.kind, Kind::Cosine | Kind::Constant) {
            return out;
        }
        let d: f64 = x
            .iter()
            .zip(&self.center)
            .zip(omega)
            .map(|((xi, ci), wi)| (ci - xi) * wi)
            .sum::<f64>()
            .abs();
        for r in [d - width, d, d + width, d + 3.0 * width] {
            if r > 1e-3 * width {
                out.push(r);
            }
        }
        out
    }
}

/// `e^{tΔ}f(x)` from the closed forms of the catalog.
pub fn heat_apply_closed_form(f: &TestFunction, x: &[f64], t: f64) -> Result<f64, EvalError> {
    f.heat_closed_form(x, t)
}

/// Classical 1-D p-Laplacian `Δ_p f(x) = (p-1)|f'(x)|^{p-2} f''(x)`.
pub fn p_laplacian_1d(f: &TestFunction, x: f64, p: f64) -> Result<f64, EvalError> {
    if f.dim() != 1 {
        return Err(EvalError::Params("p_laplacian_1d needs n = 1".into()));
    }
    let d1 = f.gradient(&[x])[0];
    let d2 = f.hessian(&[x])[0][0];
    if d1 == 0.0 {
        if p < 2.0 {
            return Err(EvalError::DegenerateGradient(0.0));
        }
        if p > 2.0 {
            return Ok(0.0);
        }
        return Ok(d2);
    }
    Ok((p - 1.0) * d1.abs().powf(p - 2.0) * d2)
}

/// Values outside the stored box of a [`GridFunction`].
#[derive(Debug, Clone, PartialEq)]
pub enum Extension {
    /// Sample the generating function.
    Sampled(TestFunction),
    Zero,
}

/// Samples on the lattice `origin + h·k`, `0 ≤ k < shape`, with a rule for
/// every other lattice point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
    values: Vec<f64>,
    extension: Extension,
}

impl GridFunction {
    pub fn new(
        origin: Vec<f64>,
        h: f64,
        shape: Vec<usize>,
        values: Vec<f64>,
        extension: Extension,
    ) -> Result<Self, EvalError> {
        if !(h > 0.0) {
            return Err(EvalError::Params(format!("grid spacing must be positive, got {h}")));
        }
        if origin.len() != shape.len() || origin.is_empty() || origin.len() > 2 {
            return Err(EvalError::Params("grid must be 1-D or 2-D".into()));
        }
        if shape.iter().product::<usize>() != values.len() {
            return Err(EvalError::Params("grid values do not fill the box".into()));
        }
        Ok(Self {
            origin,
            h,
            shape,
            values,
            extension,
        })
    }

    /// Sample `f` on a box of `shape` points, extending by `f` itself.
    pub fn sample(f: &TestFunction, origin: Vec<f64>, h: f64, shape: Vec<usize>) -> Result<Self, EvalError> {
        let n = origin.len();
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut x = vec![0.0; n];
            for d in (0..n).rev() {
                x[d] = origin[d] + h * (rem % shape[d]) as f64;
                rem /= shape[d];
            }
            values.push(f.value(&x));
        }
        Self::new(origin, h, shape, values, Extension::Sampled(f.clone()))
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extension(&self) -> &Extension {
        &self.extension
    }

    pub fn point(&self, k: &[i64]) -> Vec<f64> {
        k.iter()
            .zip(&self.origin)
            .map(|(ki, oi)| oi + self.h * *ki as f64)
            .collect()
    }

    /// Value at lattice index `k` (which may lie outside the stored box).
    pub fn at(&self, k: &[i64]) -> f64 {
        let inside = k
            .iter()
            .zip(&self.shape)
            .all(|(ki, si)| *ki >= 0 && (*ki as usize) < *si);
        if inside {
            let mut flat = 0usize;
            for (ki, si) in k.iter().zip(&self.shape) {
                flat = flat * si + *ki as usize;
            }
            return self.values[flat];
        }
        match &self.extension {
            Extension::Zero => 0.0,
            Extension::Sampled(f) => f.value(&self.point(k)),
        }
    }

    /// Sup of the stored samples and, for sampled extensions, of the
    /// generating function.
    pub fn sup_bound(&self) -> f64 {
        let stored = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match &self.extension {
            Extension::Zero => stored,
            Extension::Sampled(f) => stored.max(f.sup_norm()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{heat_apply, QuadConfig};

    #[test]
    fn increment_matches_difference_and_resolves_small_steps() {
        for name in ["gaussian", "cosine", "rational_bump", "shifted_gaussian"] {
            let u = catalog(name, 2).unwrap().with_amplitude(1.7);
            let x = [0.3, -0.6];
            for h in [[0.9, 0.2], [-2.5, 1.0], [0.0, 3.0]] {
                let y = [x[0] + h[0], x[1] + h[1]];
                let naive = u.value(&x) - u.value(&y);
                assert!((u.increment(&x, &h) - naive).abs() < 1e-14, "{name}");
            }
            // first-order term dominates for tiny steps
            let h = [1e-9, -2e-9];
            let g = u.gradient(&x);
            let lin = -(g[0] * h[0] + g[1] * h[1]);
            assert!((u.increment(&x, &h) - lin).abs() < 1e-6 * lin.abs(), "{name}");
        }
    }

    #[test]
    fn symmetric_increments_resolve_second_differences() {
        for name in ["gaussian", "cosine", "rational_bump", "shifted_gaussian"] {
            let u = catalog(name, 2).unwrap().with_amplitude(-0.8);
            let x = [0.3, -0.6];
            for h in [[0.3, 0.1], [-2.5, 1.0]] {
                let (a, b) = u.symmetric_increments(&x, &h);
                let yp = [x[0] + h[0], x[1] + h[1]];
                let ym = [x[0] - h[0], x[1] - h[1]];
                let (up, um, ux) = (u.value(&yp), u.value(&ym), u.value(&x));
                assert!((a - 0.5 * (up - um)).abs() < 1e-14, "{name}");
                assert!((b - (ux - 0.5 * (up + um))).abs() < 1e-14, "{name}");
            }
            // b ≈ -½ hᵀ D²u h for tiny steps
            let h = [1e-7, 2e-7];
            let hs = u.hessian(&x);
            let quad = -0.5 * (0..2).map(|i| (0..2).map(|j| h[i] * hs[i][j] * h[j]).sum::<f64>()).sum::<f64>();
            let (_, b) = u.symmetric_increments(&x, &h);
            assert!((b - quad).abs() < 1e-6 * quad.abs(), "{name}: {b} {quad}");
        }
    }

    fn all(n: usize) -> Vec<TestFunction> {
        Kind::CATALOG.iter().map(|k| catalog(k, n).unwrap()).collect()
    }

    #[test]
    fn catalog_basics() {
        let g = catalog("gaussian", 1).unwrap();
        assert_eq!(g.value(&[0.0]), 1.0);
        assert_eq!(g.gradient(&[0.0]), vec![0.0]);
        assert_eq!(catalog("cosine", 1).unwrap().hessian(&[0.0])[0][0], -1.0);
        assert!(matches!(catalog("sinc", 1), Err(EvalError::UnknownFunction(_))));
        let sg = catalog("shifted_gaussian", 2).unwrap();
        assert_eq!(sg.value(&[DEFAULT_SHIFT, DEFAULT_SHIFT]), 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-4;
        for n in 1..=2 {
            for f in all(n) {
                let f = f.with_amplitude(1.3).dilated(0.8);
                for x in [[0.3, -0.2], [1.1, 0.7], [-0.9, 0.05]] {
                    let x = &x[..n];
                    let g = f.gradient(x);
                    let h = f.hessian(x);
                    for i in 0..n {
                        let mut xp = x.to_vec();
                        let mut xm = x.to_vec();
                        xp[i] += step;
                        xm[i] -= step;
                        let fd = (f.value(&xp) - f.value(&xm)) / (2.0 * step);
                        assert!((fd - g[i]).abs() < 1e-6, "{} grad", f.name());
                        let gp = f.gradient(&xp);
                        let gm = f.gradient(&xm);
                        for j in 0..n {
                            let fd2 = (gp[j] - gm[j]) / (2.0 * step);
                            assert!((fd2 - h[j][i]).abs() < 1e-6, "{} hess", f.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sup_norms_bound_grid_samples() {
        for f in all(2) {
            let f = f.dilated(1.7).with_amplitude(-0.6);
            let (mut m0, mut m1, mut m2) = (0.0f64, 0.0f64, 0.0f64);
            for i in -120..=120 {
                for j in -120..=120 {
                    let x = [i as f64 * 0.025, j as f64 * 0.025];
                    m0 = m0.max(f.value(&x).abs());
                    m1 = m1.max(f.gradient(&x).iter().map(|v| v * v).sum::<f64>().sqrt());
                    let h = f.hessian(&x);
                    // operator norm of a symmetric 2×2 matrix
                    let tr = h[0][0] + h[1][1];
                    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                    let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                    m2 = m2.max((0.5 * tr).abs() + disc);
                }
            }
            let tol = 1e-12;
            assert!(m0 <= f.sup_norm() + tol, "{}", f.name());
            assert!(m1 <= f.grad_sup_norm() + tol, "{}", f.name());
            assert!(m2 <= f.hess_sup_norm() + tol, "{}", f.name());
            // and the bounds are essentially attained
            assert!(m1 >= 0.99 * f.grad_sup_norm(), "{}", f.name());
        }
    }

    #[test]
    fn heat_closed_forms() {
        let g = catalog("gaussian", 1).unwrap();
        assert_eq!(heat_apply_closed_form(&g, &[0.0], 0.0).unwrap(), 1.0);
        let c = catalog("cosine", 1).unwrap();
        assert!((heat_apply_closed_form(&c, &[0.0], 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        for n in 1..=2 {
            let g = catalog("gaussian", n).unwrap();
            let v = heat_apply_closed_form(&g, &vec![0.0; n], 0.7).unwrap();
            assert!((v - 3.8f64.powf(-0.5 * n as f64)).abs() < 1e-15);
        }
        assert!(heat_apply_closed_form(&catalog("rational_bump", 1).unwrap(), &[0.0], 1.0).is_err());
    }

    #[test]
    fn quadrature_heat_matches_closed_form() {
        let cfg = QuadConfig::default();
        for n in 1..=2 {
            for f in all(n).into_iter().filter(|f| f.has_closed_form_heat()) {
                for &t in &[0.05, 0.5, 3.0] {
                    for x in [[0.0, 0.0], [0.4, -1.2]] {
                        let x = &x[..n];
                        let q = heat_apply(|y| f.value(y), x, t, &cfg).unwrap();
                        let e = f.heat_closed_form(x, t).unwrap();
                        assert!((q - e).abs() < 1e-8, "{} n={n} t={t}", f.name());
                    }
                }
            }
        }
    }

    #[test]
    fn hermite_refinement_approaches_oracle() {
        let f = catalog("gaussian", 1).unwrap().dilated(3.0);
        let exact = f.heat_closed_form(&[0.2], 0.2).unwrap();
        let mut last = f64::INFINITY;
        for nodes in [32, 64, 128] {
            let cfg = QuadConfig {
                hermite_nodes: nodes,
                ..QuadConfig::default()
            };
            let err = (heat_apply(|y| f.value(y), &[0.2], 0.2, &cfg).unwrap() - exact).abs();
            assert!(err <= last + 1e-15, "nodes={nodes}");
            last = err;
        }
    }

    #[test]
    fn classical_p_laplacian() {
        let c = catalog("cosine", 1).unwrap();
        assert_eq!(p_laplacian_1d(&c, 0.0, 2.0).unwrap(), -1.0);
        let g = catalog("gaussian", 1).unwrap();
        assert_eq!(p_laplacian_1d(&g, 0.0, 3.0).unwrap(), 0.0);
        assert!(matches!(p_laplacian_1d(&g, 0.0, 1.5), Err(EvalError::DegenerateGradient(_))));
        // flux form: d/dx (|f'|^{p-2} f')
        let p = 3.0;
        let flux = |x: f64| phi_p(g.gradient(&[x])[0], p);
        let step = 1e-5;
        let fd = (flux(0.5 + step) - flux(0.5 - step)) / (2.0 * step);
        assert!((p_laplacian_1d(&g, 0.5, p).unwrap() - fd).abs() < 1e-8);
    }

    #[test]
    fn phi_p_is_odd() {
        assert_eq!(phi_p(0.0, 1.5), 0.0);
        assert_eq!(phi_p(-2.0, 3.0), -4.0);
        assert!((phi_p(0.25, 1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_extension_rules() {
        let f = catalog("gaussian", 1).unwrap();
        let g = GridFunction::sample(&f, vec![-1.0], 0.5, vec![5]).unwrap();
        assert_eq!(g.at(&[2]), 1.0);
        assert!((g.at(&[7]) - f.value(&[2.5])).abs() < 1e-15);
        let z = GridFunction::new(vec![0.0], 0.5, vec![3], vec![1.0, 2.0, 3.0], Extension::Zero).unwrap();
        assert_eq!(z.at(&[-1]), 0.0);
        assert_eq!(z.at(&[1]), 2.0);
        assert!(GridFunction::new(vec![0.0], 0.0, vec![1], vec![1.0], Extension::Zero).is_err());
        let f2 = catalog("cosine", 2).unwrap();
        let g2 = GridFunction::sample(&f2, vec![0.0, 0.0], 0.1, vec![3, 4]).unwrap();
        assert!((g2.at(&[2, 3]) - f2.value(&[0.2, 0.3])).abs() < 1e-15);
    }
}
