//! Poisson kernel of the extension problem and resolvent kernels
//! `R_t = t (t - Δ)^{-1}`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::constants::{ln_gamma, FracParams};
use crate::error::QuadError;
use crate::quad::{
    integrate_log, integrate_time_singular, power_head, power_kernel_tail, Estimate, FarField, QuadConfig,
};

/// `|S^{n-1}|`.
pub(crate) fn sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / ln_gamma(h).unwrap().exp()
}

fn ln_poisson_const(n: usize, sp: f64) -> f64 {
    let nf = n as f64;
    ln_gamma(0.5 * (nf + sp)).unwrap() - 0.5 * nf * PI.ln() - ln_gamma(0.5 * sp).unwrap()
}

/// `P(ξ, y) = Γ((n+sp)/2) / (π^{n/2} Γ(sp/2)) · y^{sp} / (|ξ|² + y²)^{(n+sp)/2}`.
pub fn poisson_kernel(xi: &[f64], y: f64, params: &FracParams) -> f64 {
    let n = xi.len();
    let sp = params.sp();
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    (ln_poisson_const(n, sp) + sp * y.ln() - 0.5 * (n as f64 + sp) * (r2 + y * y).ln()).exp()
}

/// `W(ρ)` by quadrature of its defining integral over `w ∈ (0, ∞)`.
pub fn resolvent_profile_numeric(rho: f64, n: usize) -> Result<f64, QuadError> {
    let nf = n as f64;
    let cfg = QuadConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        t_min: 1e-14,
        t_max: 1e16,
        ..QuadConfig::default()
    };
    let r2 = rho * rho;
    // ∫ e^{-ρ²w - 1/(4w)} w^{-n/2} dw, i.e. f(w) w^{-1-α} with α = n/2 - 1
    let body = integrate_time_singular(|w| (-r2 * w - 0.25 / w).exp(), 0.5 * nf - 1.0, &cfg)?;
    Ok(rho.powf(2.0 - nf) * (4.0 * PI).powf(-0.5 * nf) * body.value)
}

const GRID_LO: f64 = 1e-4;
const GRID_HI: f64 = 50.0;
const GRID_N: usize = 3001;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

struct ProfileGrid {
    tau0: f64,
    step: f64,
    ln_w: Vec<f64>,
}

fn grid_2d() -> &'static ProfileGrid {
    static GRID: OnceLock<ProfileGrid> = OnceLock::new();
    GRID.get_or_init(|| {
        let tau0 = GRID_LO.ln();
        let step = (GRID_HI.ln() - tau0) / (GRID_N - 1) as f64;
        let ln_w = (0..GRID_N)
            .map(|i| {
                let rho = (tau0 + step * i as f64).exp();
                resolvent_profile_numeric(rho, 2)
                    .expect("profile quadrature converges on the grid")
                    .ln()
            })
            .collect();
        ProfileGrid { tau0, step, ln_w }
    })
}

fn interpolate(grid: &ProfileGrid, rho: f64) -> f64 {
    let pos = (rho.ln() - grid.tau0) / grid.step;
    let i = (pos.floor() as isize).clamp(1, GRID_N as isize - 3) as usize;
    let u = pos - i as f64;
    // four-point Lagrange on nodes i-1, i, i+1, i+2
    let (f0, f1, f2, f3) = (grid.ln_w[i - 1], grid.ln_w[i], grid.ln_w[i + 1], grid.ln_w[i + 2]);
    let v = -u * (u - 1.0) * (u - 2.0) / 6.0 * f0 + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * f1
        - (u + 1.0) * u * (u - 2.0) / 2.0 * f2
        + (u + 1.0) * u * (u - 1.0) / 6.0 * f3;
    v.exp()
}

/// Radial profile `W` of the resolvent kernel, `R_t(x) = t^{n/2} W(√t |x|)`.
///
/// Closed form `e^{-ρ}/2` in 1-D. In 2-D the profile is tabulated once on
/// a logarithmic grid over `[1e-4, 50]` and interpolated, with the
/// logarithmic and exponential asymptotics outside the grid. Other
/// dimensions are integrated on demand.
pub fn resolvent_profile(rho: f64, n: usize) -> f64 {
    match n {
        1 => 0.5 * (-rho).exp(),
        2 => {
            if rho < GRID_LO {
                ((2.0 / rho).ln() - EULER_GAMMA) / (2.0 * PI)
            } else if rho > GRID_HI {
                // Hankel expansion of K_0
                let r = 1.0 / rho;
                let (mut term, mut sum) = (1.0, 1.0);
                for k in 1..8 {
                    let m = (2 * k - 1) as f64;
                    term *= -m * m * r / (8.0 * k as f64);
                    sum += term;
                }
                (0.5 * PI * r).sqrt() * (-rho).exp() * sum / (2.0 * PI)
            } else {
                interpolate(grid_2d(), rho)
            }
        }
        _ => resolvent_profile_numeric(rho, n).unwrap_or(f64::NAN),
    }
}

/// `R_t(x) = t K_t(x)`.
pub fn resolvent_kernel(x: &[f64], t: f64, params: &FracParams) -> f64 {
    let n = params.n();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    t.powf(0.5 * n as f64) * resolvent_profile(t.sqrt() * r, n)
}

/// Kernels attached to one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    pub params: FracParams,
}

impl KernelSet {
    pub fn new(params: FracParams) -> Self {
        Self { params }
    }

    pub fn poisson(&self, xi: &[f64], y: f64) -> f64 {
        poisson_kernel(xi, y, &self.params)
    }

    pub fn resolvent(&self, x: &[f64], t: f64) -> f64 {
        resolvent_kernel(x, t, &self.params)
    }

    pub fn profile(&self, rho: f64) -> f64 {
        resolvent_profile(rho, self.params.n())
    }

    /// `∫_{R^n} P(ξ, y) dξ`, with the algebraic tail integrated exactly.
    pub fn poisson_mass(&self, y: f64, cfg: &QuadConfig) -> Result<Estimate, QuadError> {
        let n = self.params.n();
        let nf = n as f64;
        let sp = self.params.sp();
        let c = ln_poisson_const(n, sp).exp() * y.powf(sp);
        let radius = 20.0 * y;
        let f = |r: f64| c * r.powf(nf - 1.0) * (r * r + y * y).powf(-0.5 * (nf + sp));
        let lo = 1e-10 * y;
        let head = power_head(f, lo)?;
        let body = integrate_log(f, lo, radius, &[y], 1e-16, 1e-13, cfg.max_subdivisions)?;
        // r^{n-1}(r²+y²)^{-(n+sp)/2} = r^{-1-sp} (1 + y²/r²)^{-(n+sp)/2}
        let tail = power_kernel_tail(
            |r: f64| c * (1.0 + y * y / (r * r)).powf(-0.5 * (nf + sp)),
            radius,
            sp,
            FarField::Decaying { limit: c },
            1e-16,
            1e-13,
            cfg.max_subdivisions,
        )?;
        Ok((head + body + tail) * sphere_area(n))
    }

    /// `∫_{R^n} R_t(x) dx`.
    pub fn resolvent_mass(&self, t: f64, cfg: &QuadConfig) -> Result<Estimate, QuadError> {
        let n = self.params.n();
        let f = |r: f64| self.resolvent(&[r], t) * r.powf(n as f64 - 1.0);
        let scale = 1.0 / t.sqrt();
        let lo = 1e-12 * scale;
        let head = power_head(f, lo)?;
        let body = integrate_log(f, lo, 60.0 * scale, &[scale], 1e-16, 1e-13, cfg.max_subdivisions)?;
        Ok((head + body) * sphere_area(n))
    }
}
