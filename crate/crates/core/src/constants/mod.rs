//! Parameter triples, normalisation constants and the special functions
//! they are built from.

mod special;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{EvalError, MathError};

pub use special::{bessel_i, bessel_i_scaled, bessel_i_scaled_all, gamma, ln_gamma};

/// The triple `(n, s, p)`: dimension, fractional order, and power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    n: usize,
    s: f64,
    p: f64,
    small_p_regime: bool,
    sp_ge_2: bool,
}

impl FracParams {
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self, EvalError> {
        if n == 0 {
            return Err(EvalError::Params("dimension n must be >= 1".into()));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(EvalError::Params(format!("s must lie in (0,1), got {s}")));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(EvalError::Params(format!("p must lie in (1,inf), got {p}")));
        }
        Ok(Self {
            n,
            s,
            p,
            small_p_regime: p < 2.0 / (2.0 - s),
            sp_ge_2: s * p >= 2.0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// `p < 2/(2-s)`: pointwise evaluation needs a nonvanishing gradient.
    pub fn small_p_regime(&self) -> bool {
        self.small_p_regime
    }

    pub fn sp_ge_2(&self) -> bool {
        self.sp_ge_2
    }

    pub fn with_s(&self, s: f64) -> Result<Self, EvalError> {
        Self::new(self.n, s, self.p)
    }

    pub fn with_p(&self, p: f64) -> Result<Self, EvalError> {
        Self::new(self.n, self.s, p)
    }
}

/// The four normalisation constants for one parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

fn ln_c1(params: &FracParams) -> Result<f64, MathError> {
    let (n, s, p) = (params.n as f64, params.s, params.p);
    let sp = s * p;
    Ok((0.5 * sp).ln() + (1.0 - s).ln() + (2.0 * s - 1.0) * LN_2 - 0.5 * (n - 1.0) * PI.ln()
        + ln_gamma(0.5 * (n + sp))?
        - ln_gamma(0.5 * (p + 1.0))?
        - ln_gamma(2.0 - s)?)
}

/// Normalisation of the singular-integral definition. Chosen so that the
/// operator tends to `-Δ_p` as `s → 1` and to `(-Δ)^s` as `p → 2`.
pub fn c1(params: &FracParams) -> f64 {
    // all Gamma arguments are positive for valid parameters
    ln_c1(params).map(f64::exp).expect("valid FracParams")
}

/// The classical constant of the linear fractional Laplacian,
/// `s(1-s) 4^s Γ((n+2s)/2) / (π^{n/2} Γ(2-s))`.
pub fn c_ns(n: usize, s: f64) -> f64 {
    let n = n as f64;
    let ln = s.ln() + (1.0 - s).ln() + 2.0 * s * LN_2 + ln_gamma(0.5 * n + s).unwrap()
        - 0.5 * n * PI.ln()
        - ln_gamma(2.0 - s).unwrap();
    ln.exp()
}

pub fn constant_set(params: &FracParams) -> ConstantSet {
    let n = params.n as f64;
    let sp = params.sp();
    let l1 = ln_c1(params).expect("valid FracParams");
    let lg_nsp = ln_gamma(0.5 * (n + sp)).unwrap();
    let half_n_ln_pi = 0.5 * n * PI.ln();
    let l2 = l1 + half_n_ln_pi - sp * LN_2 - lg_nsp;
    let l3 = l1 + half_n_ln_pi + ln_gamma(0.5 * sp).unwrap() - lg_nsp;
    let l4 = l2 - ln_gamma(1.0 + 0.5 * sp).unwrap();
    ConstantSet {
        c1: l1.exp(),
        c2: l2.exp(),
        c3: l3.exp(),
        c4: l4.exp(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation_and_flags() {
        assert!(FracParams::new(0, 0.5, 2.0).is_err());
        assert!(FracParams::new(1, 1.0, 2.0).is_err());
        assert!(FracParams::new(1, 0.5, 1.0).is_err());
        let q = FracParams::new(1, 0.5, 1.3).unwrap();
        assert!(q.small_p_regime());
        assert!(!FracParams::new(1, 0.5, 1.4).unwrap().small_p_regime());
        assert!(FracParams::new(1, 0.9, 3.0).unwrap().sp_ge_2());
        assert!(!FracParams::new(1, 0.5, 3.0).unwrap().sp_ge_2());
    }

    #[test]
    fn c1_at_half_is_one_over_pi() {
        let c = c1(&FracParams::new(1, 0.5, 2.0).unwrap());
        assert!((c - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn c1_reduces_to_classical_at_p2() {
        for n in 1..=3 {
            for k in 1..10 {
                let s = k as f64 / 10.0;
                let a = c1(&FracParams::new(n, s, 2.0).unwrap());
                let b = c_ns(n, s);
                // second expression of the classical constant, via |Γ(-s)|
                let alt = 4f64.powf(s) * gamma(0.5 * n as f64 + s).unwrap()
                    / (PI.powf(0.5 * n as f64) * gamma(-s).unwrap().abs());
                assert!(((a - b) / b).abs() < 1e-12);
                assert!(((alt - b) / b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn c1_general_value() {
        // direct product of Gamma values, no logs
        let (n, s, p) = (2.0, 0.75, 3.0);
        let sp = s * p;
        let expected = 0.5 * sp * (1.0 - s) * 2f64.powf(2.0 * s - 1.0) / PI.powf(0.5 * (n - 1.0))
            * gamma(0.5 * (n + sp)).unwrap()
            / (gamma(0.5 * (p + 1.0)).unwrap() * gamma(2.0 - s).unwrap());
        let got = c1(&FracParams::new(2, s, p).unwrap());
        assert!(((got - expected) / expected).abs() < 1e-13);
    }

    #[test]
    fn p2_closed_forms() {
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let c = constant_set(&FracParams::new(1, s, 2.0).unwrap());
            let g = gamma(-s).unwrap().abs();
            assert!((c.c2 - 1.0 / g).abs() < 1e-12);
            assert!((c.c3 - 4f64.powf(s) * gamma(s).unwrap() / g).abs() < 1e-12);
            assert!((c.c4 - (s * PI).sin() / PI).abs() < 1e-12);
        }
        let c = constant_set(&FracParams::new(1, 0.5, 2.0).unwrap());
        assert!((c.c2 - 0.282_094_791_773_878_1).abs() < 1e-13);
        assert!((c.c4 - 1.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn dimension_independence() {
        for &(s, p) in &[(0.25, 1.5), (0.5, 3.0), (0.75, 2.0), (0.9, 7.5)] {
            let base = constant_set(&FracParams::new(1, s, p).unwrap());
            for n in 2..=5 {
                let c = constant_set(&FracParams::new(n, s, p).unwrap());
                assert!((c.c2 - base.c2).abs() <= 1e-12 * base.c2);
                assert!((c.c3 - base.c3).abs() <= 1e-12 * base.c3);
                assert!((c.c4 - base.c4).abs() <= 1e-12 * base.c4);
            }
        }
    }
}
