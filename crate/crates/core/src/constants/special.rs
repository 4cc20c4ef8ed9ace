//! Gamma and modified Bessel functions of the first kind.

use std::f64::consts::PI;

use crate::error::MathError;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_sum(z: f64) -> f64 {
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    acc
}

/// Natural log of |Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64, MathError> {
    if !x.is_finite() || is_pole(x) {
        return Err(MathError::GammaPole(x));
    }
    if x < 0.5 {
        // |Γ(x)| = π / (|sin πx| Γ(1 - x))
        let s = (PI * x).sin().abs();
        return Ok(PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * w.ln() - w + lanczos_sum(z).ln())
}

/// Γ(x) for real x away from the poles at 0, -1, -2, ...
pub fn gamma(x: f64) -> Result<f64, MathError> {
    if !x.is_finite() || is_pole(x) {
        return Err(MathError::GammaPole(x));
    }
    if x < 0.5 {
        return Ok(PI / ((PI * x).sin() * gamma(1.0 - x)?));
    }
    if x == x.floor() && x <= 171.0 {
        // exact factorials
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if x > 171.7 {
        return Err(MathError::Overflow("gamma"));
    }
    let z = x - 1.0;
    let w = z + LANCZOS_G + 0.5;
    // split the power to keep w^(z+1/2) finite near the top of the range
    let half = w.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (-w).exp() * half * lanczos_sum(z))
}

/// Exponentially scaled modified Bessel functions `e^{-z} I_m(z)` for all
/// orders `0..=max_order`.
///
/// Uses the Hankel asymptotic series when `z` is large compared with the
/// squared order, and Miller's backward recurrence normalised by
/// `I_0 + 2 Σ I_k = e^z` otherwise.
pub fn bessel_i_scaled_all(max_order: usize, z: f64) -> Result<Vec<f64>, MathError> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(MathError::Domain("bessel_i requires finite z >= 0"));
    }
    let mut out = vec![0.0; max_order + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let m2 = (max_order * max_order) as f64;
    if z >= (2.0 * m2).max(60.0) {
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = hankel_scaled(m, z);
        }
        return Ok(out);
    }
    miller_scaled(z, &mut out);
    Ok(out)
}

/// `e^{-z} I_m(z)`.
pub fn bessel_i_scaled(m: usize, z: f64) -> Result<f64, MathError> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(MathError::Domain("bessel_i requires finite z >= 0"));
    }
    if z >= (2.0 * (m * m) as f64).max(60.0) {
        return Ok(hankel_scaled(m, z));
    }
    Ok(bessel_i_scaled_all(m, z)?[m])
}

/// `I_m(z)`; fails once `e^z` leaves the double range.
pub fn bessel_i(m: usize, z: f64) -> Result<f64, MathError> {
    let scaled = bessel_i_scaled(m, z)?;
    if z > 709.0 {
        return Err(MathError::Overflow("bessel_i"));
    }
    Ok(scaled * z.exp())
}

fn hankel_scaled(m: usize, z: f64) -> f64 {
    let mu = 4.0 * (m as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * z).sqrt()
}

fn miller_scaled(z: f64, out: &mut [f64]) {
    let max_order = out.len() - 1;
    let start = max_order + 30 + (80.0 * z).sqrt().ceil() as usize + (2.0 * z).ceil() as usize / 4;
    let mut next = 0.0_f64; // I_{k+1}
    let mut cur = 1e-280_f64; // I_k
    let mut sum = 0.0_f64;
    for k in (1..=start).rev() {
        if k <= max_order {
            out[k] = cur;
        }
        sum += 2.0 * cur;
        let prev = (2.0 * k as f64 / z) * cur + next;
        next = cur;
        cur = prev;
        if cur > 1e250 {
            let scale = 1e-250;
            cur *= scale;
            next *= scale;
            sum *= scale;
            for v in out.iter_mut().skip(k.min(max_order + 1)) {
                *v *= scale;
            }
        }
    }
    out[0] = cur;
    sum += cur;
    for v in out.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_i(m: usize, z: f64) -> f64 {
        // independent power series, fine for moderate z
        let mut term = (0.5 * z).powi(m as i32) / gamma(m as f64 + 1.0).unwrap();
        let mut sum = term;
        for k in 1..500 {
            term *= (0.25 * z * z) / (k as f64 * (k + m) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    }

    #[test]
    fn gamma_known_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(5.0).unwrap(), 24.0);
        let rel = (gamma(0.5).unwrap() - PI.sqrt()).abs() / PI.sqrt();
        assert!(rel < 1e-14, "{rel}");
        let g = gamma(-0.5).unwrap();
        assert!((g + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_recurrence_on_range() {
        let mut x = -29.73;
        while x < 29.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert!(((lhs - rhs) / lhs).abs() < 1e-13, "x={x}");
            x += 0.61;
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.1, 0.75, 1.5, 3.3, 12.7, 29.9, -0.5, -2.5] {
            let a = ln_gamma(x).unwrap();
            let b = gamma(x).unwrap().abs().ln();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn gamma_poles() {
        assert!(gamma(0.0).is_err());
        assert!(gamma(-3.0).is_err());
        assert!(ln_gamma(-1.0).is_err());
    }

    #[test]
    fn reflection_identity() {
        for k in 1..10 {
            let s = k as f64 / 10.0;
            let lhs = 1.0 / (gamma(-s).unwrap().abs() * gamma(1.0 + s).unwrap());
            assert!((lhs - (s * PI).sin() / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_matches_series() {
        for &z in &[1e-3, 0.1, 1.0, 4.0, 17.5, 50.0, 120.0, 200.0] {
            for &m in &[0usize, 1, 2, 5, 13, 32, 64] {
                let reference = series_i(m, z);
                if reference < 1e-290 {
                    continue;
                }
                let got = bessel_i(m, z).unwrap();
                let rel = ((got - reference) / reference).abs();
                assert!(rel < 1e-12, "m={m} z={z} rel={rel}");
            }
        }
    }

    #[test]
    fn generating_function_sum() {
        let v = bessel_i_scaled_all(40, 4.0).unwrap();
        let total = v[0] + 2.0 * v[1..].iter().sum::<f64>();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn recurrence_holds() {
        for &z in &[0.5, 3.0, 30.0, 150.0, 5000.0] {
            let v = bessel_i_scaled_all(20, z).unwrap();
            for m in 1..19 {
                let lhs = v[m - 1] - v[m + 1];
                let rhs = 2.0 * m as f64 / z * v[m];
                assert!((lhs - rhs).abs() <= 1e-10 * v[m - 1], "m={m} z={z}");
            }
        }
    }

    #[test]
    fn hankel_and_miller_agree_near_switch() {
        let z = 130.0;
        let mut a = vec![0.0; 9];
        miller_scaled(z, &mut a);
        for (m, v) in a.iter().enumerate() {
            let h = hankel_scaled(m, z);
            assert!(((h - v) / v).abs() < 1e-13, "m={m}");
        }
    }
}
