//! Complex gamma function and the hypergeometric series `0F2`.

use crate::error::{Error, Result};
use crate::operator::c64;

/// Relative truncation error of the `0F2` series.
pub const HYPERGEOM_TOL: f64 = 1e-14;
const POLE_TOL: f64 = 1e-12;
const MAX_TERMS: usize = 1_000_000;
const RESCALE_AT: f64 = 1e100;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// `ln Γ(z)` for complex `z` away from the poles.
///
/// The imaginary part is only defined modulo `2π`; use differences of this
/// function through `exp`.
pub fn ln_gamma(z: c64) -> Result<c64> {
    if let Some(n) = pole_index(z) {
        return Err(Error::Pole(n));
    }
    if z.re < 0.5 {
        let pi = std::f64::consts::PI;
        let s = (z * pi).sin();
        return Ok(c64::new(pi.ln(), 0.0) - s.ln() - ln_gamma(c64::new(1.0, 0.0) - z)?);
    }
    let z = z - 1.0;
    let mut acc = c64::new(LANCZOS[0], 0.0);
    for (k, p) in LANCZOS.iter().enumerate().skip(1) {
        acc += c64::new(*p, 0.0) / (z + k as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    Ok((z + 0.5) * t.ln() - t + acc.ln() + half_ln_2pi)
}

/// `Γ(z)`.
pub fn gamma(z: c64) -> Result<c64> {
    Ok(ln_gamma(z)?.exp())
}

/// `n` when `z` lies within the pole tolerance of `-n`.
fn pole_index(z: c64) -> Option<usize> {
    if z.im.abs() > POLE_TOL || z.re > POLE_TOL {
        return None;
    }
    let n = (-z.re).round();
    ((z.re + n).abs() <= POLE_TOL).then_some(n as usize)
}

/// Rising factorial `(z)_n = z (z+1) ... (z+n-1)`.
pub fn pochhammer(z: c64, n: usize) -> c64 {
    (0..n).fold(c64::new(1.0, 0.0), |acc, k| acc * (z + k as f64))
}

/// `ln (z)_n` as a sum of logarithms, safe where the product overflows.
pub fn ln_pochhammer(z: c64, n: usize) -> Result<c64> {
    let mut acc = c64::new(0.0, 0.0);
    for k in 0..n {
        let f = z + k as f64;
        if f.norm() <= POLE_TOL {
            return Err(Error::Pole(k));
        }
        acc += f.ln();
    }
    Ok(acc)
}

/// `ln n!` for integer `n`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `0F2(; b1, b2; z)` as `mantissa * exp(log_scale)`.
///
/// Terms are generated by their ratio and the running sum is rescaled before
/// it can overflow. Summation stops once the terms decrease geometrically with
/// ratio below 1/2 and the next term is below `HYPERGEOM_TOL / 4` relative to
/// the sum, which bounds the tail by half the tolerance.
pub fn hyp0f2_scaled(b1: c64, b2: c64, z: f64) -> Result<(c64, f64)> {
    for b in [b1, b2] {
        if let Some(n) = pole_index(b) {
            return Err(Error::Pole(n));
        }
    }
    let mut sum = c64::new(1.0, 0.0);
    let mut term = c64::new(1.0, 0.0);
    let mut log_scale = 0.0;
    if z == 0.0 {
        return Ok((sum, log_scale));
    }
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = c64::new(z, 0.0) / ((b1 + kf) * (b2 + kf) * (kf + 1.0));
        term *= ratio;
        sum += term;
        if sum.norm() > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            log_scale += RESCALE_AT.ln();
        }
        let next_ratio = z.abs() / ((b1 + kf + 1.0).norm() * (b2 + kf + 1.0).norm() * (kf + 2.0));
        if next_ratio < 0.5 && term.norm() * next_ratio <= 0.25 * HYPERGEOM_TOL * sum.norm() {
            return Ok((sum, log_scale));
        }
    }
    Err(Error::InvalidParameter(format!("0F2 series did not converge in {MAX_TERMS} terms")))
}

/// `0F2(; b1, b2; z)`.
pub fn hyp0f2(b1: c64, b2: c64, z: f64) -> Result<c64> {
    let (m, s) = hyp0f2_scaled(b1, b2, z)?;
    Ok(m * s.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn gamma_at_integers_and_half() {
        for n in 1..15usize {
            let exact: f64 = (1..n).map(|k| k as f64).product();
            let g = gamma(c(n as f64, 0.0)).unwrap();
            assert!((g.re - exact).abs() < 1e-13 * exact, "n = {n}");
            assert!(g.im.abs() < 1e-13 * exact);
        }
        let half = gamma(c(0.5, 0.0)).unwrap();
        assert!((half.re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        // reflection branch: Γ(-1/2) = -2 sqrt(pi)
        let neg = gamma(c(-0.5, 0.0)).unwrap();
        assert!((neg.re + 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_reflection_on_imaginary_axis() {
        // |Γ(iy)|^2 = pi / (y sinh(pi y))
        for y in [0.3, 1.0, 2.5] {
            let g = gamma(c(0.0, y)).unwrap();
            let exact = std::f64::consts::PI / (y * (std::f64::consts::PI * y).sinh());
            assert!((g.norm_sqr() - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn poles_are_reported() {
        assert_eq!(gamma(c(-3.0, 0.0)), Err(Error::Pole(3)));
        assert_eq!(hyp0f2(c(0.0, 0.0), c(1.0, 0.0), 1.0), Err(Error::Pole(0)));
        assert!(hyp0f2(c(-2.0, 1e-3), c(1.0, 0.0), 1.0).is_ok());
    }

    #[test]
    fn gamma_ratio_matches_pochhammer() {
        let x = c(0.3, -1.7);
        for n in [1usize, 4, 11] {
            let ratio = (ln_gamma(x + n as f64).unwrap() - ln_gamma(x).unwrap()).exp();
            let p = pochhammer(x, n);
            assert!((ratio - p).norm() < 1e-12 * p.norm(), "n = {n}");
            let lp = ln_pochhammer(x, n).unwrap().exp();
            assert!((lp - p).norm() < 1e-13 * p.norm());
        }
    }

    #[test]
    fn hyp0f2_trivial_and_naive() {
        assert_eq!(hyp0f2(c(0.7, 0.2), c(1.3, -0.4), 0.0).unwrap(), c(1.0, 0.0));
        for z in [0.5f64, 3.0, 40.0] {
            let mut naive = 0.0;
            let mut fact = 1.0;
            for k in 0..30 {
                if k > 0 {
                    fact *= k as f64;
                }
                naive += z.powi(k) / fact.powi(3);
            }
            let v = hyp0f2(c(1.0, 0.0), c(1.0, 0.0), z).unwrap();
            assert!((v.re - naive).abs() < 1e-14 * naive, "z = {z}");
        }
    }

    #[test]
    fn hyp0f2_scaled_survives_overflow() {
        // the conjugate-pair series is real and positive
        let (m, s) = hyp0f2_scaled(c(0.1, 0.01), c(0.1, -0.01), 1e7).unwrap();
        assert!(s > 0.0 && m.re > 0.0 && m.im.abs() < 1e-10 * m.re);
    }
}
