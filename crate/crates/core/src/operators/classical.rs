//! Poisson kernel, disc automorphisms and the Green's function of the unit disc.

use std::f64::consts::PI;

use crate::{BlabError, Complex64, Result};

/// `P(z, ζ) = (1 - |z|²)/|ζ - z|²` for `|z| < 1`, `|ζ| = 1`.
pub fn poisson_kernel(z: Complex64, zeta: Complex64) -> Result<f64> {
    check_poisson_args(z, zeta)?;
    Ok((1.0 - z.norm_sqr()) / (zeta - z).norm_sqr())
}

/// The same kernel as `Re((ζ + z)/(ζ - z))`.
pub fn poisson_kernel_real_part(z: Complex64, zeta: Complex64) -> Result<f64> {
    check_poisson_args(z, zeta)?;
    Ok(((zeta + z) / (zeta - z)).re)
}

fn check_poisson_args(z: Complex64, zeta: Complex64) -> Result<()> {
    if (zeta.norm() - 1.0).abs() > 1e-12 {
        return Err(BlabError::InvalidArgument(format!("|ζ| must be 1, got {}", zeta.norm())));
    }
    if !(z.norm() < 1.0) {
        return Err(BlabError::OutsideDomain { z, domain: "disc:0:1".into() });
    }
    Ok(())
}

/// Trapezoid-rule mean of `P(s z, e^{it})²` over `n_angles` angles.
pub fn poisson_square_mean_with(s: f64, z: Complex64, n_angles: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BlabError::InvalidArgument(format!("need 0 < s < 1, got {s}")));
    }
    let sz = z * s;
    let mut sum = 0.0;
    for k in 0..n_angles {
        let zeta = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n_angles as f64);
        sum += poisson_kernel(sz, zeta)?.powi(2);
    }
    Ok(sum / n_angles as f64)
}

/// [`poisson_square_mean_with`] at 512 angles.
pub fn poisson_square_mean(s: f64, z: Complex64) -> Result<f64> {
    poisson_square_mean_with(s, z, 512)
}

/// `(1 + s²|z|²)/(1 - s²|z|²)`.
pub fn poisson_square_mean_closed_form(s: f64, z: Complex64) -> f64 {
    let t = s * s * z.norm_sqr();
    (1.0 + t) / (1.0 - t)
}

/// `ψ_a(z) = (a - z)/(1 - ā z)`, an involution of the unit disc.
pub fn mobius(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// `G_a(z) = log|ψ_a(z)|`; `-∞` at the pole `z = a`.
pub fn green(a: Complex64, z: Complex64) -> f64 {
    let num = (a - z).norm();
    if num == 0.0 {
        return f64::NEG_INFINITY;
    }
    num.ln() - (Complex64::new(1.0, 0.0) - a.conj() * z).norm().ln()
}

/// `½(|ψ_a(z)|² - 1)`, the Berezin transform of `G_a` on the unit disc.
pub fn green_berezin_closed_form(a: Complex64, z: Complex64) -> f64 {
    0.5 * (mobius(a, z).norm_sqr() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn poisson_basics() {
        let zeta = Complex64::from_polar(1.0, 1.1);
        assert!((poisson_kernel(c(0.0, 0.0), zeta).unwrap() - 1.0).abs() < 1e-15);
        let z = Complex64::from_polar(0.7, 0.3);
        let mean: f64 = (0..512)
            .map(|k| poisson_kernel(z, Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 512.0)).unwrap())
            .sum::<f64>()
            / 512.0;
        assert!((mean - 1.0).abs() < 1e-13);
        for k in 0..16 {
            let zeta = Complex64::from_polar(1.0, 0.4 * k as f64);
            let a = poisson_kernel(z, zeta).unwrap();
            let b = poisson_kernel_real_part(z, zeta).unwrap();
            assert!((a - b).abs() < 1e-13 * a);
        }
        assert!(poisson_kernel(z, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn poisson_square_mean_examples() {
        assert!((poisson_square_mean(0.5, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((poisson_square_mean(1e-9, c(0.9, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        let v = poisson_square_mean(0.5, c(0.8, 0.0)).unwrap();
        assert!((v - 1.16 / 0.84).abs() < 1e-13);
        assert!((v - 1.3809524).abs() < 1e-7);
        let w = poisson_square_mean(0.5, Complex64::from_polar(0.8, 2.0)).unwrap();
        assert!((v - w).abs() < 1e-13);
        assert!(poisson_square_mean(1.0, c(0.1, 0.0)).is_err());
    }

    #[test]
    fn mobius_involution_and_green_pole() {
        let a = c(0.4, -0.3);
        assert_eq!(mobius(a, a), c(0.0, 0.0));
        assert_eq!(green(a, a), f64::NEG_INFINITY);
        let z = c(0.25, 0.5);
        assert_eq!(mobius(c(0.0, 0.0), z), -z);
        assert!((mobius(a, mobius(a, z)) - z).norm() < 1e-15);
    }
}
