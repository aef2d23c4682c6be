//! Special functions and dimensional constants.

use statrs::function::gamma::{gamma, gamma_ur, ln_gamma};
use std::f64::consts::PI;

pub fn gamma_fn(x: f64) -> f64 {
    gamma(x)
}

/// Upper incomplete gamma Γ(a, x) for a > 0.
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    gamma_ur(a, x) * gamma(a)
}

pub fn beta_fn(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Surface area |S^{d-1}| of the unit sphere in R^d (2 for d = 1).
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Volume |B_1| of the unit ball in R^d.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// Rising factorial x (x+1) ... (x+n-1).
pub fn rising(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// ln sinc(x) = ln(sin x / x), accurate for small |x|.
pub fn ln_sinc(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-2 {
        -x2 / 6.0 - x2 * x2 / 180.0 - x2 * x2 * x2 / 2835.0 - x2.powi(4) / 37800.0
    } else {
        (x.sin() / x).ln()
    }
}

/// e^{-iz} − 1 + iz, returned as (re, im).
pub fn expi_remainder(z: f64) -> (f64, f64) {
    if z.abs() < 0.1 {
        // cos z − 1 and −(sin z − z)
        let z2 = z * z;
        let mut re = 0.0;
        let mut im = 0.0;
        let mut term = -z2 / 2.0;
        let mut k = 2;
        while term.abs() > 1e-300 && k < 40 {
            re += term;
            term *= -z2 / ((k + 1) * (k + 2)) as f64;
            k += 2;
        }
        let mut term = z2 * z / 6.0;
        let mut k = 3;
        while term.abs() > 1e-300 && k < 40 {
            im += term;
            term *= -z2 / ((k + 1) * (k + 2)) as f64;
            k += 2;
        }
        (re, im)
    } else {
        (z.cos() - 1.0, -z.sin() + z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spheres() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn remainder_matches_direct() {
        for &z in &[1e-3, 0.05, 0.099, 0.2, 1.5] {
            let (re, im) = expi_remainder(z);
            assert!((re - (z.cos() - 1.0)).abs() < 1e-15);
            assert!((im - (z - z.sin())).abs() < 1e-15);
        }
        let (re, im) = expi_remainder(1e-6);
        assert!((re + 0.5e-12).abs() < 1e-24);
        assert!((im - 1e-18 / 6.0).abs() < 1e-32);
    }

    #[test]
    fn sinc_small() {
        for &x in &[1e-4, 0.05, 0.09, 0.3] {
            assert!((ln_sinc(x) - (x.sin() / x).ln()).abs() < 1e-14);
        }
    }
}
