//! Closed-form constants used to normalize the estimators.

use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

/// Volume of the unit ball in `R^m`: `pi^(m/2) / Gamma(m/2 + 1)`.
pub fn unit_ball_volume(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// `E|det G|` for an `m x m` matrix of independent standard normals.
///
/// The absolute determinant factors into independent chi variables with
/// `1, ..., m` degrees of freedom (QR of the Gaussian matrix), so the
/// expectation is the product of their means `sqrt(2) Gamma((k+1)/2) / Gamma(k/2)`.
pub fn expected_abs_gaussian_det(m: usize) -> f64 {
    (1..=m)
        .map(|k| {
            let k = k as f64;
            (0.5 * 2f64.ln() + ln_gamma((k + 1.0) / 2.0) - ln_gamma(k / 2.0)).exp()
        })
        .product()
}

/// `E|<u, e>|` for `u` uniform on the unit sphere of `R^d` and a fixed unit `e`.
///
/// This is the probability that a hyperplane with uniform direction and
/// offset uniform on `[-R, R]` meets a unit segment, scaled by `2R`.
pub fn hyperplane_constant(d: usize) -> f64 {
    let d = d as f64;
    gamma(d / 2.0) / (PI.sqrt() * gamma((d + 1.0) / 2.0))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
