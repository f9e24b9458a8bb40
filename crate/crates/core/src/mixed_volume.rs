//! Mixed volumes of centered ellipsoids.
//!
//! Two independent routes:
//!
//! * [`mixed_volume_mc`]: for ellipsoids `A_i B` (with `A_i = Q_i^{1/2}`) the mixed
//!   volume is proportional to `E|det(A_1 g_1, ..., A_m g_m)|` for independent
//!   standard Gaussian vectors `g_i`. The constant is fixed by the unit-ball case,
//!   `V(B, ..., B) = kappa_m`, giving
//!   `V = kappa_m E|det(A_i g_i)| / E|det G|`.
//! * [`mixed_volume_oracle`]: inclusion-exclusion over Minkowski sums, each sum's
//!   volume measured by the convex hull of its boundary points on a quasi-uniform
//!   direction set. Limited to `m <= 3`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::{CenteredEllipsoid, SupportSum};
use crate::error::{invalid, Error, Result};
use crate::estimate::Estimate;
use crate::hull::hull_volume;
use crate::rng::{gaussian_vector, stream};
use crate::special::{expected_abs_gaussian_det, factorial, unit_ball_volume};

/// Trials per random stream in [`mixed_volume_mc`]. Block `k` uses stream `k`.
pub const MC_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GaussianMc,
    PolarizationOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedVolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub method: Method,
}

impl MixedVolumeEstimate {
    pub fn as_estimate(&self) -> Estimate {
        Estimate { value: self.value, std_error: self.std_error, samples: self.samples }
    }
}

/// How mixed volumes are evaluated inside densities and quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum MixedVolumeConfig {
    /// Gaussian determinant estimator. Reusing the seed at every call gives
    /// common random numbers across a quadrature grid.
    GaussianMc { trials: u64, seed: u64 },
    /// Polarization oracle; requires `m <= 3`.
    PolarizationOracle { directions: usize },
}

impl Default for MixedVolumeConfig {
    fn default() -> Self {
        MixedVolumeConfig::PolarizationOracle { directions: 720 }
    }
}

impl MixedVolumeConfig {
    pub fn compute(&self, bodies: &[CenteredEllipsoid]) -> Result<MixedVolumeEstimate> {
        match *self {
            MixedVolumeConfig::GaussianMc { trials, seed } => mixed_volume_mc(bodies, trials, seed),
            MixedVolumeConfig::PolarizationOracle { directions } => mixed_volume_oracle(bodies, directions),
        }
    }
}

fn check_bodies(bodies: &[CenteredEllipsoid]) -> Result<usize> {
    let m = bodies.len();
    if m == 0 {
        return Err(invalid("mixed volume needs at least one body"));
    }
    for b in bodies {
        if b.dim() != m {
            return Err(invalid(format!(
                "mixed volume of {m} bodies needs bodies in R^{m}, got dimension {}",
                b.dim()
            )));
        }
    }
    Ok(m)
}

fn abs_det_small(a: &[f64], m: usize) -> f64 {
    match m {
        1 => a[0].abs(),
        2 => (a[0] * a[3] - a[1] * a[2]).abs(),
        3 => (a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
            + a[2] * (a[3] * a[7] - a[4] * a[6]))
            .abs(),
        _ => DMatrix::from_row_slice(m, m, a).determinant().abs(),
    }
}

/// Gaussian-determinant Monte Carlo estimate of `V(E_1, ..., E_m)`.
pub fn mixed_volume_mc(bodies: &[CenteredEllipsoid], trials: u64, seed: u64) -> Result<MixedVolumeEstimate> {
    let m = check_bodies(bodies)?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let roots: Vec<&DMatrix<f64>> = bodies.iter().map(|b| b.sqrt_matrix()).collect();
    let blocks = trials.div_ceil(MC_BLOCK);

    // (sum, sum of squares) per block, reduced in block order.
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = stream(seed, block);
            let n = (trials - block * MC_BLOCK).min(MC_BLOCK);
            let mut g = vec![0.0; m];
            let mut cols = vec![0.0; m * m];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                // cols is row-major with column i = A_i g_i
                for (i, a) in roots.iter().enumerate() {
                    gaussian_vector(&mut rng, &mut g);
                    for r in 0..m {
                        let mut acc = 0.0;
                        for c in 0..m {
                            acc += a[(r, c)] * g[c];
                        }
                        cols[r * m + i] = acc;
                    }
                }
                let d = abs_det_small(&cols, m);
                s += d;
                s2 += d * d;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum2) = partial.iter().fold((0.0, 0.0), |(a, b), &(s, s2)| (a + s, b + s2));
    let n = trials as f64;
    let mean = sum / n;
    let var = if trials > 1 { ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    let scale = unit_ball_volume(m) / expected_abs_gaussian_det(m);
    Ok(MixedVolumeEstimate {
        value: scale * mean,
        std_error: scale * (var / n).sqrt(),
        samples: trials,
        method: Method::GaussianMc,
    })
}

/// Quasi-uniform unit directions in `R^m` for `m` in 1..=3.
pub fn quasi_uniform_directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        1 => (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => panic!("quasi-uniform directions only for m <= 3"),
    }
}

/// Volume of the inscribed hull of a Minkowski sum's boundary points.
pub fn inscribed_sum_volume(sum: &SupportSum, directions: &[Vec<f64>]) -> f64 {
    let Some(m) = sum.dim() else { return 0.0 };
    let points: Vec<Vec<f64>> = directions
        .iter()
        .map(|u| {
            let mut x = vec![0.0; m];
            sum.support_point(u, &mut x);
            x
        })
        .collect();
    hull_volume(&points, m)
}

/// Polarization oracle:
/// `V = (1/m!) sum_{S nonempty} (-1)^{m-|S|} vol(sum_{i in S} E_i)`.
pub fn mixed_volume_oracle(bodies: &[CenteredEllipsoid], directions: usize) -> Result<MixedVolumeEstimate> {
    let m = check_bodies(bodies)?;
    if m > 3 {
        return Err(Error::Unsupported(format!("polarization oracle is limited to m <= 3, got m = {m}")));
    }
    if directions < 20 * m {
        return Err(invalid(format!("oracle needs at least {} directions, got {directions}", 20 * m)));
    }
    let dirs = quasi_uniform_directions(m, directions);
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let subset: Vec<CenteredEllipsoid> =
            (0..m).filter(|i| mask & (1 << i) != 0).map(|i| bodies[i].clone()).collect();
        let size = subset.len();
        let vol = inscribed_sum_volume(&SupportSum::new(subset)?, &dirs);
        let sign = if (m - size).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * vol;
    }
    Ok(MixedVolumeEstimate {
        value: (total / factorial(m)).max(0.0),
        std_error: 0.0,
        samples: directions as u64,
        method: Method::PolarizationOracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn diag(d: &[f64]) -> CenteredEllipsoid {
        CenteredEllipsoid::diagonal(d).unwrap()
    }

    #[test]
    fn mc_unit_balls() {
        let b2 = CenteredEllipsoid::ball(2);
        let e = mixed_volume_mc(&[b2.clone(), b2], 200_000, 1).unwrap();
        assert!(e.as_estimate().agrees_with(PI, 3.0, 0.0), "{e:?}");
        let b3 = CenteredEllipsoid::ball(3);
        let e = mixed_volume_mc(&[b3.clone(), b3.clone(), b3], 200_000, 2).unwrap();
        assert!(e.as_estimate().agrees_with(4.0 * PI / 3.0, 3.0, 0.0), "{e:?}");
        assert_eq!(e.method, Method::GaussianMc);
    }

    #[test]
    fn mc_orthogonal_segments() {
        let e = mixed_volume_mc(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], 400_000, 3).unwrap();
        assert!(e.as_estimate().agrees_with(2.0, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn mc_is_deterministic_and_validates() {
        let b = CenteredEllipsoid::ball(2);
        let a = mixed_volume_mc(&[b.clone(), b.clone()], 10_000, 9).unwrap();
        let c = mixed_volume_mc(&[b.clone(), b.clone()], 10_000, 9).unwrap();
        assert_eq!(a, c);
        assert!(mixed_volume_mc(&[b.clone(), b.clone()], 0, 9).is_err());
        assert!(mixed_volume_mc(std::slice::from_ref(&b), 10, 9).is_err());
    }

    #[test]
    fn oracle_examples() {
        let e = mixed_volume_oracle(&[diag(&[1.0])], 20).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
        assert_eq!(e.std_error, 0.0);
        let b = CenteredEllipsoid::ball(2);
        let e = mixed_volume_oracle(&[b.clone(), b], 720).unwrap();
        assert!((e.value - PI).abs() < 0.005 * PI);
        let e = mixed_volume_oracle(&[diag(&[4.0, 0.0]), diag(&[0.0, 1.0])], 40).unwrap();
        assert!((e.value - 4.0).abs() < 1e-12, "{e:?}");
        let e = mixed_volume_oracle(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])], 40).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_three_dimensional() {
        let b = CenteredEllipsoid::ball(3);
        let e = mixed_volume_oracle(&[b.clone(), b.clone(), b], 3000).unwrap();
        assert!((e.value - 4.0 * PI / 3.0).abs() < 0.01 * 4.0 * PI / 3.0, "{e:?}");
        // three orthogonal segments of length 2: V = 8 / 3! = 4/3
        let e = mixed_volume_oracle(&[diag(&[1.0, 0.0, 0.0]), diag(&[0.0, 1.0, 0.0]), diag(&[0.0, 0.0, 1.0])], 200)
            .unwrap();
        assert!((e.value - 4.0 / 3.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn oracle_rejects() {
        let b = CenteredEllipsoid::ball(4);
        assert!(matches!(mixed_volume_oracle(&vec![b; 4], 1000), Err(Error::Unsupported(_))));
        let b = CenteredEllipsoid::ball(2);
        assert!(mixed_volume_oracle(&[b.clone(), b], 39).is_err());
    }

    #[test]
    fn oracle_degenerate_sum_is_zero() {
        let s = diag(&[1.0, 0.0]);
        let e = mixed_volume_oracle(&[s.clone(), s], 100).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn oracle_monotone_under_refinement() {
        let a = CenteredEllipsoid::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap();
        let b = CenteredEllipsoid::from_rows(&[vec![1.0, -0.2], vec![-0.2, 1.5]]).unwrap();
        let sum = SupportSum::new(vec![a, b]).unwrap();
        // doubling an even-spaced direction set contains the coarse one after a
        // half-step shift, so compare nested sets built explicitly
        let coarse: Vec<Vec<f64>> = (0..60)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 60.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let fine: Vec<Vec<f64>> = (0..120)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 120.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!(inscribed_sum_volume(&sum, &fine) >= inscribed_sum_volume(&sum, &coarse));
    }
}
