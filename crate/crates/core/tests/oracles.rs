//! Independent numerical oracles for constants and hand-derived values.

use std::f64::consts::{PI, TAU};

use integral_geometry::bkk::{average_zeros_density, average_zeros_mixedvol, BkkExperiment};
use integral_geometry::crofton::{sample_hyperplane, sphere_crofton_length, SmallCircle};
use integral_geometry::estimate::Estimate;
use integral_geometry::field::{ChartDomain, TrigKind};
use integral_geometry::finsler::FunctionSpace;
use integral_geometry::rng::stream;
use integral_geometry::special::expected_abs_gaussian_det;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// `E|det G|` for standard Gaussian `m x m` matrices, 10^7 samples each.
#[test]
fn gaussian_determinant_moments() {
    let closed = [(2.0 / PI).sqrt(), 1.0, 2.0 * (2.0 / PI).sqrt()];
    for m in 1..=3usize {
        let samples: Vec<f64> = (0..1000u64)
            .flat_map(|block| {
                let mut rng = stream(31 + m as u64, block);
                (0..10_000)
                    .map(|_| {
                        let g = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
                        g.determinant().abs()
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let e = Estimate::from_samples(&samples);
        assert!(e.agrees_with(closed[m - 1], 3.0, 0.0), "m = {m}: {e:?}");
        assert!((expected_abs_gaussian_det(m) - closed[m - 1]).abs() < 1e-14);
    }
}

/// Weighted fraction of sampled hyperplanes separating the endpoints of a
/// unit segment must be 1.
#[test]
fn hyperplane_constant_calibration() {
    for d in [2usize, 3] {
        let mut rng = stream(40, d as u64);
        let p: Vec<f64> = vec![0.3; d];
        let mut q = p.clone();
        q[0] += 0.6;
        q[1] += 0.8;
        let side = |u: &[f64], a: f64, x: &[f64]| u.iter().zip(x).map(|(u, x)| u * x).sum::<f64>() > a;
        let hits: Vec<f64> = (0..100_000)
            .map(|_| {
                let h = sample_hyperplane(d, 2.0, &mut rng).unwrap();
                if side(&h.u, h.a, &p) != side(&h.u, h.a, &q) {
                    h.weight
                } else {
                    0.0
                }
            })
            .collect();
        let e = Estimate::from_samples(&hits);
        assert!(e.agrees_with(1.0, 3.0, 0.0), "d = {d}: {e:?}");
    }
}

#[test]
fn small_circles_on_the_sphere() {
    for alpha in [PI / 6.0, PI / 3.0, 1.2] {
        let c = SmallCircle::new(alpha, [0.4, -0.1, 0.9]).unwrap();
        let e = sphere_crofton_length(&c, 20_000, 41).unwrap().estimate;
        assert!(e.agrees_with(TAU * alpha.sin(), 3.0, 0.0), "alpha = {alpha}: {e:?}");
    }
}

/// For `V = span{cos x1, sin x1, cos x2, sin x2}` the Gram matrix of the
/// gradients is the identity, so both Finsler ellipsoids are unit disks and
/// the average count is `(2!/4) * pi * (2 pi)^2 = 2 pi^3`.
#[test]
fn coupled_torus_closed_form() {
    let modes: Vec<(Vec<f64>, TrigKind)> =
        [[1.0, 0.0], [0.0, 1.0]].iter().flat_map(|k| [TrigKind::Cos, TrigKind::Sin].map(|t| (k.to_vec(), t))).collect();
    let space = FunctionSpace::trig(ChartDomain::standard_torus(2), &modes).unwrap();
    let exp = BkkExperiment::new(vec![space.clone(), space], 10, 1).unwrap().with_grid(vec![16, 16]).unwrap();
    let target = 2.0 * PI.powi(3);
    // the 720-gon inscribed in the disk loses (pi/360)^2/6 of the area
    assert!((average_zeros_density(&exp).unwrap() - target).abs() < 2e-5 * target);
    assert!((average_zeros_mixedvol(&exp).unwrap() - target).abs() < 2e-5 * target);
}
