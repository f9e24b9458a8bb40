use std::f64::consts::TAU;
use std::sync::Arc;

use integral_geometry::convex::{CenteredEllipsoid, Frame};
use integral_geometry::density::{d1, d_m, factor_ball, product_d1, vol1_factor, ProductVector};
use integral_geometry::field::{ChartDomain, FieldRef, LinearCombination, ScalarField, Shifted, TrigKind, TrigMode};
use integral_geometry::mixed_volume::{mixed_volume_mc, mixed_volume_oracle, MixedVolumeConfig};
use integral_geometry::roots::{count_roots, ScalarSystem, RESIDUAL_TOL};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Random ellipsoids with axis ratio at most 5: the polarization oracle's
/// inscribed polygons lose accuracy roughly with the squared axis ratio.
fn psd(dim: usize) -> impl Strategy<Value = CenteredEllipsoid> {
    prop::collection::vec(-2.0f64..2.0, dim * dim)
        .prop_map(move |m| CenteredEllipsoid::from_gram(&DMatrix::from_row_slice(dim, dim, &m)).unwrap())
        .prop_filter("moderate eccentricity", |e| {
            let ev = e.eigenvalues();
            ev.min() >= 0.04 * ev.max() && ev.max() > 1e-3
        })
}

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, dim)
}

fn oracle() -> MixedVolumeConfig {
    MixedVolumeConfig::PolarizationOracle { directions: 1440 }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mixed_volume_of_equal_bodies_is_volume(a in psd(2)) {
        let v = mixed_volume_oracle(&[a.clone(), a.clone()], 1440).unwrap().value;
        prop_assert!(close(v, a.volume(), 1e-4));
    }

    #[test]
    fn mixed_volume_is_symmetric_and_homogeneous(a in psd(2), b in psd(2), t in 0.1f64..4.0) {
        let ab = mixed_volume_oracle(&[a.clone(), b.clone()], 1440).unwrap().value;
        let ba = mixed_volume_oracle(&[b.clone(), a.clone()], 1440).unwrap().value;
        prop_assert!(close(ab, ba, 1e-12));
        let ta = CenteredEllipsoid::new(a.matrix() * (t * t)).unwrap();
        let mc = mixed_volume_mc(&[a.clone(), b.clone()], 4096, 3).unwrap().value;
        let mc_t = mixed_volume_mc(&[ta, b], 4096, 3).unwrap().value;
        prop_assert!(close(mc_t, t * mc, 1e-10));
    }

    #[test]
    fn d1_is_twice_the_support(a in psd(3), xi in vector(3)) {
        prop_assert!(close(d1(&a, &xi).unwrap().value, 2.0 * a.support(&xi).unwrap(), 1e-14));
    }

    #[test]
    fn d_m_frame_homogeneity_and_shear(a in psd(3), b in psd(3), u in vector(3), w in vector(3), t in 0.25f64..3.0, flip in any::<bool>(), s in -0.5f64..0.5) {
        // a tiny |t| flattens the projected bodies past what the oracle resolves
        let t = if flip { -t } else { t };
        let frame = Frame::new(&[u.clone(), w.clone()]).unwrap();
        let sv = frame.matrix().singular_values();
        prop_assume!(sv.min() > 0.3 * sv.max());
        let bodies = [a, b];
        let base = d_m(&bodies, &frame, &oracle()).unwrap().value;
        let scaled = d_m(&bodies, &Frame::new(&[u.iter().map(|x| t * x).collect(), w.clone()]).unwrap(), &oracle()).unwrap().value;
        prop_assert!((scaled - t.abs() * base).abs() <= 1e-3 * base.max(1e-9) * t.abs().max(1.0));
        let sheared: Vec<f64> = w.iter().zip(&u).map(|(w, u)| w + s * u).collect();
        let shear = d_m(&bodies, &Frame::new(&[u, sheared]).unwrap(), &oracle()).unwrap().value;
        prop_assert!(close(shear, base, 1e-3));
    }

    #[test]
    fn dependent_frames_give_zero(a in psd(3), b in psd(3), u in vector(3), t in -3.0f64..3.0) {
        let frame = Frame::new(&[u.clone(), u.iter().map(|x| t * x).collect()]).unwrap();
        prop_assert_eq!(d_m(&[a, b], &frame, &oracle()).unwrap().value, 0.0);
    }

    #[test]
    fn direct_summands_multiply(a in psd(2), b in psd(1), x in vector(2), y in -3.0f64..3.0) {
        prop_assume!(x[0].hypot(x[1]) > 0.1 && y.abs() > 0.1);
        let mut qa = DMatrix::zeros(3, 3);
        qa.view_mut((0, 0), (2, 2)).copy_from(a.matrix());
        let mut qb = DMatrix::zeros(3, 3);
        qb[(2, 2)] = b.matrix()[(0, 0)];
        let bodies = [CenteredEllipsoid::new(qa).unwrap(), CenteredEllipsoid::new(qb).unwrap()];
        let frame = Frame::new(&[vec![x[0], x[1], 0.0], vec![0.0, 0.0, y]]).unwrap();
        let lhs = product_d1(&bodies, &frame, &oracle()).unwrap().value;
        let rhs = d1(&a, &x).unwrap().value * d1(&b, &[y]).unwrap().value;
        prop_assert!(close(lhs, rhs, 1e-9));
    }

    #[test]
    fn factor_norms_are_half_of_d1(x in vector(2), y in vector(3)) {
        let v = ProductVector::from_components(&[x.clone(), y.clone()]).unwrap();
        for i in 0..2 {
            let ball = factor_ball(&[2, 3], i).unwrap();
            let lhs = 2.0 * vol1_factor(i, &v).unwrap().value;
            prop_assert!(close(lhs, d1(&ball, v.coords()).unwrap().value, 1e-12));
        }
    }
}

fn trig_sum(coefficients: &[f64], offset: f64) -> LinearCombination {
    let terms = coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let kind = if k % 2 == 0 { TrigKind::Cos } else { TrigKind::Sin };
            (*c, Arc::new(TrigMode::new(vec![(k / 2 + 1) as f64], kind)) as FieldRef)
        })
        .collect();
    LinearCombination::new(terms, offset).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circle_roots_are_translation_equivariant(c in vector(6), a in -2.0f64..2.0, shift in 0.0f64..TAU) {
        let f = trig_sum(&c, a);
        let domain = ChartDomain::standard_torus(1);
        let roots = count_roots(&ScalarSystem::new(domain.clone(), vec![Box::new(f.clone())]).unwrap(), &[256]).unwrap();
        prop_assume!(roots.min_condition() > 1e-4);
        let moved = Shifted { inner: Arc::new(f.clone()), shift: vec![shift] };
        let moved_roots = count_roots(&ScalarSystem::new(domain.clone(), vec![Box::new(moved)]).unwrap(), &[256]).unwrap();
        prop_assert_eq!(roots.count, moved_roots.count);
        for p in &moved_roots.points {
            let back = domain.reduce(&[p[0] + shift]).unwrap();
            prop_assert!(roots.points.iter().any(|q| domain.distance(q, &back) < 1e-7));
        }
        for p in &roots.points {
            prop_assert!(f.value(p).abs() <= RESIDUAL_TOL);
        }
    }
}
