//! Root counts against a brute-force winding-number count on a grid four
//! times finer than the one handed to the root finder.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use integral_geometry::field::{ChartDomain, FieldRef, LinearCombination, ScalarField, TrigKind, TrigMode};
use integral_geometry::rng::stream;
use integral_geometry::roots::{count_roots, ScalarSystem, RESIDUAL_TOL};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

const RESOLUTION: usize = 64;
const ORACLE: usize = 4 * RESOLUTION;

fn random_equation(seed: u64, which: u64) -> LinearCombination {
    let mut rng = stream(seed, which);
    let mut terms = Vec::new();
    for k in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, -1.0]] {
        for kind in [TrigKind::Cos, TrigKind::Sin] {
            let c: f64 = rng.sample(StandardNormal);
            terms.push((c, Arc::new(TrigMode::new(k.to_vec(), kind)) as FieldRef));
        }
    }
    LinearCombination::new(terms, rng.random_range(-2.0..2.0)).unwrap()
}

fn angle(f: &LinearCombination, g: &LinearCombination, x: [f64; 2]) -> f64 {
    g.value(&x).atan2(f.value(&x))
}

fn wrap(d: f64) -> f64 {
    let d = d.rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Angle swept by `(f, g)` along the segment `a -> b`, bisecting until each
/// step turns by less than a sixth of a revolution.
fn sweep(f: &LinearCombination, g: &LinearCombination, a: [f64; 2], b: [f64; 2], ta: f64, tb: f64, depth: u32) -> f64 {
    let d = wrap(tb - ta);
    if d.abs() < PI / 3.0 || depth == 0 {
        return d;
    }
    let m = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let tm = angle(f, g, m);
    sweep(f, g, a, m, ta, tm, depth - 1) + sweep(f, g, m, b, tm, tb, depth - 1)
}

/// Sum over fine cells of the absolute winding number of `(f, g)`.
fn winding_count(f: &LinearCombination, g: &LinearCombination) -> usize {
    let h = TAU / ORACLE as f64;
    let node = |i: usize, j: usize| [i as f64 * h, j as f64 * h];
    let theta: Vec<f64> =
        (0..ORACLE * ORACLE).into_par_iter().map(|k| angle(f, g, node(k / ORACLE, k % ORACLE))).collect();
    let t = |i: usize, j: usize| theta[(i % ORACLE) * ORACLE + j % ORACLE];
    // horizontal edge (i, j) -> (i + 1, j) and vertical edge (i, j) -> (i, j + 1)
    let edges: Vec<(f64, f64)> = (0..ORACLE * ORACLE)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ORACLE, k % ORACLE);
            (
                sweep(f, g, node(i, j), node(i + 1, j), t(i, j), t(i + 1, j), 20),
                sweep(f, g, node(i, j), node(i, j + 1), t(i, j), t(i, j + 1), 20),
            )
        })
        .collect();
    let e = |i: usize, j: usize| edges[(i % ORACLE) * ORACLE + j % ORACLE];
    (0..ORACLE * ORACLE)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ORACLE, k % ORACLE);
            let total = e(i, j).0 + e(i + 1, j).1 - e(i, j + 1).0 - e(i, j).1;
            (total / TAU).round().abs() as usize
        })
        .sum()
}

#[test]
fn counts_match_fine_grid_oracle() {
    let draws = 1000u64;
    let mut disagreements = Vec::new();
    for seed in 0..draws {
        let f = random_equation(seed, 0);
        let g = random_equation(seed, 1);
        let sys =
            ScalarSystem::new(ChartDomain::standard_torus(2), vec![Box::new(f.clone()), Box::new(g.clone())]).unwrap();
        let roots = count_roots(&sys, &[RESOLUTION, RESOLUTION]).unwrap();
        for p in &roots.points {
            assert!(f.value(p).abs() <= RESIDUAL_TOL && g.value(p).abs() <= RESIDUAL_TOL, "residual at {p:?}");
        }
        let oracle = winding_count(&f, &g);
        if oracle != roots.count {
            disagreements.push((seed, roots.count, oracle, roots.inconclusive_cells));
        }
    }
    println!("{} of {draws} draws disagree: {disagreements:?}", disagreements.len());
    assert!(disagreements.len() * 100 <= draws as usize, "{disagreements:?}");
}

#[test]
fn one_dimensional_counts_match_fine_sign_changes() {
    let mut disagreements = 0;
    for seed in 0..1000u64 {
        let mut rng = stream(77, seed);
        let terms: Vec<(f64, FieldRef)> = (1..=4)
            .flat_map(|k| [TrigKind::Cos, TrigKind::Sin].map(|kind| (k as f64, kind)))
            .map(|(k, kind)| (rng.sample::<f64, _>(StandardNormal), Arc::new(TrigMode::new(vec![k], kind)) as FieldRef))
            .collect();
        let f = LinearCombination::new(terms, rng.random_range(-2.0..2.0)).unwrap();
        let sys = ScalarSystem::new(ChartDomain::standard_torus(1), vec![Box::new(f.clone())]).unwrap();
        let roots = count_roots(&sys, &[RESOLUTION]).unwrap();
        for p in &roots.points {
            assert!(f.value(p).abs() <= RESIDUAL_TOL);
        }
        let n = 64 * ORACLE;
        let v: Vec<f64> = (0..n).map(|k| f.value(&[TAU * k as f64 / n as f64])).collect();
        let oracle = (0..n).filter(|&k| (v[k] > 0.0) != (v[(k + 1) % n] > 0.0)).count();
        if oracle != roots.count {
            disagreements += 1;
        }
    }
    assert!(disagreements <= 10, "{disagreements} disagreements");
}
