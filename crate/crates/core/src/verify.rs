//! Acceptance suite: closed-form desk cases and cross-method agreement.
//!
//! `Profile::Full` uses the stated trial counts and runtime budgets;
//! `Profile::Quick` cuts trial counts for a run of about a minute and does
//! not enforce budgets.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bkk::{self, BkkExperiment};
use crate::convex::{CenteredEllipsoid, Frame};
use crate::crofton::{
    euclid_crofton_length, product_crofton_check, sphere_crofton_length, Circle, CurveModel, Segment, SmallCircle,
    Transformed, TrigCurve,
};
use crate::density::{d1, d_m, product_d1};
use crate::error::Result;
use crate::estimate::Estimate;
use crate::field::{ChartDomain, FieldRef, LinearCombination, ScalarField, Shifted, TrigKind, TrigMode};
use crate::finsler::{symplectic_volume, FunctionSpace};
use crate::mixed_volume::{mixed_volume_mc, mixed_volume_oracle, MixedVolumeConfig};
use crate::rng::{gaussian_vector, stream};
use crate::roots::{count_roots, ScalarSystem, SING_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

impl Profile {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Profile::Quick => quick,
            Profile::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

/// Estimate within `k` std errors plus `rel` of `target`.
fn check_estimate(name: &str, e: &Estimate, target: f64, k: f64, rel: f64) -> Check {
    check(name, e.agrees_with(target, k, rel), format!("{:.6} +- {:.2e} vs {target:.6}", e.value, e.std_error))
}

fn check_rel(name: &str, value: f64, target: f64, rel: f64) -> Check {
    let gap = (value - target).abs() / target.abs().max(f64::MIN_POSITIVE);
    check(name, gap <= rel, format!("{value:.8} vs {target:.8} (rel {gap:.2e})"))
}

fn check_z(name: &str, a: &Estimate, b: &Estimate, k: f64) -> Check {
    let z = a.z_score(b);
    check(name, z <= k, format!("{:.6} vs {:.6}, z = {z:.2}", a.value, b.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub budget_s: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.runtime_s,
            self.budget_s
        )?;
        for c in &self.checks {
            write!(f, "\n    {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CRITERIA: usize = 9;

const TITLES: [&str; CRITERIA] = [
    "mixed-volume kernel",
    "product of 1-densities on direct summands",
    "euclidean Crofton",
    "sphere Crofton",
    "product Crofton on S2 x S2",
    "average zeros, circle space on T1",
    "average zeros, decoupled trig spaces on T2",
    "average zeros, coupled trig spaces on T2",
    "property suites",
];

const BUDGETS: [f64; CRITERIA] = [30.0, 10.0, 60.0, 60.0, 90.0, 60.0, 300.0, 600.0, 900.0];

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize, profile: Profile) -> Result<CriterionOutcome> {
    assert!((1..=CRITERIA).contains(&id), "criterion ids run from 1 to {CRITERIA}");
    let start = Instant::now();
    let checks = match id {
        1 => mixed_volume_kernel(profile)?,
        2 => direct_summands(profile)?,
        3 => euclid_crofton(profile)?,
        4 => sphere_crofton(profile)?,
        5 => product_crofton(profile)?,
        6 => bkk_circle(profile)?,
        7 => bkk_decoupled(profile)?,
        8 => bkk_coupled(profile)?,
        _ => properties(profile)?,
    };
    let runtime_s = start.elapsed().as_secs_f64();
    let budget_s = BUDGETS[id - 1];
    let in_budget = profile == Profile::Quick || runtime_s <= budget_s;
    let mut outcome = CriterionOutcome {
        id,
        title: TITLES[id - 1].to_string(),
        passed: in_budget && checks.iter().all(|c| c.passed),
        checks,
        runtime_s,
        budget_s,
    };
    if !in_budget {
        outcome.checks.push(check("runtime", false, format!("{runtime_s:.1} s over the {budget_s:.0} s budget")));
    }
    Ok(outcome)
}

pub fn run_all(profile: Profile) -> Result<Vec<CriterionOutcome>> {
    (1..=CRITERIA).map(|id| run_criterion(id, profile)).collect()
}

fn random_psd<R: Rng>(rng: &mut R, dim: usize) -> CenteredEllipsoid {
    let mut m = vec![0.0; dim * dim];
    gaussian_vector(rng, &mut m);
    let m = nalgebra::DMatrix::from_row_slice(dim, dim, &m);
    CenteredEllipsoid::from_gram(&m).expect("gram matrices are PSD")
}

fn mixed_volume_kernel(_p: Profile) -> Result<Vec<Check>> {
    // the 0.5% segment tolerance needs the full count; it takes seconds anyway
    let trials = 1_000_000;
    let b2 = CenteredEllipsoid::ball(2);
    let b3 = CenteredEllipsoid::ball(3);
    let s1 = CenteredEllipsoid::diagonal(&[1.0, 0.0])?;
    let s2 = CenteredEllipsoid::diagonal(&[0.0, 1.0])?;
    let mut out = vec![
        check_estimate("V(B,B) = pi", &mixed_volume_mc(&[b2.clone(), b2], trials, 101)?.as_estimate(), PI, 3.0, 0.0),
        check_estimate(
            "V(B,B,B) = 4 pi / 3",
            &mixed_volume_mc(&[b3.clone(), b3.clone(), b3], trials, 102)?.as_estimate(),
            4.0 * PI / 3.0,
            3.0,
            0.0,
        ),
        check_rel("orthogonal segments = 2", mixed_volume_mc(&[s1, s2], trials, 103)?.value, 2.0, 0.005),
    ];
    let mut worst = 0.0f64;
    let mut failures = 0;
    for case in 0..20 {
        let mut rng = stream(104, case);
        let pair = [random_psd(&mut rng, 2), random_psd(&mut rng, 2)];
        let mc = mixed_volume_mc(&pair, trials, 1000 + case)?;
        let oracle = mixed_volume_oracle(&pair, 2000)?.value;
        let slack = 3.0 * mc.std_error + 0.01 * oracle;
        worst = worst.max((mc.value - oracle).abs() / slack);
        if (mc.value - oracle).abs() > slack {
            failures += 1;
        }
    }
    out.push(check(
        "MC vs polarization oracle, 20 random pairs",
        failures == 0,
        format!("{failures} failures, worst gap {worst:.2} of allowed"),
    ));
    Ok(out)
}

fn direct_summands(_p: Profile) -> Result<Vec<Check>> {
    let config = MixedVolumeConfig::default();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for case in 0..50u64 {
        let mut rng = stream(200, case);
        let m = if case % 2 == 0 { 2 } else { 3 };
        let blocks: Vec<usize> = (0..m).map(|_| rng.random_range(1..=if m == 2 { 3 } else { 2 })).collect();
        let total: usize = blocks.iter().sum();
        let mut bodies = Vec::with_capacity(m);
        let mut frame = Vec::with_capacity(m);
        let mut expected = 1.0;
        let mut offset = 0;
        for &k in &blocks {
            let factor = random_psd(&mut rng, k);
            let mut xi_k = vec![0.0; k];
            gaussian_vector(&mut rng, &mut xi_k);
            expected *= d1(&factor, &xi_k)?.value;
            let mut q = nalgebra::DMatrix::zeros(total, total);
            q.view_mut((offset, offset), (k, k)).copy_from(factor.matrix());
            bodies.push(CenteredEllipsoid::new(q)?);
            let mut xi = vec![0.0; total];
            xi[offset..offset + k].copy_from_slice(&xi_k);
            frame.push(xi);
            offset += k;
        }
        let got = product_d1(&bodies, &Frame::new(&frame)?, &config)?.value;
        let gap = (got - expected).abs() / expected;
        worst = worst.max(gap);
        if gap > 0.01 {
            failures += 1;
        }
    }
    Ok(vec![check(
        "product_d1 = prod d1 on 50 factor-supported cases",
        failures == 0,
        format!("{failures} failures, worst rel gap {worst:.2e}"),
    )])
}

fn euclid_crofton(p: Profile) -> Result<Vec<Check>> {
    let trials = p.pick(20_000, 100_000);
    let segment = Segment { from: vec![0.0, 0.0], to: vec![1.0, 0.0] };
    let circle = Circle::planar(2, 1.0);
    let seg = euclid_crofton_length(&segment, trials, 2.0, 301)?;
    let tight = euclid_crofton_length(&circle, trials, 1.01, 302)?;
    let wide = euclid_crofton_length(&circle, trials, 2.0, 303)?;
    Ok(vec![
        check_estimate("unit segment = 1", &seg.estimate, 1.0, 3.0, 0.0),
        check_estimate("unit circle = 2 pi", &tight.estimate, TAU, 3.0, 0.0),
        check_z("R-invariance, R = 1.01 vs 2", &tight.estimate, &wide.estimate, 3.0),
    ])
}

fn sphere_crofton(p: Profile) -> Result<Vec<Check>> {
    let trials = p.pick(20_000, 100_000);
    let great = SmallCircle::great([0.3, -0.2, 1.0])?;
    let small = SmallCircle::new(PI / 6.0, [0.0, 0.0, 1.0])?;
    let g = sphere_crofton_length(&great, trials, 401)?;
    let s = sphere_crofton_length(&small, trials, 402)?;
    Ok(vec![
        check(
            "great circle = 2 pi",
            g.estimate.value == TAU && g.estimate.std_error == 0.0,
            format!("{} ({} redraws)", g.estimate.value, g.redraws),
        ),
        check_estimate("small circle at pi/6 = pi", &s.estimate, PI, 3.0, 0.0),
    ])
}

fn product_crofton(p: Profile) -> Result<Vec<Check>> {
    let trials = p.pick(20_000, 100_000);
    let config = MixedVolumeConfig::default();
    let great = SmallCircle::great([0.0, 0.0, 1.0])?;
    let other = SmallCircle::great([1.0, 0.0, 0.0])?;
    let small = SmallCircle::new(PI / 6.0, [0.0, 1.0, 0.0])?;
    let gg = product_crofton_check(&great, &other, trials, 501, 32, &config)?;
    let gs = product_crofton_check(&great, &small, trials, 502, 32, &config)?;
    Ok(vec![
        check_estimate("great x great, mc = 4", &gg.mc_estimate, 4.0, 3.0, 0.0),
        check_rel("great x great, density = 4", gg.density_integral, 4.0, 0.01),
        check_estimate("great x small, mc = 2", &gs.mc_estimate, 2.0, 3.0, 0.0),
        check_rel("great x small, density = 2", gs.density_integral, 2.0, 0.01),
        check("mc vs density agree", gg.agrees(3.0, 0.01) && gs.agrees(3.0, 0.01), ""),
    ])
}

fn circle_space(axis: usize, n: usize) -> FunctionSpace {
    let mut k = vec![0.0; n];
    k[axis] = 1.0;
    FunctionSpace::trig(ChartDomain::standard_torus(n), &[(k.clone(), TrigKind::Cos), (k, TrigKind::Sin)])
        .expect("valid trig space")
}

fn coupled_space() -> FunctionSpace {
    FunctionSpace::trig(
        ChartDomain::standard_torus(2),
        &[
            (vec![1.0, 0.0], TrigKind::Cos),
            (vec![1.0, 0.0], TrigKind::Sin),
            (vec![0.0, 1.0], TrigKind::Cos),
            (vec![0.0, 1.0], TrigKind::Sin),
        ],
    )
    .expect("valid trig space")
}

fn bkk_circle(p: Profile) -> Result<Vec<Check>> {
    let exp = BkkExperiment::new(vec![circle_space(0, 1)], p.pick(20_000, 100_000), 601)?;
    let r = bkk::run(&exp)?;
    Ok(vec![
        check_estimate("mc = 2 pi", &r.mc_average, TAU, 3.0, 0.0),
        check_rel("density = 2 pi", r.density_average, TAU, 0.001),
        check_rel("mixed volume = 2 pi", r.mixed_volume_average, TAU, 0.001),
    ])
}

fn bkk_decoupled(p: Profile) -> Result<Vec<Check>> {
    let exp = BkkExperiment::new(vec![circle_space(0, 2), circle_space(1, 2)], p.pick(5_000, 30_000), 701)?;
    let r = bkk::run(&exp)?;
    let target = 4.0 * PI * PI;
    Ok(vec![
        check_estimate("mc = 4 pi^2", &r.mc_average, target, 3.0, 0.0),
        check_rel("density = 4 pi^2", r.density_average, target, 0.01),
        check_rel("mixed volume = 4 pi^2", r.mixed_volume_average, target, 0.01),
        check("reported", true, format!("{} redraws, {} inconclusive cells", r.redraws, r.inconclusive_cells)),
    ])
}

fn bkk_coupled(p: Profile) -> Result<Vec<Check>> {
    let exp = BkkExperiment::new(vec![coupled_space(), coupled_space()], p.pick(5_000, 30_000), 801)?;
    let r = bkk::run(&exp)?;
    let mc = &r.mc_average;
    Ok(vec![
        check_estimate("mc vs density", mc, r.density_average, 3.0, 0.02),
        check_estimate("mc vs mixed volume", mc, r.mixed_volume_average, 3.0, 0.02),
        check_rel("density vs mixed volume", r.density_average, r.mixed_volume_average, 0.02),
        check(
            "reported",
            true,
            format!(
                "mc {:.4} +- {:.4}, density {:.6}, mixed volume {:.6}, {} redraws, {} inconclusive cells",
                mc.value, mc.std_error, r.density_average, r.mixed_volume_average, r.redraws, r.inconclusive_cells
            ),
        ),
    ])
}

/// Rotation taking `e_3` to the normalized `axis` and then spinning about it.
fn rotation(axis: [f64; 3], spin: f64) -> Vec<Vec<f64>> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / n, axis[1] / n, axis[2] / n);
    let (s, c) = spin.sin_cos();
    let t = 1.0 - c;
    vec![
        vec![t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        vec![t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        vec![t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn trig_field(k: [f64; 2], kind: TrigKind, amplitude: f64) -> FieldRef {
    let mut m = TrigMode::new(k.to_vec(), kind);
    m.amplitude = amplitude;
    Arc::new(m)
}

/// `f(x) = sum_k c_k mode_k(x) - a` with frequencies in `{0, 1}^2 \ {0}`.
pub(crate) fn random_trig_equation<R: Rng>(rng: &mut R) -> LinearCombination {
    let mut terms = Vec::new();
    for k in [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]] {
        for kind in [TrigKind::Cos, TrigKind::Sin] {
            let c: f64 = rng.sample(rand_distr::StandardNormal);
            terms.push((c, trig_field(k, kind, 1.0)));
        }
    }
    let a = rng.random_range(-1.5..1.5);
    LinearCombination::new(terms, a).expect("non-empty")
}

fn properties(p: Profile) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mc_trials = p.pick(20_000, 200_000);
    let config = MixedVolumeConfig::default();

    // mixed volume
    let mut rng = stream(900, 0);
    let a = random_psd(&mut rng, 2);
    let b = random_psd(&mut rng, 2);
    let v = mixed_volume_mc(&[a.clone(), b.clone()], mc_trials, 901)?;
    let t = 2.5;
    let a_scaled = CenteredEllipsoid::new(a.matrix() * (t * t))?;
    let vt = mixed_volume_mc(&[a_scaled, b.clone()], mc_trials, 901)?;
    out.push(check_rel("mixed volume homogeneity", vt.value, t * v.value, 1e-9));
    let swapped = mixed_volume_mc(&[b.clone(), a.clone()], mc_trials, 902)?;
    out.push(check_z("mixed volume symmetry", &v.as_estimate(), &swapped.as_estimate(), 4.0));
    let o1 = mixed_volume_oracle(&[a.clone(), b.clone()], 2000)?.value;
    let o2 = mixed_volume_oracle(&[b.clone(), a.clone()], 2000)?.value;
    out.push(check_rel("oracle symmetry", o1, o2, 1e-12));
    let seg = CenteredEllipsoid::diagonal(&[1.0, 0.0])?;
    let seg2 = CenteredEllipsoid::diagonal(&[4.0, 0.0])?;
    out.push(check(
        "parallel segments give zero",
        mixed_volume_mc(&[seg.clone(), seg2.clone()], 10_000, 903)?.value == 0.0
            && mixed_volume_oracle(&[seg, seg2], 720)?.value.abs() < 1e-12,
        "",
    ));
    let again = mixed_volume_mc(&[a.clone(), b.clone()], mc_trials, 901)?;
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("thread pool")
        .install(|| mixed_volume_mc(&[a.clone(), b.clone()], mc_trials, 901))?;
    out.push(check("mixed volume seed determinism across thread counts", again == v && single == v, ""));

    // densities
    let bodies: Vec<CenteredEllipsoid> = (0..2).map(|_| random_psd(&mut rng, 3)).collect();
    let u = [1.0, 0.5, -0.2];
    let w = [0.0, 1.0, 0.7];
    let base = d_m(&bodies, &Frame::new(&[u.to_vec(), w.to_vec()])?, &config)?.value;
    let stretched = d_m(&bodies, &Frame::new(&[u.iter().map(|x| -3.0 * x).collect(), w.to_vec()])?, &config)?.value;
    out.push(check_rel("d_m frame homogeneity", stretched, 3.0 * base, 1e-3));
    let sheared: Vec<f64> = w.iter().zip(&u).map(|(w, u)| w + 2.0 * u).collect();
    let shear = d_m(&bodies, &Frame::new(&[u.to_vec(), sheared])?, &config)?.value;
    out.push(check_rel("d_m basis invariance", shear, base, 1e-3));
    let rev = [bodies[1].clone(), bodies[0].clone()];
    out.push(check_rel("d_m symmetry", d_m(&rev, &Frame::new(&[u.to_vec(), w.to_vec()])?, &config)?.value, base, 1e-3));
    let dependent = Frame::new(&[u.to_vec(), u.iter().map(|x| 2.0 * x).collect()])?;
    out.push(check("d_m degenerate frame is zero", d_m(&bodies, &dependent, &config)?.value == 0.0, ""));

    // finsler
    let space = coupled_space();
    let vol = symplectic_volume(&space, &[32, 32])?;
    let shifted = symplectic_volume(&space.translated(&[0.4, -1.3])?, &[32, 32])?;
    out.push(check_rel("symplectic volume translation invariance", shifted, vol, 1e-10));
    let scaled = symplectic_volume(&space.scaled(1.7), &[32, 32])?;
    out.push(check_rel("symplectic volume scaling", scaled, 1.7f64.powi(2) * vol, 1e-10));

    // roots
    let draws = p.pick(50, 200);
    let mut translation_failures = 0;
    let mut stability_failures = 0;
    let mut stability_checked = 0;
    for k in 0..draws {
        let mut rng = stream(910, k);
        let f = random_trig_equation(&mut rng);
        let g = random_trig_equation(&mut rng);
        let domain = ChartDomain::standard_torus(2);
        let sys = ScalarSystem::new(domain.clone(), vec![Box::new(f.clone()), Box::new(g.clone())])?;
        let coarse = count_roots(&sys, &[64, 64])?;
        let fine = count_roots(&sys, &[128, 128])?;
        if coarse.min_condition() > 10.0 * SING_TOL && coarse.inconclusive_cells == 0 && fine.inconclusive_cells == 0 {
            stability_checked += 1;
            if coarse.count != fine.count {
                stability_failures += 1;
            }
        }
        let shift = vec![rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        let moved: Vec<Box<dyn ScalarField>> = [f, g]
            .into_iter()
            .map(|e| Box::new(Shifted { inner: Arc::new(e) as FieldRef, shift: shift.clone() }) as Box<dyn ScalarField>)
            .collect();
        let moved = count_roots(&ScalarSystem::new(domain, moved)?, &[64, 64])?;
        if moved.count != coarse.count {
            translation_failures += 1;
        }
    }
    out.push(check(
        "root count translation equivariance",
        translation_failures == 0,
        format!("{translation_failures} of {draws} draws differ"),
    ));
    out.push(check(
        "root count resolution stability",
        stability_failures == 0,
        format!("{stability_failures} of {stability_checked} well-conditioned draws differ"),
    ));

    // crofton
    let c_trials = p.pick(10_000, 50_000);
    let circle3: CurveModel = Arc::new(Circle::planar(3, 1.0));
    let turned = Transformed { inner: circle3.clone(), matrix: rotation([1.0, 2.0, -0.5], 0.9) };
    let e0 = euclid_crofton_length(circle3.as_ref(), c_trials, 1.5, 920)?;
    let e1 = euclid_crofton_length(&turned, c_trials, 1.5, 921)?;
    out.push(check_z("euclidean Crofton rotation invariance", &e0.estimate, &e1.estimate, 3.0));
    out.push(check_estimate("circle in R^3 = 2 pi", &e0.estimate, TAU, 3.0, 0.0));
    let wide = euclid_crofton_length(circle3.as_ref(), c_trials, 3.0, 922)?;
    out.push(check_z("euclidean Crofton R-invariance", &e0.estimate, &wide.estimate, 3.0));
    let ellipse: CurveModel = Arc::new(TrigCurve::spherical_ellipse(1.0, 0.5, 0.5)?);
    let turned = Transformed { inner: ellipse.clone(), matrix: rotation([0.2, -1.0, 0.4], 2.1) };
    let s0 = sphere_crofton_length(ellipse.as_ref(), c_trials, 923)?;
    let s1 = sphere_crofton_length(&turned, c_trials, 924)?;
    out.push(check_z("sphere Crofton rotation invariance", &s0.estimate, &s1.estimate, 3.0));
    let length = crate::crofton::arclength(ellipse.as_ref(), 512)?;
    out.push(check_estimate("spherical ellipse vs quadrature arclength", &s0.estimate, length, 3.0, 0.0));
    let ses: Vec<f64> = [1_000u64, 10_000, 100_000]
        .iter()
        .map(|&n| {
            euclid_crofton_length(&Segment { from: vec![0.0, 0.0], to: vec![1.0, 0.0] }, n, 2.0, 925)
                .map(|e| e.estimate.std_error)
        })
        .collect::<Result<_>>()?;
    let ratios = [ses[0] / ses[1] / 10f64.sqrt(), ses[1] / ses[2] / 10f64.sqrt()];
    out.push(check(
        "std error scales as 1/sqrt(trials)",
        ratios.iter().all(|r| (1.0 / 1.5..=1.5).contains(r)),
        format!("normalized ratios {:.3}, {:.3}", ratios[0], ratios[1]),
    ));
    let twice = sphere_crofton_length(ellipse.as_ref(), c_trials, 923)?;
    out.push(check("crofton seed determinism", twice == s0, ""));

    // bkk
    let b_trials = p.pick(5_000, 20_000);
    let base = BkkExperiment::new(vec![circle_space(0, 1)], b_trials, 930)?;
    let r = bkk::run(&base)?;
    let scaled = BkkExperiment::new(vec![circle_space(0, 1).scaled(3.0)], b_trials, 931)?;
    let rs = bkk::run(&scaled)?;
    out.push(check_estimate("bkk scale covariance, mc", &rs.mc_average, 3.0 * r.density_average, 3.0, 0.0));
    out.push(check_rel("bkk scale covariance, density", rs.density_average, 3.0 * r.density_average, 1e-9));
    out.push(check_rel(
        "bkk scale covariance, mixed volume",
        rs.mixed_volume_average,
        3.0 * r.mixed_volume_average,
        1e-9,
    ));
    let inflated = BkkExperiment::new(vec![circle_space(0, 1)], b_trials, 932)?
        .with_ranges(base.ranges().iter().map(|r| 2.0 * r).collect())?;
    let ri = bkk::average_zeros_mc(&inflated)?;
    out.push(check_z("bkk R-invariance", &r.mc_average, &ri.estimate, 3.0));
    let dec = BkkExperiment::new(vec![circle_space(0, 2), coupled_space()], 10, 933)?.with_grid(vec![32, 32])?;
    out.push(check_rel(
        "density = mixed volume route",
        bkk::average_zeros_density(&dec)?,
        bkk::average_zeros_mixedvol(&dec)?,
        1e-9,
    ));
    let again = bkk::run(&base)?;
    out.push(check("bkk seed determinism", again == r, ""));
    Ok(out)
}
