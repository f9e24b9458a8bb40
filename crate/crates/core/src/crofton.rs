//! Crofton-type Monte Carlo estimators.
//!
//! Euclidean: hyperplanes `{x : <u, x> = a}` with `u` uniform on the sphere and
//! `a` uniform on `[-R, R]`, weighted by `2R / c_d`, realize the invariant
//! measure normalized so that hyperplanes meeting a unit segment have total
//! mass 1. The weighted mean intersection count with a curve is its length.
//!
//! Spherical: great circles `{y : <y, g> = 0}` with `g` uniform on `S^2`
//! (probability measure). The mean intersection count with a curve is
//! `length / pi`; on `S^2 x S^2` the counts of the two factors multiply.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convex::Frame;
use crate::density::{factor_ball, product_d1};
use crate::error::{check_dim, invalid, Error, Result};
use crate::estimate::Estimate;
use crate::field::{ChartDomain, ScalarField};
use crate::mixed_volume::MixedVolumeConfig;
use crate::quadrature::TensorGrid;
use crate::rng::{stream, unit_vector, StreamRng};
use crate::roots::{count_roots_tabulated, ScalarSystem};
use crate::special::hyperplane_constant;

/// Grid cells used to count curve/hyperplane intersections.
pub const INTERSECTION_RESOLUTION: usize = 2048;
pub const MIN_TRIALS: u64 = 1000;
/// Redraws allowed per trial before giving up.
const MAX_REDRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneSample {
    pub u: Vec<f64>,
    pub a: f64,
    pub weight: f64,
}

/// Draws one affine hyperplane in `R^d`; offsets range over `[-range, range]`.
pub fn sample_hyperplane<R: Rng + ?Sized>(d: usize, range: f64, rng: &mut R) -> Result<HyperplaneSample> {
    if d == 0 {
        return Err(invalid("hyperplane dimension must be at least 1"));
    }
    if !(range.is_finite() && range > 0.0) {
        return Err(invalid("offset range must be positive"));
    }
    let u = unit_vector(rng, d);
    let a = rng.random_range(-range..=range);
    Ok(HyperplaneSample { u, a, weight: 2.0 * range / hyperplane_constant(d) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSpace {
    Euclidean(usize),
    Sphere,
}

/// A parameterized curve `t in [0, 1] -> point`; closed curves are 1-periodic.
pub trait Curve: Send + Sync {
    fn space(&self) -> CurveSpace;
    fn closed(&self) -> bool;
    fn point(&self, t: f64) -> Vec<f64>;
    fn derivative(&self, t: f64) -> Vec<f64>;

    fn ambient_dim(&self) -> usize {
        match self.space() {
            CurveSpace::Euclidean(d) => d,
            CurveSpace::Sphere => 3,
        }
    }
}

pub type CurveModel = Arc<dyn Curve>;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
}

impl Curve for Segment {
    fn space(&self) -> CurveSpace {
        CurveSpace::Euclidean(self.from.len())
    }
    fn closed(&self) -> bool {
        false
    }
    fn point(&self, t: f64) -> Vec<f64> {
        self.from.iter().zip(&self.to).map(|(a, b)| a + t * (b - a)).collect()
    }
    fn derivative(&self, _t: f64) -> Vec<f64> {
        self.from.iter().zip(&self.to).map(|(a, b)| b - a).collect()
    }
}

/// `center + radius (cos 2 pi t e1 + sin 2 pi t e2)` for orthonormal `e1, e2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circle {
    pub center: Vec<f64>,
    pub radius: f64,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl Circle {
    /// Circle in the plane of the first two coordinates of `R^d`.
    pub fn planar(d: usize, radius: f64) -> Self {
        let mut e1 = vec![0.0; d];
        let mut e2 = vec![0.0; d];
        e1[0] = 1.0;
        e2[1] = 1.0;
        Circle { center: vec![0.0; d], radius, e1, e2 }
    }
}

impl Curve for Circle {
    fn space(&self) -> CurveSpace {
        CurveSpace::Euclidean(self.center.len())
    }
    fn closed(&self) -> bool {
        true
    }
    fn point(&self, t: f64) -> Vec<f64> {
        let (s, c) = (TAU * t).sin_cos();
        (0..self.center.len()).map(|i| self.center[i] + self.radius * (c * self.e1[i] + s * self.e2[i])).collect()
    }
    fn derivative(&self, t: f64) -> Vec<f64> {
        let (s, c) = (TAU * t).sin_cos();
        (0..self.center.len()).map(|i| TAU * self.radius * (-s * self.e1[i] + c * self.e2[i])).collect()
    }
}

/// Circle of points at angular distance `colatitude` from `axis` on `S^2`;
/// `colatitude = pi/2` is a great circle and `0` collapses to a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallCircle {
    pub colatitude: f64,
    axis: [f64; 3],
    e1: [f64; 3],
    e2: [f64; 3],
}

impl SmallCircle {
    pub fn new(colatitude: f64, axis: [f64; 3]) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(invalid("small circle axis must be non-zero"));
        }
        let a = [axis[0] / n, axis[1] / n, axis[2] / n];
        let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d = helper[0] * a[0] + helper[1] * a[1] + helper[2] * a[2];
        let e1 = [helper[0] - d * a[0], helper[1] - d * a[1], helper[2] - d * a[2]];
        let l = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        let e1 = [e1[0] / l, e1[1] / l, e1[2] / l];
        let e2 = [a[1] * e1[2] - a[2] * e1[1], a[2] * e1[0] - a[0] * e1[2], a[0] * e1[1] - a[1] * e1[0]];
        Ok(SmallCircle { colatitude, axis: a, e1, e2 })
    }

    pub fn great(axis: [f64; 3]) -> Result<Self> {
        Self::new(PI / 2.0, axis)
    }

    pub fn length(&self) -> f64 {
        TAU * self.colatitude.sin().abs()
    }
}

impl Curve for SmallCircle {
    fn space(&self) -> CurveSpace {
        CurveSpace::Sphere
    }
    fn closed(&self) -> bool {
        true
    }
    fn point(&self, t: f64) -> Vec<f64> {
        let (s, c) = (TAU * t).sin_cos();
        let (sa, ca) = self.colatitude.sin_cos();
        (0..3).map(|i| ca * self.axis[i] + sa * (c * self.e1[i] + s * self.e2[i])).collect()
    }
    fn derivative(&self, t: f64) -> Vec<f64> {
        let (s, c) = (TAU * t).sin_cos();
        let sa = self.colatitude.sin();
        (0..3).map(|i| TAU * sa * (-s * self.e1[i] + c * self.e2[i])).collect()
    }
}

/// Trigonometric series per coordinate:
/// `x_j(t) = c_j + sum_k (a_jk cos 2 pi k t + b_jk sin 2 pi k t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigSeries {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigSeries {
    fn eval(&self, t: f64) -> (f64, f64) {
        let mut v = self.constant;
        let mut d = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            let (s, c) = (w * t).sin_cos();
            v += a * c;
            d -= a * w * s;
        }
        for (k, b) in self.sin.iter().enumerate() {
            let w = TAU * (k + 1) as f64;
            let (s, c) = (w * t).sin_cos();
            v += b * s;
            d += b * w * c;
        }
        (v, d)
    }
}

/// Closed curve from trigonometric coordinate series; on `S^2` the raw point
/// is radially projected to the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCurve {
    coords: Vec<TrigSeries>,
    on_sphere: bool,
}

impl TrigCurve {
    pub fn euclidean(coords: Vec<TrigSeries>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("curve needs at least one coordinate"));
        }
        Ok(TrigCurve { coords, on_sphere: false })
    }

    pub fn spherical(coords: Vec<TrigSeries>) -> Result<Self> {
        check_dim(3, coords.len())?;
        let c = TrigCurve { coords, on_sphere: true };
        for k in 0..256 {
            let p = c.raw(k as f64 / 256.0).0;
            if p.iter().map(|v| v * v).sum::<f64>() < 1e-12 {
                return Err(invalid("spherical curve passes through the origin before projection"));
            }
        }
        Ok(c)
    }

    /// `(a cos 2 pi t, b sin 2 pi t, height)` projected to the sphere.
    pub fn spherical_ellipse(a: f64, b: f64, height: f64) -> Result<Self> {
        Self::spherical(vec![
            TrigSeries { constant: 0.0, cos: vec![a], sin: vec![] },
            TrigSeries { constant: 0.0, cos: vec![], sin: vec![b] },
            TrigSeries { constant: height, cos: vec![], sin: vec![] },
        ])
    }

    fn raw(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        self.coords.iter().map(|s| s.eval(t)).unzip()
    }
}

impl Curve for TrigCurve {
    fn space(&self) -> CurveSpace {
        if self.on_sphere {
            CurveSpace::Sphere
        } else {
            CurveSpace::Euclidean(self.coords.len())
        }
    }
    fn closed(&self) -> bool {
        true
    }
    fn point(&self, t: f64) -> Vec<f64> {
        let (p, _) = self.raw(t);
        if !self.on_sphere {
            return p;
        }
        let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        p.iter().map(|v| v / n).collect()
    }
    fn derivative(&self, t: f64) -> Vec<f64> {
        let (p, dp) = self.raw(t);
        if !self.on_sphere {
            return dp;
        }
        // d/dt p/|p| = (dp - (p.dp / |p|^2) p) / |p|
        let nn: f64 = p.iter().map(|v| v * v).sum();
        let n = nn.sqrt();
        let pd: f64 = p.iter().zip(&dp).map(|(a, b)| a * b).sum();
        p.iter().zip(&dp).map(|(p, d)| (d - pd / nn * p) / n).collect()
    }
}

/// A curve composed with a fixed linear map (a rotation, in practice).
pub struct Transformed {
    pub inner: CurveModel,
    /// Row-major square matrix.
    pub matrix: Vec<Vec<f64>>,
}

impl Transformed {
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

impl Curve for Transformed {
    fn space(&self) -> CurveSpace {
        self.inner.space()
    }
    fn closed(&self) -> bool {
        self.inner.closed()
    }
    fn point(&self, t: f64) -> Vec<f64> {
        self.apply(&self.inner.point(t))
    }
    fn derivative(&self, t: f64) -> Vec<f64> {
        self.apply(&self.inner.derivative(t))
    }
}

/// Arclength by Gauss-Legendre (open) or trapezoid (closed) quadrature of `|c'(t)|`.
pub fn arclength(curve: &dyn Curve, nodes: usize) -> Result<f64> {
    let domain = parameter_domain(curve);
    TensorGrid::new(&domain, &[nodes])?.integrate(|t| Ok(norm(&curve.derivative(t[0]))))
}

fn parameter_domain(curve: &dyn Curve) -> ChartDomain {
    if curve.closed() {
        ChartDomain::Torus { periods: vec![1.0] }
    } else {
        ChartDomain::unit_box(1)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `t -> <u, c(t)> - a`.
struct Level<'c> {
    curve: &'c dyn Curve,
    u: &'c [f64],
    a: f64,
}

impl ScalarField for Level<'_> {
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.curve.point(x[0]).iter().zip(self.u).map(|(p, u)| p * u).sum::<f64>() - self.a
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        grad[0] = self.curve.derivative(x[0]).iter().zip(self.u).map(|(p, u)| p * u).sum();
    }
}

/// Transversal intersection count of the curve with `<u, y> = a`, or `None`
/// when some intersection is tangential.
pub fn intersection_count(curve: &dyn Curve, u: &[f64], a: f64) -> Result<Option<usize>> {
    CurveTable::new(curve).count(u, a)
}

/// Curve points and velocities on the intersection-counting grid, shared by
/// all hyperplanes of a Monte Carlo run.
pub struct CurveTable<'c> {
    curve: &'c dyn Curve,
    points: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

impl<'c> CurveTable<'c> {
    pub fn new(curve: &'c dyn Curve) -> Self {
        let cells = INTERSECTION_RESOLUTION;
        let ts = (0..=cells).map(|k| k as f64 / cells as f64);
        CurveTable {
            curve,
            points: ts.clone().map(|t| curve.point(t)).collect(),
            velocities: ts.map(|t| curve.derivative(t)).collect(),
        }
    }

    pub fn count(&self, u: &[f64], a: f64) -> Result<Option<usize>> {
        check_dim(self.curve.ambient_dim(), u.len())?;
        let dot = |p: &[f64]| p.iter().zip(u).map(|(p, u)| p * u).sum::<f64>();
        let nodes: Vec<(f64, f64)> =
            self.points.iter().zip(&self.velocities).map(|(p, v)| (dot(p) - a, dot(v))).collect();
        let curve = self.curve;
        let sys = ScalarSystem::new(parameter_domain(curve), vec![Box::new(Level { curve, u, a })])?;
        let roots = count_roots_tabulated(&sys, &nodes)?;
        Ok(roots.is_transversal().then_some(roots.count))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CroftonEstimate {
    pub estimate: Estimate,
    /// Samples rejected because of a tangential intersection.
    pub redraws: u64,
}

/// Runs `trials` independent trials; trial `k` uses stream `k` of `seed` and
/// redraws from the same stream on rejection.
pub(crate) fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<(Vec<f64>, u64)>
where
    F: Fn(&mut StreamRng) -> Result<Option<f64>> + Sync,
{
    let results: Vec<(f64, u64)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            for redraw in 0..MAX_REDRAWS {
                if let Some(v) = trial(&mut rng)? {
                    return Ok((v, redraw as u64));
                }
            }
            Err(Error::InvalidInput(format!("trial {k}: {MAX_REDRAWS} consecutive non-transversal samples")))
        })
        .collect::<Result<_>>()?;
    let redraws = results.iter().map(|r| r.1).sum();
    Ok((results.into_iter().map(|r| r.0).collect(), redraws))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(invalid(format!("at least {MIN_TRIALS} trials required, got {trials}")));
    }
    Ok(())
}

/// Largest `|c(t)|` over a fine parameter grid.
pub fn curve_radius(curve: &dyn Curve) -> f64 {
    (0..=4096).map(|k| norm(&curve.point(k as f64 / 4096.0))).fold(0.0, f64::max)
}

/// Euclidean Crofton estimate of the length of `curve`.
pub fn euclid_crofton_length(curve: &dyn Curve, trials: u64, range: f64, seed: u64) -> Result<CroftonEstimate> {
    let CurveSpace::Euclidean(d) = curve.space() else {
        return Err(invalid("euclidean Crofton estimator needs a curve in R^d"));
    };
    check_trials(trials)?;
    let radius = curve_radius(curve);
    if range.is_nan() || range < radius {
        return Err(invalid(format!("offset range {range} is smaller than the curve radius {radius}")));
    }
    let table = CurveTable::new(curve);
    let (values, redraws) = run_trials(trials, seed, |rng| {
        let h = sample_hyperplane(d, range, rng)?;
        // hyperplanes beyond the curve's radius cannot meet it
        if h.a.abs() > radius {
            return Ok(Some(0.0));
        }
        Ok(table.count(&h.u, h.a)?.map(|n| h.weight * n as f64))
    })?;
    Ok(CroftonEstimate { estimate: Estimate::from_samples(&values), redraws })
}

fn check_spherical(curve: &dyn Curve) -> Result<()> {
    if curve.space() != CurveSpace::Sphere {
        return Err(invalid("spherical Crofton estimator needs a curve on S^2"));
    }
    Ok(())
}

/// Spherical Crofton estimate: `pi` times the mean count with random great circles.
pub fn sphere_crofton_length(curve: &dyn Curve, trials: u64, seed: u64) -> Result<CroftonEstimate> {
    check_spherical(curve)?;
    check_trials(trials)?;
    let table = CurveTable::new(curve);
    let (values, redraws) = run_trials(trials, seed, |rng| {
        let pole = unit_vector(rng, 3);
        Ok(table.count(&pole, 0.0)?.map(|n| n as f64))
    })?;
    Ok(CroftonEstimate { estimate: Estimate::from_samples(&values).scaled(PI), redraws })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductCroftonReport {
    /// Mean of `#(C1 n Y_g1) * #(C2 n Y_g2)` over independent uniform poles.
    pub mc_estimate: Estimate,
    /// `(1/pi^2) int vol_{1,1} vol_{1,2}` over `C1 x C2`.
    pub density_integral: f64,
    pub redraws: u64,
}

impl ProductCroftonReport {
    /// `|mc - density| <= k std_error + rel |density|`.
    pub fn agrees(&self, k: f64, rel: f64) -> bool {
        self.mc_estimate.agrees_with(self.density_integral, k, rel)
    }
}

/// Density side of the product check. The integrand is
/// `vol_{1,1} vol_{1,2} = (1/4) d_1(B_1) d_1(B_2)` on the tangent frame
/// `((c1'(s), 0), (0, c2'(t)))`, with `B_i` the unit ball of factor `i`
/// embedded in `R^3 x R^3`.
pub fn product_density_integral(
    c1: &dyn Curve,
    c2: &dyn Curve,
    nodes: usize,
    config: &MixedVolumeConfig,
) -> Result<f64> {
    check_spherical(c1)?;
    check_spherical(c2)?;
    let blocks = [3, 3];
    let balls = [factor_ball(&blocks, 0)?, factor_ball(&blocks, 1)?];
    let axis = |c: &dyn Curve| {
        if c.closed() {
            ChartDomain::Torus { periods: vec![1.0] }
        } else {
            ChartDomain::unit_box(1)
        }
    };
    // both factors share one chart; mixed periodic/open pairs use a box
    let domain = match (axis(c1), axis(c2)) {
        (ChartDomain::Torus { .. }, ChartDomain::Torus { .. }) => ChartDomain::Torus { periods: vec![1.0, 1.0] },
        _ => ChartDomain::unit_box(2),
    };
    let grid = TensorGrid::new(&domain, &[nodes, nodes])?;
    let integral = grid.integrate(|st| {
        let d1 = c1.derivative(st[0]);
        let d2 = c2.derivative(st[1]);
        let v1: Vec<f64> = d1.iter().copied().chain([0.0; 3]).collect();
        let v2: Vec<f64> = [0.0; 3].into_iter().chain(d2.iter().copied()).collect();
        let frame = Frame::new(&[v1, v2])?;
        Ok(0.25 * product_d1(&balls, &frame, config)?.value)
    })?;
    Ok(integral / (PI * PI))
}

/// Compares the Monte Carlo product Crofton count on `C1 x C2` with the
/// density integral.
pub fn product_crofton_check(
    c1: &dyn Curve,
    c2: &dyn Curve,
    trials: u64,
    seed: u64,
    nodes: usize,
    config: &MixedVolumeConfig,
) -> Result<ProductCroftonReport> {
    check_spherical(c1)?;
    check_spherical(c2)?;
    check_trials(trials)?;
    let (t1, t2) = (CurveTable::new(c1), CurveTable::new(c2));
    let (values, redraws) = run_trials(trials, seed, |rng| {
        let g1 = unit_vector(rng, 3);
        let g2 = unit_vector(rng, 3);
        let (Some(n1), Some(n2)) = (t1.count(&g1, 0.0)?, t2.count(&g2, 0.0)?) else {
            return Ok(None);
        };
        Ok(Some((n1 * n2) as f64))
    })?;
    Ok(ProductCroftonReport {
        mc_estimate: Estimate::from_samples(&values),
        density_integral: product_density_integral(c1, c2, nodes, config)?,
        redraws,
    })
}

/// JSON curve definition, e.g.
/// `{"space": "R2", "type": "circle", "radius": 1}` or
/// `{"space": "S2xS2", "factors": [{"type": "great_circle"}, {"type": "small_circle", "colatitude": 0.5}]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    #[serde(default)]
    pub space: Option<String>,
    #[serde(rename = "type", default)]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Unit vectors spanning a circle's plane (defaults to the first two axes).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<[Vec<f64>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colatitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axes: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<TrigSeries>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<CurveSpec>>,
}

/// A parsed curve: a single curve or a product surface on `S^2 x S^2`.
#[derive(Clone)]
pub enum CurveDefinition {
    Single(CurveModel),
    Product(CurveModel, CurveModel),
}

impl CurveSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<CurveDefinition> {
        let space = self.space.as_deref().unwrap_or("S2");
        if space == "S2xS2" {
            let factors = self.factors.as_ref().ok_or_else(|| invalid("S2xS2 needs two \"factors\""))?;
            if factors.len() != 2 {
                return Err(invalid("S2xS2 needs exactly two factors"));
            }
            let mut built = factors.iter().map(|f| {
                let mut f = f.clone();
                f.space.get_or_insert_with(|| "S2".into());
                if f.space.as_deref() != Some("S2") {
                    return Err(invalid("S2xS2 factors must be S2 curves"));
                }
                match f.build()? {
                    CurveDefinition::Single(c) => Ok(c),
                    CurveDefinition::Product(..) => Err(invalid("nested product")),
                }
            });
            let a = built.next().unwrap()?;
            let b = built.next().unwrap()?;
            return Ok(CurveDefinition::Product(a, b));
        }
        let kind = self.kind.as_deref().ok_or_else(|| invalid("curve needs a \"type\""))?;
        let curve: CurveModel = match space {
            "R2" | "R3" => {
                let d = if space == "R2" { 2 } else { 3 };
                match kind {
                    "segment" => {
                        let from = self.from.clone().unwrap_or_else(|| vec![0.0; d]);
                        let to = self.to.clone().unwrap_or_else(|| {
                            let mut v = vec![0.0; d];
                            v[0] = 1.0;
                            v
                        });
                        check_dim(d, from.len())?;
                        check_dim(d, to.len())?;
                        Arc::new(Segment { from, to })
                    }
                    "circle" => {
                        let mut c = Circle::planar(d, self.radius.unwrap_or(1.0));
                        if let Some(center) = &self.center {
                            check_dim(d, center.len())?;
                            c.center = center.clone();
                        }
                        if let Some([e1, e2]) = &self.basis {
                            check_dim(d, e1.len())?;
                            check_dim(d, e2.len())?;
                            c.e1 = e1.clone();
                            c.e2 = e2.clone();
                        }
                        Arc::new(c)
                    }
                    "param" => {
                        let coords = self.coords.clone().ok_or_else(|| invalid("param curve needs \"coords\""))?;
                        check_dim(d, coords.len())?;
                        Arc::new(TrigCurve::euclidean(coords)?)
                    }
                    other => return Err(invalid(format!("unknown curve type {other:?} in {space}"))),
                }
            }
            "S2" => {
                let axis = self.axis.unwrap_or([0.0, 0.0, 1.0]);
                match kind {
                    "great_circle" => Arc::new(SmallCircle::great(axis)?),
                    "small_circle" => {
                        let alpha = self.colatitude.ok_or_else(|| invalid("small_circle needs \"colatitude\""))?;
                        Arc::new(SmallCircle::new(alpha, axis)?)
                    }
                    "ellipse" => {
                        let [a, b] = self.semi_axes.unwrap_or([1.0, 0.5]);
                        Arc::new(TrigCurve::spherical_ellipse(a, b, self.height.unwrap_or(0.5))?)
                    }
                    "param" => {
                        let coords = self.coords.clone().ok_or_else(|| invalid("param curve needs \"coords\""))?;
                        Arc::new(TrigCurve::spherical(coords)?)
                    }
                    other => return Err(invalid(format!("unknown curve type {other:?} on S2"))),
                }
            }
            other => return Err(invalid(format!("unknown curve space {other:?}"))),
        };
        Ok(CurveDefinition::Single(curve))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyperplane_weights() {
        let mut rng = stream(1, 0);
        let h = sample_hyperplane(1, 1.0, &mut rng).unwrap();
        assert!((h.weight - 2.0).abs() < 1e-14);
        assert!((h.u[0].abs() - 1.0).abs() < 1e-15);
        let h = sample_hyperplane(3, 2.0, &mut rng).unwrap();
        assert!((h.weight - 8.0).abs() < 1e-12);
        assert!((norm(&h.u) - 1.0).abs() < 1e-12);
        assert!(h.a.abs() <= 2.0);
        assert!(sample_hyperplane(0, 1.0, &mut rng).is_err());
        assert!(sample_hyperplane(2, 0.0, &mut rng).is_err());
    }

    /// In one dimension every point hyperplane inside [-1, 1] hits [0, 1] with
    /// probability 1/2 and weight 2: the expectation is exactly 1.
    #[test]
    fn one_dimensional_normalization() {
        let mut rng = stream(5, 0);
        let n = 100_000;
        let mut hits = Vec::with_capacity(n);
        for _ in 0..n {
            let h = sample_hyperplane(1, 1.0, &mut rng).unwrap();
            let x = h.a / h.u[0];
            hits.push(if (0.0..=1.0).contains(&x) { h.weight } else { 0.0 });
        }
        let e = Estimate::from_samples(&hits);
        assert!(e.agrees_with(1.0, 3.0, 0.0), "{e:?}");
    }

    #[test]
    fn curve_derivatives_match_finite_differences() {
        let curves: Vec<CurveModel> = vec![
            Arc::new(Segment { from: vec![0.0, 1.0], to: vec![2.0, -1.0] }),
            Arc::new(Circle::planar(3, 1.5)),
            Arc::new(SmallCircle::new(0.7, [1.0, 2.0, 0.5]).unwrap()),
            Arc::new(
                TrigCurve::spherical(vec![
                    TrigSeries { constant: 0.0, cos: vec![2.0], sin: vec![] },
                    TrigSeries { constant: 0.0, cos: vec![], sin: vec![1.0] },
                    TrigSeries { constant: 0.5, cos: vec![0.0, 0.2], sin: vec![] },
                ])
                .unwrap(),
            ),
        ];
        for c in &curves {
            for t in [0.1, 0.37, 0.8] {
                let h = 1e-6;
                let d = c.derivative(t);
                let p = c.point(t + h);
                let m = c.point(t - h);
                let scale = norm(&d).max(1.0);
                for i in 0..d.len() {
                    let fd = (p[i] - m[i]) / (2.0 * h);
                    assert!((fd - d[i]).abs() < 1e-6 * scale);
                }
            }
        }
    }

    #[test]
    fn small_circle_geometry() {
        let c = SmallCircle::new(PI / 6.0, [0.0, 0.0, 1.0]).unwrap();
        assert!((c.length() - PI).abs() < 1e-14);
        assert!((arclength(&c, 64).unwrap() - PI).abs() < 1e-12);
        for t in [0.0, 0.3] {
            assert!((norm(&c.point(t)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn great_circle_counts_are_always_two() {
        let c = SmallCircle::great([0.0, 0.0, 1.0]).unwrap();
        let e = sphere_crofton_length(&c, 2000, 3).unwrap();
        assert_eq!(e.estimate.value, TAU);
        assert_eq!(e.estimate.std_error, 0.0);
    }

    #[test]
    fn estimators_validate_inputs() {
        let circle = Circle::planar(2, 1.0);
        assert!(euclid_crofton_length(&circle, 100, 2.0, 1).is_err());
        assert!(euclid_crofton_length(&circle, 1000, 0.5, 1).is_err());
        assert!(sphere_crofton_length(&circle, 1000, 1).is_err());
        let great = SmallCircle::great([0.0, 0.0, 1.0]).unwrap();
        assert!(euclid_crofton_length(&great, 1000, 2.0, 1).is_err());
    }

    #[test]
    fn product_density_of_great_circles() {
        let g = SmallCircle::great([0.0, 0.0, 1.0]).unwrap();
        let v = product_density_integral(&g, &g, 16, &MixedVolumeConfig::default()).unwrap();
        assert!((v - 4.0).abs() < 1e-10, "{v}");
        let point = SmallCircle::new(0.0, [0.0, 0.0, 1.0]).unwrap();
        assert_eq!(product_density_integral(&g, &point, 16, &MixedVolumeConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn curve_json() {
        let spec = CurveSpec::from_json(r#"{"space": "R2", "type": "circle", "radius": 2}"#).unwrap();
        let CurveDefinition::Single(c) = spec.build().unwrap() else { panic!() };
        assert!((arclength(c.as_ref(), 64).unwrap() - 2.0 * TAU).abs() < 1e-10);
        let spec = CurveSpec::from_json(
            r#"{"space": "S2xS2", "factors": [{"type": "great_circle"}, {"type": "small_circle", "colatitude": 0.5}]}"#,
        )
        .unwrap();
        assert!(matches!(spec.build().unwrap(), CurveDefinition::Product(..)));
        assert!(CurveSpec::from_json(r#"{"space": "R5", "type": "circle"}"#).unwrap().build().is_err());
        assert!(CurveSpec::from_json(r#"{"space": "S2", "type": "small_circle"}"#).unwrap().build().is_err());
        assert!(CurveSpec::from_json(r#"{"bogus": 1}"#).is_err());
    }
}
