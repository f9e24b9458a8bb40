//! Real roots of square systems `f_i(x) - a_i = 0` on one- and two-dimensional
//! chart domains.
//!
//! One dimension: sign changes on a uniform grid are bisected and polished by
//! Newton; cells whose endpoint derivatives disagree in sign are searched for an
//! interior extremum that could hide a pair of roots.
//!
//! Two dimensions: a cell is discarded when the sampled range of either
//! equation, widened by a Lipschitz margin from the corner gradients, excludes
//! zero. Otherwise, when the Jacobian is close enough to constant over the cell
//! to make the map injective there, a single Newton run from the center
//! decides the cell; when it is not, the cell is split into four, down to a
//! fixed depth.

use rayon::prelude::*;

use crate::error::{check_dim, invalid, Result};
use crate::field::{ChartDomain, ScalarField};

pub const DEDUP_TOL: f64 = 1e-7;
pub const SING_TOL: f64 = 1e-8;
pub const MIN_RESOLUTION: usize = 64;
/// Residual bound guaranteed for every reported root.
pub const RESIDUAL_TOL: f64 = 1e-9;

const MARGIN_SAFETY: f64 = 1.5;
const MAX_DEPTH: usize = 3;
const NEWTON_ITERS: usize = 50;

/// `n` equations on an `n`-dimensional chart, `n` in `{1, 2}`.
pub struct ScalarSystem<'a> {
    domain: ChartDomain,
    equations: Vec<Box<dyn ScalarField + 'a>>,
}

impl<'a> ScalarSystem<'a> {
    pub fn new(domain: ChartDomain, equations: Vec<Box<dyn ScalarField + 'a>>) -> Result<Self> {
        domain.validate()?;
        let n = domain.dim();
        if !(1..=2).contains(&n) {
            return Err(invalid(format!("root counting supports dimensions 1 and 2, got {n}")));
        }
        check_dim(n, equations.len())?;
        for e in &equations {
            check_dim(n, e.dim())?;
        }
        Ok(ScalarSystem { domain, equations })
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn eval(&self, x: &[f64], values: &mut [f64], jac: &mut [f64]) {
        let n = self.dim();
        for (i, e) in self.equations.iter().enumerate() {
            values[i] = e.value_and_gradient(x, &mut jac[i * n..(i + 1) * n]);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    /// Roots in the fundamental domain, sorted lexicographically.
    pub points: Vec<Vec<f64>>,
    pub count: usize,
    /// Smallest singular value of the Jacobian at each root.
    pub conditions: Vec<f64>,
    /// Cells that could neither be excluded nor resolved.
    pub inconclusive_cells: usize,
}

impl RootSet {
    /// Roots whose Jacobian is numerically singular.
    pub fn non_transversal(&self) -> usize {
        self.conditions.iter().filter(|&&s| s < SING_TOL).count()
    }

    pub fn is_transversal(&self) -> bool {
        self.non_transversal() == 0
    }

    pub fn min_condition(&self) -> f64 {
        self.conditions.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn min_singular_value(jac: &[f64], n: usize) -> f64 {
    match n {
        1 => jac[0].abs(),
        _ => {
            let s: f64 = jac.iter().map(|v| v * v).sum();
            let det = (jac[0] * jac[3] - jac[1] * jac[2]).abs();
            let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
            // smaller root of t^2 - s t + det^2, in the cancellation-free form
            let big = 0.5 * (s + disc);
            if big > 0.0 {
                (det * det / big).sqrt()
            } else {
                0.0
            }
        }
    }
}

/// Counts and locates the roots of `sys` using `resolution` cells per axis.
pub fn count_roots(sys: &ScalarSystem, resolution: &[usize]) -> Result<RootSet> {
    let n = sys.dim();
    check_dim(n, resolution.len())?;
    if resolution.iter().any(|&r| r < MIN_RESOLUTION) {
        return Err(invalid(format!("resolution must be at least {MIN_RESOLUTION} cells per axis")));
    }
    let (raw, inconclusive) = match n {
        1 => (roots_1d(sys, resolution[0], None), 0),
        _ => roots_2d(sys, resolution[0], resolution[1]),
    };
    Ok(finish(sys, raw, inconclusive))
}

/// One-dimensional counting with the node values `(f(t_k), f'(t_k))` at the
/// `cells + 1` uniform grid points supplied by the caller. Useful when many
/// systems share expensive, tabulated ingredients.
pub fn count_roots_tabulated(sys: &ScalarSystem, nodes: &[(f64, f64)]) -> Result<RootSet> {
    check_dim(1, sys.dim())?;
    let cells = nodes.len().saturating_sub(1);
    if cells < MIN_RESOLUTION {
        return Err(invalid(format!("resolution must be at least {MIN_RESOLUTION} cells per axis")));
    }
    Ok(finish(sys, roots_1d(sys, cells, Some(nodes)), 0))
}

fn finish(sys: &ScalarSystem, raw: Vec<Vec<f64>>, inconclusive: usize) -> RootSet {
    let n = sys.dim();
    let mut points: Vec<Vec<f64>> = raw.into_iter().map(|x| sys.domain.reduce(&x).unwrap_or(x)).collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    let mut unique: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for p in points {
        if !unique.iter().any(|q| sys.domain.distance(q, &p) < DEDUP_TOL) {
            unique.push(p);
        }
    }
    let mut values = vec![0.0; n];
    let mut jac = vec![0.0; n * n];
    let conditions = unique
        .iter()
        .map(|p| {
            sys.eval(p, &mut values, &mut jac);
            min_singular_value(&jac, n)
        })
        .collect();
    RootSet { count: unique.len(), points: unique, conditions, inconclusive_cells: inconclusive }
}

fn roots_1d(sys: &ScalarSystem, cells: usize, table: Option<&[(f64, f64)]>) -> Vec<Vec<f64>> {
    let f = &sys.equations[0];
    let (lo, hi) = sys.domain.axis(0);
    let h = (hi - lo) / cells as f64;
    let periodic = sys.domain.is_torus();
    let mut g = [0.0];
    let mut nodes: Vec<(f64, f64, f64)> = (0..=cells)
        .map(|k| {
            let t = if k == cells { hi } else { lo + k as f64 * h };
            match table {
                Some(tab) => (t, tab[k].0, tab[k].1),
                None => {
                    let v = f.value_and_gradient(&[t], &mut g);
                    (t, v, g[0])
                }
            }
        })
        .collect();
    if periodic {
        nodes[cells].1 = nodes[0].1;
        nodes[cells].2 = nodes[0].2;
    }

    let value = |t: f64| f.value(&[t]);
    let deriv = |t: f64| {
        let mut g = [0.0];
        f.gradient(&[t], &mut g);
        g[0]
    };

    let mut roots = Vec::new();
    for k in 0..cells {
        let (a, fa, ga) = nodes[k];
        let (b, fb, gb) = nodes[k + 1];
        if fa == 0.0 {
            roots.push(vec![a]);
            continue;
        }
        if fa * fb < 0.0 {
            roots.push(vec![polish(&value, &deriv, bisect(&value, a, b, fa), a, b)]);
        } else if fb != 0.0 && ga * gb < 0.0 {
            // an interior extremum may carry the function across zero and back
            let c = bisect(&deriv, a, b, ga);
            let fc = value(c);
            if fc == 0.0 {
                roots.push(vec![c]);
            } else if fc * fa < 0.0 {
                roots.push(vec![polish(&value, &deriv, bisect(&value, a, c, fa), a, c)]);
                roots.push(vec![polish(&value, &deriv, bisect(&value, c, b, fc), c, b)]);
            }
        }
    }
    if !periodic && nodes[cells].1 == 0.0 {
        roots.push(vec![hi]);
    }
    roots
}

/// Bisection on `[a, b]` where `f(a) = fa` and `f(b)` has the other sign.
fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= 1e-12 * (1.0 + m.abs()) || m == a || m == b {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn polish(f: &impl Fn(f64) -> f64, df: &impl Fn(f64) -> f64, mut t: f64, a: f64, b: f64) -> f64 {
    let mut ft = f(t).abs();
    for _ in 0..3 {
        let d = df(t);
        if d == 0.0 || ft == 0.0 {
            break;
        }
        let next = t - f(t) / d;
        if !(a..=b).contains(&next) {
            break;
        }
        let fn_ = f(next).abs();
        if fn_ >= ft {
            break;
        }
        t = next;
        ft = fn_;
    }
    t
}

#[derive(Clone, Copy)]
struct Corner {
    v: [f64; 2],
    j: [f64; 4],
}

struct Grid2<'s, 'a> {
    sys: &'s ScalarSystem<'a>,
}

impl Grid2<'_, '_> {
    fn corner(&self, x: [f64; 2]) -> Corner {
        let mut v = [0.0; 2];
        let mut j = [0.0; 4];
        self.sys.eval(&x, &mut v, &mut j);
        Corner { v, j }
    }

    fn excluded(&self, c: &[Corner; 4], half_diag: f64) -> bool {
        (0..2).any(|e| {
            let (mut lo, mut hi, mut g) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
            for k in c {
                lo = lo.min(k.v[e]);
                hi = hi.max(k.v[e]);
                g = g.max(k.j[2 * e].hypot(k.j[2 * e + 1]));
            }
            let margin = MARGIN_SAFETY * g * half_diag;
            lo - margin > 0.0 || hi + margin < 0.0
        })
    }

    /// `sigma_min(J(center)) > safety * max_corner |J(corner) - J(center)|`
    /// makes the cell's averaged Jacobians nonsingular, so the map is injective.
    fn injective(&self, c: &[Corner; 4], center: &Corner) -> bool {
        let spread = c
            .iter()
            .map(|k| k.j.iter().zip(&center.j).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        min_singular_value(&center.j, 2) > MARGIN_SAFETY * spread
    }

    fn newton(&self, start: [f64; 2], diag: f64, fscale: f64) -> Option<[f64; 2]> {
        let mut x = start;
        for _ in 0..NEWTON_ITERS {
            let k = self.corner(x);
            let det = k.j[0] * k.j[3] - k.j[1] * k.j[2];
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dx = (k.j[3] * k.v[0] - k.j[1] * k.v[1]) / det;
            let dy = (-k.j[2] * k.v[0] + k.j[0] * k.v[1]) / det;
            x = [x[0] - dx, x[1] - dy];
            if (x[0] - start[0]).hypot(x[1] - start[1]) > 4.0 * diag {
                return None;
            }
            if dx.hypot(dy) <= 1e-14 * (1.0 + x[0].abs() + x[1].abs()) {
                break;
            }
        }
        let k = self.corner(x);
        let tol = RESIDUAL_TOL.min(1e-10 * fscale.max(1.0));
        (k.v[0].abs() <= tol && k.v[1].abs() <= tol).then_some(x)
    }

    /// Processes the cell `[x0, x1] x [y0, y1]`, pushing roots found inside it.
    /// Returns the number of unresolved sub-cells.
    #[allow(clippy::too_many_arguments)]
    fn cell(&self, x0: f64, x1: f64, y0: f64, y1: f64, c: [Corner; 4], depth: usize, out: &mut Vec<Vec<f64>>) -> usize {
        let (hx, hy) = (x1 - x0, y1 - y0);
        let diag = hx.hypot(hy);
        if self.excluded(&c, 0.5 * diag) {
            return 0;
        }
        let mid = [0.5 * (x0 + x1), 0.5 * (y0 + y1)];
        let center = self.corner(mid);
        let unique = self.injective(&c, &center);
        if unique || depth == MAX_DEPTH {
            let fscale = c.iter().flat_map(|k| k.v).fold(0.0f64, |m, v| m.max(v.abs()));
            let slack = 1e-9 * diag;
            let found = self.newton(mid, diag, fscale);
            if let Some(r) = found {
                if r[0] >= x0 - slack && r[0] <= x1 + slack && r[1] >= y0 - slack && r[1] <= y1 + slack {
                    out.push(r.to_vec());
                    if unique {
                        return 0;
                    }
                }
            }
            if unique && found.is_some() {
                return 0;
            }
            if depth == MAX_DEPTH {
                return usize::from(found.is_none());
            }
        }
        // split into four
        let (xm, ym) = (mid[0], mid[1]);
        let bottom = self.corner([xm, y0]);
        let top = self.corner([xm, y1]);
        let left = self.corner([x0, ym]);
        let right = self.corner([x1, ym]);
        // corner order: (x0,y0), (x1,y0), (x0,y1), (x1,y1)
        let subs = [
            (x0, xm, y0, ym, [c[0], bottom, left, center]),
            (xm, x1, y0, ym, [bottom, c[1], center, right]),
            (x0, xm, ym, y1, [left, center, c[2], top]),
            (xm, x1, ym, y1, [center, right, top, c[3]]),
        ];
        subs.into_iter().map(|(a, b, p, q, cc)| self.cell(a, b, p, q, cc, depth + 1, out)).sum()
    }
}

fn roots_2d(sys: &ScalarSystem, nx: usize, ny: usize) -> (Vec<Vec<f64>>, usize) {
    let (xlo, xhi) = sys.domain.axis(0);
    let (ylo, yhi) = sys.domain.axis(1);
    let hx = (xhi - xlo) / nx as f64;
    let hy = (yhi - ylo) / ny as f64;
    let periodic = sys.domain.is_torus();
    let grid = Grid2 { sys };
    let coord = |i: usize, lo: f64, hi: f64, h: f64, n: usize| if i == n { hi } else { lo + i as f64 * h };

    let nodes: Vec<Corner> = (0..(nx + 1) * (ny + 1))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (ny + 1), k % (ny + 1));
            // periodic copies share values with the first row/column
            let (ii, jj) = if periodic { (i % nx, j % ny) } else { (i, j) };
            grid.corner([coord(ii, xlo, xhi, hx, nx), coord(jj, ylo, yhi, hy, ny)])
        })
        .collect();
    let at = |i: usize, j: usize| nodes[i * (ny + 1) + j];

    let rows: Vec<(Vec<Vec<f64>>, usize)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut bad = 0;
            let x0 = xlo + i as f64 * hx;
            for j in 0..ny {
                let y0 = ylo + j as f64 * hy;
                let c = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
                bad += grid.cell(x0, x0 + hx, y0, y0 + hy, c, 0, &mut out);
            }
            (out, bad)
        })
        .collect();
    let mut roots = Vec::new();
    let mut bad = 0;
    for (r, b) in rows {
        roots.extend(r);
        bad += b;
    }
    (roots, bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldRef, FnField, LinearCombination, TrigKind, TrigMode};
    use std::f64::consts::{PI, TAU};

    /// cos(x - c) with c at the middle of the first cell of a 64-cell grid.
    fn centered_cos(a: f64, dim: usize) -> LinearCombination {
        let c = TAU / 128.0;
        let mut k = vec![0.0; dim];
        k[0] = 1.0;
        LinearCombination::new(
            vec![(c.cos(), cos_field(k.clone())), (c.sin(), Arc::new(TrigMode::new(k, TrigKind::Sin)))],
            a,
        )
        .unwrap()
    }
    use std::sync::Arc;

    fn cos_field(k: Vec<f64>) -> FieldRef {
        Arc::new(TrigMode::new(k, TrigKind::Cos))
    }

    #[test]
    fn cos_on_circle_has_two_roots() {
        let sys =
            ScalarSystem::new(ChartDomain::standard_torus(1), vec![Box::new(TrigMode::new(vec![1.0], TrigKind::Cos))])
                .unwrap();
        let r = count_roots(&sys, &[64]).unwrap();
        assert_eq!(r.count, 2);
        assert!((r.points[0][0] - PI / 2.0).abs() < 1e-12);
        assert!((r.points[1][0] - 3.0 * PI / 2.0).abs() < 1e-12);
        assert!(r.is_transversal());
    }

    #[test]
    fn product_of_cosines_on_torus_has_four_roots() {
        let sys = ScalarSystem::new(
            ChartDomain::standard_torus(2),
            vec![
                Box::new(TrigMode::new(vec![1.0, 0.0], TrigKind::Cos)),
                Box::new(TrigMode::new(vec![0.0, 1.0], TrigKind::Cos)),
            ],
        )
        .unwrap();
        let r = count_roots(&sys, &[64, 64]).unwrap();
        assert_eq!(r.count, 4, "{:?}", r.points);
        for p in &r.points {
            assert!(p[0].cos().abs() < RESIDUAL_TOL && p[1].cos().abs() < RESIDUAL_TOL);
        }
        assert_eq!(r.inconclusive_cells, 0);
    }

    #[test]
    fn close_root_pair_in_one_cell_is_found() {
        // cos(x) - a with a just below 1: roots at +-acos(a), about 1e-3 apart
        let a = (5e-4f64).cos();
        let sys = ScalarSystem::new(ChartDomain::standard_torus(1), vec![Box::new(centered_cos(a, 1))]).unwrap();
        assert_eq!(count_roots(&sys, &[64]).unwrap().count, 2);

        let f = centered_cos(a, 2);
        let g = TrigMode::new(vec![0.0, 1.0], TrigKind::Sin);
        let sys = ScalarSystem::new(ChartDomain::standard_torus(2), vec![Box::new(f), Box::new(g)]).unwrap();
        assert_eq!(count_roots(&sys, &[64, 64]).unwrap().count, 4);
    }

    #[test]
    fn box_domain_and_endpoints() {
        // x - 1/3 on [0, 1]
        let f = FnField::new(1, |x| x[0] - 1.0 / 3.0, |_, g| g[0] = 1.0);
        let sys = ScalarSystem::new(ChartDomain::unit_box(1), vec![Box::new(f)]).unwrap();
        let r = count_roots(&sys, &[64]).unwrap();
        assert_eq!(r.count, 1);
        assert!((r.points[0][0] - 1.0 / 3.0).abs() < 1e-12);
        let g = FnField::new(1, |x| x[0] - 1.0, |_, g| g[0] = 1.0);
        let sys = ScalarSystem::new(ChartDomain::unit_box(1), vec![Box::new(g)]).unwrap();
        assert_eq!(count_roots(&sys, &[64]).unwrap().count, 1);
    }

    #[test]
    fn tangential_root_is_flagged() {
        let f = LinearCombination::new(vec![(1.0, cos_field(vec![1.0]))], 1.0).unwrap();
        let sys = ScalarSystem::new(ChartDomain::standard_torus(1), vec![Box::new(f)]).unwrap();
        let r = count_roots(&sys, &[64]).unwrap();
        assert_eq!(r.count, 1);
        assert_eq!(r.non_transversal(), 1);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys =
            ScalarSystem::new(ChartDomain::standard_torus(1), vec![Box::new(TrigMode::new(vec![1.0], TrigKind::Cos))])
                .unwrap();
        assert!(count_roots(&sys, &[32]).is_err());
        assert!(ScalarSystem::new(ChartDomain::standard_torus(3), vec![]).is_err());
        assert!(ScalarSystem::new(
            ChartDomain::standard_torus(2),
            vec![Box::new(TrigMode::new(vec![1.0], TrigKind::Cos))]
        )
        .is_err());
    }

    #[test]
    fn translation_equivariance() {
        use crate::field::Shifted;
        let base = LinearCombination::new(
            vec![(0.8, cos_field(vec![1.0, 0.0])), (0.5, Arc::new(TrigMode::new(vec![1.0, 1.0], TrigKind::Sin)))],
            0.2,
        )
        .unwrap();
        let other = LinearCombination::new(
            vec![(1.0, cos_field(vec![0.0, 1.0])), (-0.4, Arc::new(TrigMode::new(vec![1.0, -1.0], TrigKind::Sin)))],
            -0.1,
        )
        .unwrap();
        let base: FieldRef = Arc::new(base);
        let other: FieldRef = Arc::new(other);
        let d = ChartDomain::standard_torus(2);
        let sys = ScalarSystem::new(d.clone(), vec![Box::new(base.clone()), Box::new(other.clone())]).unwrap();
        let r = count_roots(&sys, &[64, 64]).unwrap();
        let shift = vec![0.9, -2.1];
        let moved = ScalarSystem::new(
            d.clone(),
            vec![
                Box::new(Shifted { inner: base, shift: shift.clone() }),
                Box::new(Shifted { inner: other, shift: shift.clone() }),
            ],
        )
        .unwrap();
        let m = count_roots(&moved, &[64, 64]).unwrap();
        assert_eq!(r.count, m.count);
        assert!(r.count > 0);
        for p in &m.points {
            let back = d.reduce(&[p[0] + shift[0], p[1] + shift[1]]).unwrap();
            assert!(r.points.iter().any(|q| d.distance(q, &back) < 1e-8));
        }
    }
}
