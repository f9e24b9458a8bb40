//! Convex hull volumes of point clouds in one, two and three dimensions.

use std::collections::HashSet;

/// Length, area or volume of the convex hull of `points` in `R^dim`.
/// Degenerate clouds (lower-dimensional hulls) have volume 0.
pub fn hull_volume(points: &[Vec<f64>], dim: usize) -> f64 {
    match dim {
        1 => {
            let (lo, hi) =
                points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
            if lo.is_finite() {
                hi - lo
            } else {
                0.0
            }
        }
        2 => {
            let pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
            polygon_area(&convex_hull_2d(pts))
        }
        3 => {
            let pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
            hull_volume_3d(&pts)
        }
        _ => panic!("hull_volume supports dimensions 1 to 3, got {dim}"),
    }
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull counter-clockwise without
/// collinear points.
pub fn convex_hull_2d(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross2(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy)]
struct Face {
    v: [usize; 3],
    normal: V3,
    offset: f64,
}

impl Face {
    fn new(pts: &[V3], v: [usize; 3]) -> Self {
        let n = cross(sub(pts[v[1]], pts[v[0]]), sub(pts[v[2]], pts[v[0]]));
        let len = norm(n);
        let normal = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
        Face { v, normal, offset: dot(normal, pts[v[0]]) }
    }

    fn distance(&self, p: V3) -> f64 {
        dot(self.normal, p) - self.offset
    }
}

/// Incremental 3-D hull. Returns 0 for coplanar (or smaller) clouds.
pub fn hull_volume_3d(points: &[V3]) -> f64 {
    if points.len() < 4 {
        return 0.0;
    }
    let scale = points.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, &x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;

    // Initial tetrahedron from extreme points.
    let i0 = (0..points.len()).min_by(|&a, &b| points[a].partial_cmp(&points[b]).unwrap()).unwrap();
    let far = |f: &dyn Fn(V3) -> f64| {
        (0..points.len()).max_by(|&a, &b| f(points[a]).partial_cmp(&f(points[b])).unwrap()).unwrap()
    };
    let i1 = far(&|p| norm(sub(p, points[i0])));
    let d01 = sub(points[i1], points[i0]);
    if norm(d01) <= eps {
        return 0.0;
    }
    let i2 = far(&|p| norm(cross(d01, sub(p, points[i0]))) / norm(d01));
    let n012 = cross(d01, sub(points[i2], points[i0]));
    if norm(n012) / norm(d01) <= eps {
        return 0.0;
    }
    let i3 = far(&|p| dot(n012, sub(p, points[i0])).abs() / norm(n012));
    let h = dot(n012, sub(points[i3], points[i0])) / norm(n012);
    if h.abs() <= eps {
        return 0.0;
    }

    let tet = [i0, i1, i2, i3];
    let centroid = {
        let mut c = [0.0; 3];
        for &i in &tet {
            for k in 0..3 {
                c[k] += 0.25 * points[i][k];
            }
        }
        c
    };
    let mut faces: Vec<Face> = [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]]
        .into_iter()
        .map(|v| {
            let f = Face::new(points, v);
            if f.distance(centroid) > 0.0 {
                Face::new(points, [v[0], v[2], v[1]])
            } else {
                f
            }
        })
        .collect();

    for (p_idx, &p) in points.iter().enumerate() {
        if tet.contains(&p_idx) {
            continue;
        }
        let visible: Vec<bool> = faces.iter().map(|f| f.distance(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut directed: HashSet<(usize, usize)> = HashSet::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                directed.insert((f.v[k], f.v[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> =
            directed.iter().filter(|(a, b)| !directed.contains(&(*b, *a))).copied().collect();
        let mut next: Vec<Face> = faces.iter().zip(&visible).filter(|(_, &v)| !v).map(|(f, _)| *f).collect();
        for (a, b) in horizon {
            next.push(Face::new(points, [a, b, p_idx]));
        }
        faces = next;
    }

    let c = {
        let mut c = [0.0; 3];
        for f in &faces {
            for &i in &f.v {
                for k in 0..3 {
                    c[k] += points[i][k];
                }
            }
        }
        let n = (3 * faces.len()) as f64;
        [c[0] / n, c[1] / n, c[2] / n]
    };
    faces
        .iter()
        .map(|f| {
            let a = sub(points[f.v[0]], c);
            let b = sub(points[f.v[1]], c);
            let d = sub(points[f.v[2]], c);
            dot(a, cross(b, d)) / 6.0
        })
        .sum::<f64>()
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, unit_vector};
    use rand::Rng;

    /// Brute force: every plane through three points that has all points on
    /// one side is a facet; volume is the sum of cone volumes over facets.
    fn brute_force_volume(pts: &[V3]) -> f64 {
        let n = pts.len();
        let c = pts.iter().fold([0.0; 3], |acc, p| [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]);
        let c = [c[0] / n as f64, c[1] / n as f64, c[2] / n as f64];
        let mut planes: Vec<(V3, f64)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let nrm = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                    let len = norm(nrm);
                    if len < 1e-12 {
                        continue;
                    }
                    let mut u = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                    let mut off = dot(u, pts[i]);
                    if dot(u, c) > off {
                        u = [-u[0], -u[1], -u[2]];
                        off = -off;
                    }
                    if pts.iter().all(|&p| dot(u, p) <= off + 1e-10)
                        && !planes.iter().any(|(q, o)| norm(sub(*q, u)) < 1e-9 && (o - off).abs() < 1e-9)
                    {
                        planes.push((u, off));
                    }
                }
            }
        }
        planes
            .iter()
            .map(|&(u, off)| {
                // facet polygon: project coplanar points to a 2D basis
                let on: Vec<V3> = pts.iter().copied().filter(|&p| (dot(u, p) - off).abs() < 1e-9).collect();
                let a = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let e1 = cross(u, a);
                let e1 = [e1[0] / norm(e1), e1[1] / norm(e1), e1[2] / norm(e1)];
                let e2 = cross(u, e1);
                let poly = convex_hull_2d(on.iter().map(|&p| [dot(p, e1), dot(p, e2)]).collect());
                polygon_area(&poly) * (off - dot(u, c)) / 3.0
            })
            .sum()
    }

    #[test]
    fn unit_square_and_segment() {
        let sq = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        assert!((hull_volume(&sq, 2) - 1.0).abs() < 1e-15);
        let seg = vec![vec![-1.0], vec![1.0], vec![0.3]];
        assert_eq!(hull_volume(&seg, 1), 2.0);
        let line = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(hull_volume(&line, 2), 0.0);
    }

    #[test]
    fn cube_with_duplicates_and_interior_points() {
        let mut pts = Vec::new();
        for _ in 0..3 {
            for x in [-1.0, 1.0] {
                for y in [-1.0, 1.0] {
                    for z in [-1.0, 1.0] {
                        pts.push([x, y, z]);
                    }
                }
            }
        }
        pts.push([0.0, 0.0, 0.0]);
        pts.push([1.0, 0.0, 0.0]);
        pts.push([0.5, 1.0, -0.5]);
        assert!((hull_volume_3d(&pts) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn flat_cloud_has_zero_volume() {
        let pts: Vec<V3> = (0..20).map(|i| [i as f64, (i * i) as f64, 0.0]).collect();
        assert_eq!(hull_volume_3d(&pts), 0.0);
    }

    #[test]
    fn sphere_samples_approach_ball_volume() {
        let mut rng = stream(3, 0);
        let pts: Vec<V3> = (0..4000)
            .map(|_| {
                let u = unit_vector(&mut rng, 3);
                [u[0], u[1], u[2]]
            })
            .collect();
        let v = hull_volume_3d(&pts);
        let ball = 4.0 * std::f64::consts::PI / 3.0;
        assert!(v < ball && v > 0.99 * ball, "{v}");
    }

    #[test]
    fn matches_brute_force_on_random_clouds() {
        let mut rng = stream(11, 0);
        for _ in 0..30 {
            let n = rng.random_range(4..12);
            let pts: Vec<V3> = (0..n)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let fast = hull_volume_3d(&pts);
            let slow = brute_force_volume(&pts);
            assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }
    }
}
