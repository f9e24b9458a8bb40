//! Tensor-product quadrature on chart domains: trapezoid on periodic axes,
//! Gauss-Legendre on bounded axes.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::field::ChartDomain;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone)]
pub struct TensorGrid {
    axes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl TensorGrid {
    pub fn new(domain: &ChartDomain, nodes: &[usize]) -> Result<Self> {
        if nodes.len() != domain.dim() {
            return Err(invalid(format!(
                "grid has {} axes but the domain has dimension {}",
                nodes.len(),
                domain.dim()
            )));
        }
        if nodes.iter().any(|&n| n < 4) {
            return Err(invalid("quadrature needs at least 4 nodes per axis"));
        }
        let axes = nodes
            .iter()
            .enumerate()
            .map(|(j, &n)| {
                let (lo, hi) = domain.axis(j);
                let len = hi - lo;
                if domain.is_torus() {
                    let h = len / n as f64;
                    ((0..n).map(|k| lo + k as f64 * h).collect(), vec![h; n])
                } else {
                    let (x, w) = gauss_legendre(n);
                    (x.iter().map(|t| lo + 0.5 * (t + 1.0) * len).collect(), w.iter().map(|w| 0.5 * len * w).collect())
                }
            })
            .collect();
        Ok(TensorGrid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|(x, _)| x.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point and weight of flat index `k` (last axis fastest).
    pub fn node(&self, mut k: usize) -> (Vec<f64>, f64) {
        let mut x = vec![0.0; self.axes.len()];
        let mut w = 1.0;
        for j in (0..self.axes.len()).rev() {
            let n = self.axes[j].0.len();
            let i = k % n;
            k /= n;
            x[j] = self.axes[j].0[i];
            w *= self.axes[j].1[i];
        }
        (x, w)
    }

    /// Integrates `f` over the grid. Nodes are evaluated in parallel and
    /// summed pairwise in index order, so the result does not depend on the
    /// thread count.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let terms: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let (x, w) = self.node(k);
                f(&x).map(|v| w * v)
            })
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&terms))
    }
}

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [4, 5, 10, 17] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-12, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn trapezoid_is_spectral_on_torus() {
        let d = ChartDomain::standard_torus(2);
        let g = TensorGrid::new(&d, &[16, 16]).unwrap();
        let v = g.integrate(|x| Ok((x[0].cos() + 2.0).powi(2) * x[1].sin().powi(2))).unwrap();
        // (2 pi * 4.5) * pi
        assert!((v - 9.0 * PI * PI).abs() < 1e-10);
        assert_eq!(g.len(), 256);
        let one = g.integrate(|_| Ok(1.0)).unwrap();
        assert!((one - TAU * TAU).abs() < 1e-12);
    }

    #[test]
    fn box_grid_maps_interval() {
        let d = ChartDomain::boxed(vec![[1.0, 3.0]]).unwrap();
        let g = TensorGrid::new(&d, &[6]).unwrap();
        let v = g.integrate(|x| Ok(x[0].powi(3))).unwrap();
        assert!((v - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_grids() {
        let d = ChartDomain::standard_torus(1);
        assert!(TensorGrid::new(&d, &[3]).is_err());
        assert!(TensorGrid::new(&d, &[8, 8]).is_err());
    }
}
