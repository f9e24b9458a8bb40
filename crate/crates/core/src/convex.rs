//! Centered ellipsoids, frames and support functions.
//!
//! A body is stored by its quadratic form `Q`: it is `{J^T u : |u| <= 1}` for
//! any `J` with `J^T J = Q`, and its support function is `sqrt(xi^T Q xi)`.
//! Rank-deficient forms (points, segments, flat discs) are allowed everywhere.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_dim, invalid, Error, Result};
use crate::special::unit_ball_volume;

/// Relative symmetry tolerance for input forms.
pub const SYM_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL * lambda_max` are accepted and clamped to zero.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CenteredEllipsoid {
    q: DMatrix<f64>,
    sqrt: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl CenteredEllipsoid {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return Err(invalid(format!(
                "quadratic form must be a non-empty square matrix, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(invalid("quadratic form has non-finite entries"));
        }
        let scale = q.amax();
        let asymmetry = (&q - q.transpose()).amax();
        if asymmetry > SYM_TOL * scale.max(f64::MIN_POSITIVE) && asymmetry > 0.0 {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let sym = (&q + q.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let lambda_max = eig.eigenvalues.max().max(0.0);
        let lambda_min = eig.eigenvalues.min();
        if lambda_min < -PSD_TOL * lambda_max || (lambda_max == 0.0 && lambda_min < 0.0) {
            return Err(Error::NotPsd { eigenvalue: lambda_min });
        }
        let clamped = eig.eigenvalues.map(|l| l.max(0.0));
        let v = &eig.eigenvectors;
        let q = v * DMatrix::from_diagonal(&clamped) * v.transpose();
        let sqrt = v * DMatrix::from_diagonal(&clamped.map(f64::sqrt)) * v.transpose();
        Ok(CenteredEllipsoid { q, sqrt, eigenvalues: clamped })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("quadratic form rows must form a square matrix"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Unit ball of `R^dim`.
    pub fn ball(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is a valid form")
    }

    /// The body `{J^T u : |u| <= 1}` for a `d x n` matrix `J`; `Q = J^T J`.
    pub fn from_gram(j: &DMatrix<f64>) -> Result<Self> {
        Self::new(j.transpose() * j)
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Symmetric PSD square root of `Q`.
    pub fn sqrt_matrix(&self) -> &DMatrix<f64> {
        &self.sqrt
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    pub fn rank(&self) -> usize {
        let cut = PSD_TOL * self.largest_eigenvalue();
        self.eigenvalues.iter().filter(|&&l| l > cut && l > 0.0).count()
    }

    pub fn quadratic(&self, xi: &[f64]) -> Result<f64> {
        check_dim(self.dim(), xi.len())?;
        Ok(self.quadratic_unchecked(xi))
    }

    pub(crate) fn quadratic_unchecked(&self, xi: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for (i, xi_i) in xi.iter().enumerate().take(n) {
            let row: f64 = xi.iter().enumerate().take(n).map(|(j, x)| self.q[(i, j)] * x).sum();
            acc += xi_i * row;
        }
        acc
    }

    /// Support function `h(xi) = sqrt(max(xi^T Q xi, 0))`.
    pub fn support(&self, xi: &[f64]) -> Result<f64> {
        Ok(self.quadratic(xi)?.max(0.0).sqrt())
    }

    /// Projection onto the span of `frame`, in frame coordinates: `B^T Q B`.
    pub fn project(&self, frame: &Frame) -> Result<CenteredEllipsoid> {
        check_dim(self.dim(), frame.ambient_dim())?;
        let b = frame.matrix();
        CenteredEllipsoid::new(b.transpose() * &self.q * b)
    }

    /// Lebesgue volume `kappa_n sqrt(det Q)`.
    pub fn volume(&self) -> f64 {
        let det: f64 = self.eigenvalues.iter().product();
        unit_ball_volume(self.dim()) * det.max(0.0).sqrt()
    }

    /// The boundary point `Q u / sqrt(u^T Q u)` with outer normal `u`, or the
    /// origin when `u` is (numerically) in the kernel of `Q`.
    pub fn support_point(&self, u: &[f64], out: &mut [f64]) {
        let n = self.dim();
        let uu: f64 = u.iter().map(|x| x * x).sum();
        let quad = self.quadratic_unchecked(u);
        if quad <= PSD_TOL * self.largest_eigenvalue() * uu || quad <= 0.0 {
            out.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        let s = quad.sqrt();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let row: f64 = u.iter().enumerate().take(n).map(|(j, x)| self.q[(i, j)] * x).sum();
            *o = row / s;
        }
    }
}

/// An ordered list of `m` vectors in `R^ambient_dim`, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    columns: DMatrix<f64>,
}

/// Relative smallest-singular-value cutoff below which a frame is degenerate.
pub const RANK_TOL: f64 = 1e-8;

impl Frame {
    pub fn new(vectors: &[Vec<f64>]) -> Result<Self> {
        let m = vectors.len();
        if m == 0 {
            return Err(invalid("frame needs at least one vector"));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(invalid("frame vectors must be non-empty"));
        }
        for v in vectors {
            check_dim(dim, v.len())?;
        }
        if m > dim {
            return Err(invalid(format!("frame has {m} vectors in dimension {dim}")));
        }
        Ok(Frame { columns: DMatrix::from_fn(dim, m, |i, j| vectors[j][i]) })
    }

    pub fn from_matrix(columns: DMatrix<f64>) -> Result<Self> {
        if columns.ncols() == 0 || columns.ncols() > columns.nrows() {
            return Err(invalid(format!(
                "frame matrix must be d x m with 1 <= m <= d, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        Ok(Frame { columns })
    }

    /// `e_1, ..., e_n` in `R^n`.
    pub fn standard(n: usize) -> Self {
        Frame { columns: DMatrix::identity(n, n) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn len(&self) -> usize {
        self.columns.ncols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.columns.column(i).iter().copied().collect()
    }

    pub fn is_degenerate(&self) -> bool {
        let sv = self.columns.clone().svd(false, false).singular_values;
        let max = sv.max();
        max == 0.0 || sv.min() < RANK_TOL * max
    }
}

/// Support function of a Minkowski sum of ellipsoids.
#[derive(Debug, Clone)]
pub struct SupportSum {
    bodies: Vec<CenteredEllipsoid>,
}

impl SupportSum {
    pub fn new(bodies: Vec<CenteredEllipsoid>) -> Result<Self> {
        if let Some(first) = bodies.first() {
            for b in &bodies[1..] {
                check_dim(first.dim(), b.dim())?;
            }
        }
        Ok(SupportSum { bodies })
    }

    pub fn dim(&self) -> Option<usize> {
        self.bodies.first().map(|b| b.dim())
    }

    pub fn bodies(&self) -> &[CenteredEllipsoid] {
        &self.bodies
    }

    pub fn support(&self, xi: &[f64]) -> Result<f64> {
        self.bodies.iter().map(|b| b.support(xi)).sum()
    }

    /// A boundary point of the sum with outer normal `u`.
    pub fn support_point(&self, u: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let mut tmp = vec![0.0; out.len()];
        for b in &self.bodies {
            b.support_point(u, &mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        }
    }
}

/// Minkowski sum of two ellipsoids, as a support-function evaluator.
pub fn sum(a: &CenteredEllipsoid, b: &CenteredEllipsoid) -> Result<SupportSum> {
    SupportSum::new(vec![a.clone(), b.clone()])
}
