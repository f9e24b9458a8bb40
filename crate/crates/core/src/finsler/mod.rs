//! Finsler ellipsoid fields of finite-dimensional function spaces.
//!
//! A function space `V` with orthonormal basis `f_1, ..., f_d` on a chart
//! defines the evaluation map `theta(x) = (f_1(x), ..., f_d(x))`. Pulling the
//! unit ball of `V` back along `theta` gives, at each point, the ellipsoid with
//! form `Q(x) = J(x)^T J(x)`, where `J(x)` is the `d x n` matrix of basis
//! gradients; its support function is `xi -> |J(x) xi|`.

mod json;

pub use json::{DomainSpec, SpaceFile, SpaceSpec};

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::convex::{CenteredEllipsoid, Frame};
use crate::density::d_m;
use crate::error::{check_dim, invalid, Result};
use crate::field::{ChartDomain, FieldRef, LinearCombination, Monomial, Shifted, TrigKind, TrigMode};
use crate::mixed_volume::MixedVolumeConfig;
use crate::quadrature::TensorGrid;

#[derive(Debug, Clone)]
pub struct FunctionSpace {
    domain: ChartDomain,
    basis: Vec<FieldRef>,
}

impl FunctionSpace {
    /// The basis is taken as orthonormal: coordinates in it are the inner
    /// product coordinates of the space.
    pub fn new(domain: ChartDomain, basis: Vec<FieldRef>) -> Result<Self> {
        domain.validate()?;
        if basis.is_empty() {
            return Err(invalid("function space needs at least one basis function"));
        }
        for f in &basis {
            check_dim(domain.dim(), f.dim())?;
        }
        Ok(FunctionSpace { domain, basis })
    }

    /// Trigonometric modes `cos(2 pi k . x / P)` / `sin(...)` on a torus,
    /// which is `cos(k . x)` for the standard `2 pi` periods.
    pub fn trig(domain: ChartDomain, modes: &[(Vec<f64>, TrigKind)]) -> Result<Self> {
        let ChartDomain::Torus { periods } = &domain else {
            return Err(invalid("trigonometric spaces live on a torus"));
        };
        let basis = modes
            .iter()
            .map(|(k, kind)| {
                check_dim(periods.len(), k.len())?;
                let w = k.iter().zip(periods).map(|(k, p)| std::f64::consts::TAU * k / p).collect();
                Ok(Arc::new(TrigMode::new(w, *kind)) as FieldRef)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, basis)
    }

    /// Monomials `prod x_j^{e_j}`.
    pub fn poly(domain: ChartDomain, exponents: &[Vec<u32>]) -> Result<Self> {
        let basis = exponents
            .iter()
            .map(|e| {
                check_dim(domain.dim(), e.len())?;
                Ok(Arc::new(Monomial::new(e.clone())) as FieldRef)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, basis)
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn basis(&self) -> &[FieldRef] {
        &self.basis
    }

    /// Number of basis functions `d`.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// Every basis function multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let basis = self
            .basis
            .iter()
            .map(|f| Arc::new(LinearCombination::new(vec![(factor, f.clone())], 0.0).unwrap()) as FieldRef)
            .collect();
        FunctionSpace { domain: self.domain.clone(), basis }
    }

    /// Every basis function precomposed with `x -> x + shift`.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        check_dim(self.domain.dim(), shift.len())?;
        let basis = self
            .basis
            .iter()
            .map(|f| Arc::new(Shifted { inner: f.clone(), shift: shift.to_vec() }) as FieldRef)
            .collect();
        Ok(FunctionSpace { domain: self.domain.clone(), basis })
    }

    /// Gram-Schmidt against the normalized inner product
    /// `<f, g> = (1/|X|) int_X f g`, evaluated on a quadrature grid.
    pub fn orthonormalized(&self, nodes: &[usize]) -> Result<Self> {
        let grid = TensorGrid::new(&self.domain, nodes)?;
        let vol = self.domain.volume();
        let samples: Vec<(Vec<f64>, f64)> = (0..grid.len()).map(|k| grid.node(k)).collect();
        let values: Vec<Vec<f64>> =
            self.basis.iter().map(|f| samples.iter().map(|(x, _)| f.value(x)).collect()).collect();
        let inner = |a: &[f64], b: &[f64]| {
            samples.iter().zip(a.iter().zip(b)).map(|((_, w), (x, y))| w * x * y).sum::<f64>() / vol
        };

        // coefficient rows expressing each new function in the old basis
        let mut coeffs: Vec<Vec<f64>> = Vec::new();
        let mut new_values: Vec<Vec<f64>> = Vec::new();
        for (i, v) in values.iter().enumerate() {
            let mut c = vec![0.0; self.basis.len()];
            c[i] = 1.0;
            let mut w = v.clone();
            for (q, qv) in coeffs.iter().zip(&new_values) {
                let proj = inner(&w, qv);
                w.iter_mut().zip(qv).for_each(|(a, b)| *a -= proj * b);
                c.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
            }
            let norm = inner(&w, &w).sqrt();
            let scale = inner(v, v).sqrt();
            if norm <= 1e-10 * scale.max(1e-300) {
                return Err(invalid(format!("basis function {i} is linearly dependent on the previous ones")));
            }
            w.iter_mut().for_each(|a| *a /= norm);
            c.iter_mut().for_each(|a| *a /= norm);
            coeffs.push(c);
            new_values.push(w);
        }
        let basis = coeffs
            .into_iter()
            .map(|c| {
                let terms = c.into_iter().zip(self.basis.iter().cloned()).filter(|(c, _)| *c != 0.0).collect();
                Ok(Arc::new(LinearCombination::new(terms, 0.0)?) as FieldRef)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionSpace { domain: self.domain.clone(), basis })
    }

    /// `d x n` matrix of basis gradients at an already reduced point.
    fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.domain.dim();
        let mut j = DMatrix::zeros(self.basis.len(), n);
        let mut g = vec![0.0; n];
        for (r, f) in self.basis.iter().enumerate() {
            f.gradient(x, &mut g);
            for c in 0..n {
                j[(r, c)] = g[c];
            }
        }
        j
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let x = self.domain.reduce(x)?;
        Ok(self.jacobian_at(&x))
    }
}

/// `theta(x) = (f_1(x), ..., f_d(x))`.
pub fn theta(space: &FunctionSpace, x: &[f64]) -> Result<Vec<f64>> {
    let x = space.domain.reduce(x)?;
    Ok(space.basis.iter().map(|f| f.value(&x)).collect())
}

/// The ellipsoid `E(x)` with form `J(x)^T J(x)`.
pub fn finsler_ellipsoid(space: &FunctionSpace, x: &[f64]) -> Result<CenteredEllipsoid> {
    CenteredEllipsoid::from_gram(&space.jacobian(x)?)
}

/// `x -> E(x)` for one function space.
#[derive(Debug, Clone)]
pub struct FinslerEllipsoidField {
    space: FunctionSpace,
}

impl FinslerEllipsoidField {
    pub fn new(space: FunctionSpace) -> Self {
        FinslerEllipsoidField { space }
    }

    pub fn space(&self) -> &FunctionSpace {
        &self.space
    }

    pub fn at(&self, x: &[f64]) -> Result<CenteredEllipsoid> {
        finsler_ellipsoid(&self.space, x)
    }
}

/// `int_X vol_n(E(x)) dx` with `vol_n(E) = kappa_n sqrt(det Q)`.
pub fn symplectic_volume(space: &FunctionSpace, grid: &[usize]) -> Result<f64> {
    let g = TensorGrid::new(&space.domain, grid)?;
    g.integrate(|x| Ok(finsler_ellipsoid(space, x)?.volume()))
}

pub(crate) fn common_domain(spaces: &[FunctionSpace]) -> Result<&ChartDomain> {
    let first = spaces.first().ok_or_else(|| invalid("need at least one function space"))?;
    let domain = &first.domain;
    if spaces.iter().any(|s| &s.domain != domain) {
        return Err(invalid("function spaces must share one chart domain"));
    }
    if spaces.len() != domain.dim() {
        return Err(invalid(format!("{} function spaces on a domain of dimension {}", spaces.len(), domain.dim())));
    }
    Ok(domain)
}

/// `int_X d_n(E_1(x), ..., E_n(x))(e_1, ..., e_n) dx`.
pub fn mixed_symplectic_volume(spaces: &[FunctionSpace], grid: &[usize], config: &MixedVolumeConfig) -> Result<f64> {
    let domain = common_domain(spaces)?;
    let frame = Frame::standard(domain.dim());
    let g = TensorGrid::new(domain, grid)?;
    g.integrate(|x| {
        let bodies = spaces.iter().map(|s| finsler_ellipsoid(s, x)).collect::<Result<Vec<_>>>()?;
        Ok(d_m(&bodies, &frame, config)?.value)
    })
}
