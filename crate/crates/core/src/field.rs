//! Smooth scalar functions on flat chart domains, with gradients.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

/// A smooth real function on `R^n` (or a chart of it) with its gradient.
///
/// Implementations must be callable from several threads at once.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(x, grad);
        self.value(x)
    }
}

pub type FieldRef = Arc<dyn ScalarField>;

impl fmt::Debug for dyn ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField(dim = {})", self.dim())
    }
}

impl ScalarField for FieldRef {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (**self).gradient(x, grad)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// `amplitude * cos(w . x)` or `amplitude * sin(w . x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMode {
    pub frequency: Vec<f64>,
    pub kind: TrigKind,
    pub amplitude: f64,
}

impl TrigMode {
    pub fn new(frequency: Vec<f64>, kind: TrigKind) -> Self {
        TrigMode { frequency, kind, amplitude: 1.0 }
    }

    fn phase(&self, x: &[f64]) -> f64 {
        self.frequency.iter().zip(x).map(|(w, x)| w * x).sum()
    }
}

impl ScalarField for TrigMode {
    fn dim(&self) -> usize {
        self.frequency.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let p = self.phase(x);
        self.amplitude
            * match self.kind {
                TrigKind::Cos => p.cos(),
                TrigKind::Sin => p.sin(),
            }
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(x, grad);
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (s, c) = self.phase(x).sin_cos();
        let (v, dv) = match self.kind {
            TrigKind::Cos => (c, -s),
            TrigKind::Sin => (s, c),
        };
        for (g, w) in grad.iter_mut().zip(&self.frequency) {
            *g = self.amplitude * dv * w;
        }
        self.amplitude * v
    }
}

/// `coefficient * prod_j x_j^{e_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub exponents: Vec<u32>,
    pub coefficient: f64,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial { exponents, coefficient: 1.0 }
    }
}

impl ScalarField for Monomial {
    fn dim(&self) -> usize {
        self.exponents.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.coefficient * self.exponents.iter().zip(x).map(|(&e, &x)| x.powi(e as i32)).product::<f64>()
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for (j, g) in grad.iter_mut().enumerate() {
            let e = self.exponents[j];
            *g = if e == 0 {
                0.0
            } else {
                let mut p = self.coefficient * e as f64 * x[j].powi(e as i32 - 1);
                for (k, (&ek, &xk)) in self.exponents.iter().zip(x).enumerate() {
                    if k != j {
                        p *= xk.powi(ek as i32);
                    }
                }
                p
            };
        }
    }
}

/// `sum_j c_j f_j(x) - offset`.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    dim: usize,
    terms: Vec<(f64, FieldRef)>,
    offset: f64,
}

impl LinearCombination {
    pub fn new(terms: Vec<(f64, FieldRef)>, offset: f64) -> Result<Self> {
        let dim = terms.first().map(|(_, f)| f.dim()).ok_or_else(|| invalid("empty linear combination"))?;
        for (_, f) in &terms {
            check_dim(dim, f.dim())?;
        }
        Ok(LinearCombination { dim, terms, offset })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl ScalarField for LinearCombination {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(x)).sum::<f64>() - self.offset
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(x, grad);
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut tmp = vec![0.0; grad.len()];
        let mut v = -self.offset;
        for (c, f) in &self.terms {
            v += c * f.value_and_gradient(x, &mut tmp);
            grad.iter_mut().zip(&tmp).for_each(|(g, t)| *g += c * t);
        }
        v
    }
}

/// `x -> f(x + shift)`.
#[derive(Debug, Clone)]
pub struct Shifted {
    pub inner: FieldRef,
    pub shift: Vec<f64>,
}

impl Shifted {
    fn moved(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(a, b)| a + b).collect()
    }
}

impl ScalarField for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(&self.moved(x))
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.inner.gradient(&self.moved(x), grad)
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.inner.value_and_gradient(&self.moved(x), grad)
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A field from a pair of closures.
pub struct FnField {
    dim: usize,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        FnField { dim, value: Box::new(value), gradient: Box::new(gradient) }
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (self.gradient)(x, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChartDomain {
    /// `prod_j [0, P_j)` with periodic identification.
    Torus { periods: Vec<f64> },
    /// `prod_j [lo_j, hi_j]`.
    Box { bounds: Vec<[f64; 2]> },
}

impl ChartDomain {
    pub fn torus(periods: Vec<f64>) -> Result<Self> {
        let d = ChartDomain::Torus { periods };
        d.validate()?;
        Ok(d)
    }

    /// `[0, 2 pi)^n`.
    pub fn standard_torus(n: usize) -> Self {
        ChartDomain::Torus { periods: vec![std::f64::consts::TAU; n] }
    }

    pub fn unit_box(n: usize) -> Self {
        ChartDomain::Box { bounds: vec![[0.0, 1.0]; n] }
    }

    pub fn boxed(bounds: Vec<[f64; 2]>) -> Result<Self> {
        let d = ChartDomain::Box { bounds };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChartDomain::Torus { periods } => {
                if periods.is_empty() {
                    return Err(invalid("domain dimension must be at least 1"));
                }
                if periods.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
                    return Err(invalid("torus periods must be positive"));
                }
            }
            ChartDomain::Box { bounds } => {
                if bounds.is_empty() {
                    return Err(invalid("domain dimension must be at least 1"));
                }
                if bounds.iter().any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
                    return Err(invalid("box bounds need lo < hi"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ChartDomain::Torus { periods } => periods.len(),
            ChartDomain::Box { bounds } => bounds.len(),
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, ChartDomain::Torus { .. })
    }

    /// `(lo, hi)` of axis `j`; torus axes are `[0, P_j)`.
    pub fn axis(&self, j: usize) -> (f64, f64) {
        match self {
            ChartDomain::Torus { periods } => (0.0, periods[j]),
            ChartDomain::Box { bounds } => (bounds[j][0], bounds[j][1]),
        }
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.axis(j).1 - self.axis(j).0).product()
    }

    /// Reduces torus coordinates modulo the periods; rejects points outside a box.
    pub fn reduce(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        match self {
            ChartDomain::Torus { periods } => Ok(x
                .iter()
                .zip(periods)
                .map(|(&v, &p)| {
                    let r = v.rem_euclid(p);
                    if r >= p {
                        0.0
                    } else {
                        r
                    }
                })
                .collect()),
            ChartDomain::Box { bounds } => {
                if x.iter().zip(bounds).all(|(v, [lo, hi])| *v >= *lo && *v <= *hi) {
                    Ok(x.to_vec())
                } else {
                    Err(Error::OutsideDomain { point: x.to_vec() })
                }
            }
        }
    }

    /// Distance with the periodic metric on torus axes.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..self.dim())
            .map(|j| {
                let mut d = (a[j] - b[j]).abs();
                if let ChartDomain::Torus { periods } = self {
                    d %= periods[j];
                    d = d.min(periods[j] - d);
                }
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
pub(crate) mod testing {
    use super::ScalarField;

    /// Max relative discrepancy between the gradient and central differences.
    pub fn gradient_fd_error(f: &dyn ScalarField, x: &[f64]) -> f64 {
        let n = f.dim();
        let mut g = vec![0.0; n];
        f.gradient(x, &mut g);
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        (0..n)
            .map(|j| {
                let h = 1e-6 * (1.0 + x[j].abs());
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[j] += h;
                m[j] -= h;
                let fd = (f.value(&p) - f.value(&m)) / (2.0 * h);
                (fd - g[j]).abs() / scale
            })
            .fold(0.0, f64::max)
    }
}
