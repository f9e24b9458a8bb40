//! Mixed densities `d_m(A_1, ..., A_m)` of centered ellipsoids.
//!
//! The value of `d_m` on a frame `xi_1, ..., xi_m` is the mixed volume of the
//! bodies projected onto the span of the frame, measured with the volume form
//! for which the frame's parallelotope has unit volume. In frame coordinates a
//! projected body has form `B^T Q B`.
//!
//! Products of first-order densities satisfy
//! `d_1(A_1) ... d_1(A_m) = m! d_m(A_1, ..., A_m)`; that identity is how
//! [`product_d1`] is computed.

use serde::{Deserialize, Serialize};

use crate::convex::{CenteredEllipsoid, Frame};
use crate::error::{check_dim, invalid, Result};
use crate::mixed_volume::MixedVolumeConfig;
use crate::special::factorial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub order: usize,
}

/// `d_1(A)(xi) = h(xi) - h(-xi) = 2 h(xi)`.
pub fn d1(body: &CenteredEllipsoid, xi: &[f64]) -> Result<DensityValue> {
    Ok(DensityValue { value: 2.0 * body.support(xi)?, order: 1 })
}

pub fn d_m(bodies: &[CenteredEllipsoid], frame: &Frame, config: &MixedVolumeConfig) -> Result<DensityValue> {
    let m = frame.len();
    if bodies.len() != m {
        return Err(invalid(format!("{} bodies for a frame of {m} vectors", bodies.len())));
    }
    for b in bodies {
        check_dim(frame.ambient_dim(), b.dim())?;
    }
    if frame.is_degenerate() {
        return Ok(DensityValue { value: 0.0, order: m });
    }
    let projected = bodies.iter().map(|b| b.project(frame)).collect::<Result<Vec<_>>>()?;
    let mv = config.compute(&projected)?;
    Ok(DensityValue { value: mv.value.max(0.0), order: m })
}

/// The product `d_1(A_1) ... d_1(A_m)` evaluated on `frame`, i.e. `m! d_m`.
pub fn product_d1(bodies: &[CenteredEllipsoid], frame: &Frame, config: &MixedVolumeConfig) -> Result<DensityValue> {
    let d = d_m(bodies, frame, config)?;
    Ok(DensityValue { value: factorial(d.order) * d.value, order: d.order })
}

/// A tangent vector of a product of Euclidean spaces, with declared block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    blocks: Vec<usize>,
    coords: Vec<f64>,
}

impl ProductVector {
    pub fn new(blocks: Vec<usize>, coords: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(invalid("product blocks must be non-empty"));
        }
        check_dim(blocks.iter().sum(), coords.len())?;
        Ok(ProductVector { blocks, coords })
    }

    /// Concatenates per-factor components.
    pub fn from_components(components: &[Vec<f64>]) -> Result<Self> {
        Self::new(components.iter().map(Vec::len).collect(), components.concat())
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn component(&self, i: usize) -> Result<&[f64]> {
        if i >= self.blocks.len() {
            return Err(invalid(format!("factor index {i} out of range for {} factors", self.blocks.len())));
        }
        let start: usize = self.blocks[..i].iter().sum();
        Ok(&self.coords[start..start + self.blocks[i]])
    }
}

/// Unit ball of factor `i`, embedded as a degenerate ellipsoid in the full space.
pub fn factor_ball(blocks: &[usize], i: usize) -> Result<CenteredEllipsoid> {
    if i >= blocks.len() {
        return Err(invalid(format!("factor index {i} out of range for {} factors", blocks.len())));
    }
    let start: usize = blocks[..i].iter().sum();
    let total: usize = blocks.iter().sum();
    let mut diag = vec![0.0; total];
    diag[start..start + blocks[i]].iter_mut().for_each(|v| *v = 1.0);
    CenteredEllipsoid::diagonal(&diag)
}

/// Euclidean length of the `i`-th component.
pub fn vol1_factor(i: usize, xi: &ProductVector) -> Result<DensityValue> {
    let c = xi.component(i)?;
    Ok(DensityValue { value: c.iter().map(|v| v * v).sum::<f64>().sqrt(), order: 1 })
}
