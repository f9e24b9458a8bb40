//! JSON definitions of chart domains and function spaces.
//!
//! ```json
//! { "domain": {"kind": "torus", "dim": 2, "periods": [6.283185307179586, 6.283185307179586]},
//!   "spaces": [ {"type": "trig", "modes": [[[1, 0], "cos"], [[1, 0], "sin"]]},
//!               {"type": "poly", "exponents": [[0, 1]], "scale": 2.0} ] }
//! ```
//!
//! `periods` defaults to `2 pi` per axis; boxes use `"bounds": [[lo, hi], ...]`.
//! Every space accepts an optional `scale` and `orthonormalize` (Gram-Schmidt
//! against the normalized L2 inner product on a 64-node-per-axis grid).

use serde::{Deserialize, Serialize};

use super::FunctionSpace;
use crate::error::{invalid, Error, Result};
use crate::field::{ChartDomain, TrigKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl DomainSpec {
    pub fn build(&self) -> Result<ChartDomain> {
        match self.kind.as_str() {
            "torus" => {
                let periods = self.periods.clone().unwrap_or_else(|| vec![std::f64::consts::TAU; self.dim]);
                if periods.len() != self.dim {
                    return Err(invalid(format!("{} periods for a {}-dimensional torus", periods.len(), self.dim)));
                }
                ChartDomain::torus(periods)
            }
            "box" => {
                let bounds = self.bounds.clone().ok_or_else(|| invalid("box domain needs \"bounds\""))?;
                if bounds.len() != self.dim {
                    return Err(invalid(format!("{} bounds for a {}-dimensional box", bounds.len(), self.dim)));
                }
                ChartDomain::boxed(bounds)
            }
            other => Err(invalid(format!("unknown domain kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Trig {
        modes: Vec<(Vec<f64>, TrigKind)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default)]
        orthonormalize: bool,
    },
    Poly {
        exponents: Vec<Vec<u32>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        #[serde(default)]
        orthonormalize: bool,
    },
}

const GRAM_SCHMIDT_NODES: usize = 64;

impl SpaceSpec {
    pub fn build(&self, domain: &ChartDomain) -> Result<FunctionSpace> {
        let (space, scale, ortho) = match self {
            SpaceSpec::Trig { modes, scale, orthonormalize } => {
                (FunctionSpace::trig(domain.clone(), modes)?, *scale, *orthonormalize)
            }
            SpaceSpec::Poly { exponents, scale, orthonormalize } => {
                (FunctionSpace::poly(domain.clone(), exponents)?, *scale, *orthonormalize)
            }
        };
        let space = if ortho { space.orthonormalized(&vec![GRAM_SCHMIDT_NODES; domain.dim()])? } else { space };
        Ok(match scale {
            Some(s) if !s.is_finite() => return Err(invalid("scale must be finite")),
            Some(s) => space.scaled(s),
            None => space,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub domain: DomainSpec,
    pub spaces: Vec<SpaceSpec>,
}

impl SpaceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<(ChartDomain, Vec<FunctionSpace>)> {
        let domain = self.domain.build()?;
        let spaces = self.spaces.iter().map(|s| s.build(&domain)).collect::<Result<Vec<_>>>()?;
        Ok((domain, spaces))
    }
}
