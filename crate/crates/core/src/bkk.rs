//! Average number of solutions of `f_1 - a_1 = ... = f_n - a_n = 0` with
//! `f_i - a_i` drawn from the invariant hyperplane ensemble on `V_i^*`,
//! computed three ways: Monte Carlo root counting, the integral of the
//! product density `2^{-n} int D_1(E_1)...D_1(E_n)`, and `n!/2^n` times the
//! mixed symplectic volume.

use serde::{Deserialize, Serialize};

use crate::convex::Frame;
use crate::crofton::{run_trials, sample_hyperplane};
use crate::density::product_d1;
use crate::error::{invalid, Result};
use crate::estimate::Estimate;
use crate::field::{ChartDomain, FieldRef, LinearCombination, ScalarField};
use crate::finsler::{common_domain, finsler_ellipsoid, mixed_symplectic_volume, theta, FunctionSpace, SpaceFile};
use crate::mixed_volume::MixedVolumeConfig;
use crate::quadrature::TensorGrid;
use crate::rng::subseed;
use crate::roots::{count_roots, ScalarSystem, MIN_RESOLUTION};
use crate::special::factorial;

pub const DEFAULT_MARGIN: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct BkkExperiment {
    spaces: Vec<FunctionSpace>,
    trials: u64,
    seed: u64,
    ranges: Vec<f64>,
    sups: Vec<f64>,
    grid: Vec<usize>,
    resolution: Vec<usize>,
    mixed_volume: MixedVolumeConfig,
}

/// Largest `|theta(x)|` on a uniform grid (box grids include the boundary).
pub fn theta_sup(space: &FunctionSpace, per_axis: usize) -> Result<f64> {
    let domain = space.domain();
    let n = domain.dim();
    let counts: Vec<usize> = (0..n).map(|_| if domain.is_torus() { per_axis } else { per_axis + 1 }).collect();
    let total: usize = counts.iter().product();
    let mut sup = 0.0f64;
    let mut x = vec![0.0; n];
    for k in 0..total {
        let mut r = k;
        for j in (0..n).rev() {
            let (lo, hi) = domain.axis(j);
            x[j] = lo + (hi - lo) * (r % counts[j]) as f64 / per_axis as f64;
            r /= counts[j];
        }
        let t = theta(space, &x)?;
        sup = sup.max(t.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    Ok(sup)
}

impl BkkExperiment {
    /// Offset ranges default to the gridded sup of `|theta_i|` plus a 1% margin.
    pub fn new(spaces: Vec<FunctionSpace>, trials: u64, seed: u64) -> Result<Self> {
        let domain = common_domain(&spaces)?;
        let n = domain.dim();
        if n > 2 {
            return Err(invalid("average zero counts are supported for n = 1 and n = 2 only"));
        }
        if trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        let sup_nodes = if n == 1 { 1024 } else { 160 };
        let sups = spaces.iter().map(|s| theta_sup(s, sup_nodes)).collect::<Result<Vec<_>>>()?;
        let ranges = sups.iter().map(|s| range_for(*s, DEFAULT_MARGIN)).collect();
        Ok(BkkExperiment {
            spaces,
            trials,
            seed,
            ranges,
            sups,
            grid: vec![64; n],
            resolution: vec![if n == 1 { 256 } else { MIN_RESOLUTION }; n],
            mixed_volume: MixedVolumeConfig::default(),
        })
    }

    /// Explicit offset ranges; each must exceed `sup |theta_i| (1 + 0.01)`.
    pub fn with_ranges(mut self, ranges: Vec<f64>) -> Result<Self> {
        if ranges.len() != self.spaces.len() {
            return Err(invalid(format!("{} ranges for {} spaces", ranges.len(), self.spaces.len())));
        }
        for (i, (&r, &s)) in ranges.iter().zip(&self.sups).enumerate() {
            if !(r.is_finite() && r >= range_for(s, DEFAULT_MARGIN)) {
                return Err(invalid(format!("range {r} for space {i} is below sup|theta| = {s} plus the margin")));
            }
        }
        self.ranges = ranges;
        Ok(self)
    }

    pub fn with_margin(self, margin: f64) -> Result<Self> {
        if !(margin >= DEFAULT_MARGIN && margin.is_finite()) {
            return Err(invalid(format!("margin must be at least {DEFAULT_MARGIN}")));
        }
        let ranges = self.sups.iter().map(|s| range_for(*s, margin)).collect();
        self.with_ranges(ranges)
    }

    pub fn with_grid(mut self, grid: Vec<usize>) -> Result<Self> {
        TensorGrid::new(self.domain(), &grid)?;
        self.grid = grid;
        Ok(self)
    }

    pub fn with_resolution(mut self, resolution: Vec<usize>) -> Result<Self> {
        if resolution.len() != self.dim() || resolution.iter().any(|&r| r < MIN_RESOLUTION) {
            return Err(invalid(format!("resolution needs {} axes of at least {MIN_RESOLUTION} cells", self.dim())));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn with_mixed_volume(mut self, config: MixedVolumeConfig) -> Self {
        self.mixed_volume = config;
        self
    }

    pub fn spaces(&self) -> &[FunctionSpace] {
        &self.spaces
    }

    pub fn domain(&self) -> &ChartDomain {
        self.spaces[0].domain()
    }

    pub fn dim(&self) -> usize {
        self.spaces.len()
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    /// Gridded sup of `|theta_i|` per space.
    pub fn theta_sups(&self) -> &[f64] {
        &self.sups
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    /// Mixed-volume settings with any Monte Carlo seed tied to the experiment seed.
    fn mixed_volume_config(&self) -> MixedVolumeConfig {
        match self.mixed_volume {
            MixedVolumeConfig::GaussianMc { trials, .. } => {
                MixedVolumeConfig::GaussianMc { trials, seed: subseed(self.seed, 1) }
            }
            oracle => oracle,
        }
    }
}

fn range_for(sup: f64, margin: f64) -> f64 {
    // a space of constants still needs a positive range
    (sup * (1.0 + margin)).max(f64::MIN_POSITIVE.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McAverage {
    pub estimate: Estimate,
    pub redraws: u64,
    pub inconclusive_cells: u64,
}

/// Monte Carlo average zero count, weighting each count by `prod_i 2R_i / c_{d_i}`.
pub fn average_zeros_mc(exp: &BkkExperiment) -> Result<McAverage> {
    let domain = exp.domain().clone();
    let inconclusive = std::sync::atomic::AtomicU64::new(0);
    let (values, redraws) = run_trials(exp.trials, exp.seed, |rng| {
        let mut weight = 1.0;
        let mut equations: Vec<Box<dyn ScalarField>> = Vec::with_capacity(exp.dim());
        for (space, &range) in exp.spaces.iter().zip(&exp.ranges) {
            let h = sample_hyperplane(space.len(), range, rng)?;
            weight *= h.weight;
            let terms: Vec<(f64, FieldRef)> = h.u.iter().copied().zip(space.basis().iter().cloned()).collect();
            equations.push(Box::new(LinearCombination::new(terms, h.a)?));
        }
        let sys = ScalarSystem::new(domain.clone(), equations)?;
        let roots = count_roots(&sys, &exp.resolution)?;
        inconclusive.fetch_add(roots.inconclusive_cells as u64, std::sync::atomic::Ordering::Relaxed);
        Ok(roots.is_transversal().then_some(weight * roots.count as f64))
    })?;
    Ok(McAverage { estimate: Estimate::from_samples(&values), redraws, inconclusive_cells: inconclusive.into_inner() })
}

/// `2^{-n} int_X D_1(E_1) ... D_1(E_n)` on the standard frame.
pub fn average_zeros_density(exp: &BkkExperiment) -> Result<f64> {
    let n = exp.dim();
    let frame = Frame::standard(n);
    let config = exp.mixed_volume_config();
    let integral = TensorGrid::new(exp.domain(), &exp.grid)?.integrate(|x| {
        let bodies = exp.spaces.iter().map(|s| finsler_ellipsoid(s, x)).collect::<Result<Vec<_>>>()?;
        Ok(product_d1(&bodies, &frame, &config)?.value)
    })?;
    Ok(integral / 2f64.powi(n as i32))
}

/// `n!/2^n` times the mixed symplectic volume of the Finsler ellipsoids.
pub fn average_zeros_mixedvol(exp: &BkkExperiment) -> Result<f64> {
    let n = exp.dim();
    let v = mixed_symplectic_volume(&exp.spaces, &exp.grid, &exp.mixed_volume_config())?;
    Ok(factorial(n) / 2f64.powi(n as i32) * v)
}

/// Relative gap `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaps {
    pub mc_density: f64,
    pub mc_mixedvol: f64,
    pub density_mixedvol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BkkReport {
    pub dim: usize,
    pub trials: u64,
    pub seed: u64,
    pub ranges: Vec<f64>,
    pub mc_average: Estimate,
    pub density_average: f64,
    pub mixed_volume_average: f64,
    pub gaps: Gaps,
    pub redraws: u64,
    pub inconclusive_cells: u64,
}

impl BkkReport {
    pub const CSV_HEADER: &'static str = "dim,trials,seed,mc_average,mc_std_error,density_average,mixed_volume_average,gap_mc_density,gap_mc_mixedvol,gap_density_mixedvol,redraws,inconclusive_cells";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dim,
            self.trials,
            self.seed,
            self.mc_average.value,
            self.mc_average.std_error,
            self.density_average,
            self.mixed_volume_average,
            self.gaps.mc_density,
            self.gaps.mc_mixedvol,
            self.gaps.density_mixedvol,
            self.redraws,
            self.inconclusive_cells
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Monte Carlo within `k` std errors plus `rel` of each quadrature value,
    /// and the two quadrature values within `rel` of each other.
    pub fn agrees(&self, k: f64, rel: f64) -> bool {
        self.mc_average.agrees_with(self.density_average, k, rel)
            && self.mc_average.agrees_with(self.mixed_volume_average, k, rel)
            && (self.density_average - self.mixed_volume_average).abs()
                <= rel * self.density_average.abs().max(self.mixed_volume_average.abs())
    }
}

/// Runs all three methods with one seed.
pub fn run(exp: &BkkExperiment) -> Result<BkkReport> {
    let mc = average_zeros_mc(exp)?;
    let density = average_zeros_density(exp)?;
    let mixed = average_zeros_mixedvol(exp)?;
    Ok(BkkReport {
        dim: exp.dim(),
        trials: exp.trials,
        seed: exp.seed,
        ranges: exp.ranges.clone(),
        mc_average: mc.estimate,
        density_average: density,
        mixed_volume_average: mixed,
        gaps: Gaps {
            mc_density: relative_gap(mc.estimate.value, density),
            mc_mixedvol: relative_gap(mc.estimate.value, mixed),
            density_mixedvol: relative_gap(density, mixed),
        },
        redraws: mc.redraws,
        inconclusive_cells: mc.inconclusive_cells,
    })
}

/// JSON experiment file: the function-space format plus run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BkkConfig {
    #[serde(flatten)]
    pub spaces: SpaceFile,
    pub trials: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_volume: Option<MixedVolumeConfig>,
}

impl BkkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Parse(e.to_string()))
    }

    pub fn experiment(&self, seed: u64) -> Result<BkkExperiment> {
        let (_, spaces) = self.spaces.build()?;
        let mut exp = BkkExperiment::new(spaces, self.trials, seed)?;
        if self.ranges.is_some() && self.margin.is_some() {
            return Err(invalid("give either \"ranges\" or \"margin\", not both"));
        }
        if let Some(m) = self.margin {
            exp = exp.with_margin(m)?;
        }
        if let Some(r) = &self.ranges {
            exp = exp.with_ranges(r.clone())?;
        }
        if let Some(g) = &self.grid {
            exp = exp.with_grid(g.clone())?;
        }
        if let Some(r) = &self.resolution {
            exp = exp.with_resolution(r.clone())?;
        }
        if let Some(c) = &self.mixed_volume {
            exp = exp.with_mixed_volume(*c);
        }
        Ok(exp)
    }
}
