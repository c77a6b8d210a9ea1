//! Monte-Carlo runtime: merged resource-state layers, percolation-based 2D
//! renormalization, time-like connections and resource accounting.
//!
//! Sites are the unit of simulation: after merging, a site stands for a
//! cluster of resource states and each in-plane bond is an independent
//! fusion outcome. Qubit-exact rewriting is exercised in `graphstate`.

mod baseline;
mod execute;
mod layer;
mod renorm;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{baseline_retry_execute, DepthModel};
pub use execute::{
    connect_time_like, execute, execute_with_bases, recount_fusions, BasisSummary, DelayLedger, Demand,
    ExecutionReport, LayerRecord, LedgerEntry, Outcome, TimeLikeOutcome,
};
pub use layer::{build_merged_layer, MergedLayer, Rect};
pub use renorm::{module_layout, renormalize, renormalize_2d, ModuleLayout, PathSearch, RenormalizedLattice};

/// Degree every merged site needs: four in-plane bonds plus one temporal
/// qubit towards each neighbouring layer.
pub const REQUIRED_DEGREE: u32 = 6;
pub const TEMPORAL_RESERVE: u32 = 2;
pub const DEFAULT_RSL_CAP: u64 = 1_000_000;
pub const DEFAULT_BUNDLE_SIZE: usize = 5;
pub const MAX_BUNDLE_SIZE: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum OnlineError {
    #[error("resource states of {s} qubits cannot reach degree {d}")]
    CannotGrow { s: u32, d: u32 },
    #[error("invalid hardware config: {0}")]
    Hardware(String),
    #[error("invalid renormalization config: {0}")]
    Renorm(String),
    #[error("virtual layer {vw}x{vh} exceeds the renormalized target {tw}x{th}")]
    VirtualTooLarge { vw: u32, vh: u32, tw: u32, th: u32 },
}

/// Smallest number of stars whose root-leaf merge reaches degree `d`.
pub fn merge_factor(s: u32, d: u32) -> Result<u32, OnlineError> {
    if d == 0 || s < 2 {
        return Err(OnlineError::CannotGrow { s, d });
    }
    if s > d {
        return Ok(1);
    }
    if s <= 2 {
        return Err(OnlineError::CannotGrow { s, d });
    }
    let mut m = 1;
    while (s - 1) + (m - 1) * (s - 2) < d {
        m += 1;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HardwareConfig {
    pub rsl_width: u32,
    pub rsl_height: u32,
    pub resource_state_size: u32,
    pub p_fusion: f64,
    pub p_loss: f64,
    pub retry_batches: u32,
    pub photon_lifetime_cycles: u64,
    pub seed: u64,
    /// Sites of a logical node fused towards the next layer.
    pub bundle_size: usize,
    pub rsl_cap: u64,
}

impl Default for HardwareConfig {
    fn default() -> Self {
        Self {
            rsl_width: 48,
            rsl_height: 48,
            resource_state_size: 4,
            p_fusion: 0.75,
            p_loss: 0.0,
            retry_batches: 1,
            photon_lifetime_cycles: crate::ir::DEFAULT_LIFETIME_CYCLES,
            seed: 0,
            bundle_size: DEFAULT_BUNDLE_SIZE,
            rsl_cap: DEFAULT_RSL_CAP,
        }
    }
}

impl HardwareConfig {
    pub fn new(width: u32, height: u32, resource_state_size: u32, p_fusion: f64) -> Self {
        Self { rsl_width: width, rsl_height: height, resource_state_size, p_fusion, ..Self::default() }
    }

    /// A fusion succeeds only when both photons survive.
    pub fn p_eff(&self) -> f64 {
        self.p_fusion * (1.0 - self.p_loss).powi(2)
    }

    pub fn merge_factor(&self) -> Result<u32, OnlineError> {
        merge_factor(self.resource_state_size, REQUIRED_DEGREE)
    }

    pub fn validate(&self) -> Result<(), OnlineError> {
        let bad = |m: String| Err(OnlineError::Hardware(m));
        if self.rsl_width == 0 || self.rsl_height == 0 {
            return bad("RSL dimensions must be positive".into());
        }
        if !(self.p_fusion > 0.0 && self.p_fusion <= 1.0) {
            return bad(format!("p_fusion {} not in (0, 1]", self.p_fusion));
        }
        if !(0.0..1.0).contains(&self.p_loss) {
            return bad(format!("p_loss {} not in [0, 1)", self.p_loss));
        }
        if !(1..=MAX_BUNDLE_SIZE).contains(&self.bundle_size) {
            return bad(format!("bundle size {} not in 1..={MAX_BUNDLE_SIZE}", self.bundle_size));
        }
        self.merge_factor()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenormConfig {
    pub node_size: u32,
    pub module_count: u32,
    pub mi_ratio: f64,
    pub search: PathSearch,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self { node_size: 24, module_count: 1, mi_ratio: 7.0, search: PathSearch::Strips }
    }
}

impl RenormConfig {
    pub fn new(node_size: u32) -> Self {
        Self { node_size, ..Self::default() }
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<(), OnlineError> {
        if self.node_size < 2 {
            return Err(OnlineError::Renorm(format!("node size {} < 2", self.node_size)));
        }
        if self.module_count == 0 {
            return Err(OnlineError::Renorm("module count must be positive".into()));
        }
        if self.module_count > 1 && self.mi_ratio <= 0.0 {
            return Err(OnlineError::Renorm(format!("MI ratio {} must be positive", self.mi_ratio)));
        }
        module_layout(width, height, self).map(|_| ())
    }

    /// Coarse lattice size a successful renormalization must reach.
    pub fn target_size(&self, width: u32, height: u32) -> Result<(u32, u32), OnlineError> {
        let l = module_layout(width, height, self)?;
        let n = self.node_size;
        Ok((l.kx * (l.module_w / n), l.ky * (l.module_h / n)))
    }
}

/// Independent, thread-count-agnostic random stream for `(seed, index, tag)`.
pub(crate) fn substream(seed: u64, index: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(64).wrapping_add(tag));
    rng
}
