//! Repeat-until-success baseline: every fusion of a layer must succeed,
//! and any failed inter-layer fusion restarts the whole program.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::execute::{ExecutionReport, Outcome};
use super::{substream, HardwareConfig, OnlineError};
use crate::ir::{FlexLatticeIR, VNodeKind};

/// Fusions each layer needs, all of which must succeed at once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthModel {
    pub per_layer: Vec<u64>,
    /// Fusions joining layer `i` to earlier layers.
    pub inter_layer: Vec<u64>,
}

impl DepthModel {
    /// Lattice-pattern stand-in: merge fusions for every active node plus
    /// one fusion per in-layer edge; one per temporal edge between layers.
    pub fn from_ir(ir: &FlexLatticeIR, merge_factor: u32) -> Self {
        let n = ir.layer_count();
        let mut per_layer = vec![0u64; n];
        let mut inter_layer = vec![0u64; n];
        for (l, grid) in ir.layers.iter().enumerate() {
            let active = grid.iter().filter(|k| **k != VNodeKind::Unused).count() as u64;
            per_layer[l] = active * u64::from(merge_factor.saturating_sub(1));
        }
        for e in &ir.spatial_edges {
            per_layer[e.layer as usize] += 1;
        }
        for e in &ir.temporal_edges {
            inter_layer[e.to as usize] += 1;
        }
        Self { per_layer, inter_layer }
    }

    pub fn depth(&self) -> usize {
        self.per_layer.len()
    }
}

/// Geometric draw by inversion; stays exact for success probabilities far
/// below what rejection-based samplers handle quickly.
fn attempts_until_success(q: f64, rng: &mut impl Rng) -> u64 {
    if q >= 1.0 {
        return 1;
    }
    if q <= 0.0 {
        return u64::MAX;
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let failures = (u.ln() / (-q).ln_1p()).floor();
    if failures >= u64::MAX as f64 { u64::MAX } else { failures as u64 + 1 }
}

pub fn baseline_retry_execute(model: &DepthModel, cfg: &HardwareConfig) -> Result<ExecutionReport, OnlineError> {
    cfg.validate()?;
    let p = cfg.p_eff();
    let cap = cfg.rsl_cap;
    let mut rng = substream(cfg.seed, 0, 7);
    let mut rsl = 0u64;
    let mut fusions = 0u64;
    let mut restarts = 0u64;
    let mut capped = false;
    'pass: loop {
        for (i, &f) in model.per_layer.iter().enumerate() {
            let q = p.powf(f as f64);
            let room = cap - rsl;
            let attempts = attempts_until_success(q, &mut rng);
            if attempts > room {
                rsl = cap;
                fusions += room * f;
                capped = true;
                break 'pass;
            }
            rsl += attempts;
            fusions += attempts * f;
            let t = model.inter_layer[i];
            if t > 0 {
                fusions += t;
                if !rng.random_bool(p.powf(t as f64)) {
                    restarts += 1;
                    continue 'pass;
                }
            }
        }
        break;
    }
    let mut r = ExecutionReport {
        outcome: if capped { Outcome::RslCapExceeded } else { Outcome::Completed },
        success: !capped,
        rsl_consumed: rsl,
        merged_layers: rsl,
        merge_factor: 1,
        fusions_attempted: fusions,
        logical_layers: if capped { 0 } else { model.depth() as u64 },
        logical_layer_indices: Vec::new(),
        routing_layer_count: 0,
        delay_peak_cycles: 0,
        bases: Default::default(),
        layers: Vec::new(),
        layers_truncated: false,
        diagnostic: None,
    };
    if capped {
        r.diagnostic = Some(format!("cap of {cap} RSLs reached after {restarts} restarts"));
    }
    Ok(r)
}
