//! Oracle comparisons for the graph rewrite rules and basis propagation.
//!
//! Each check returns `Err(description)` on the first disagreement.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{tableau_from_graph, PauliProduct, Tableau};
use crate::graphstate::{
    propagate_through_fusion, propagate_through_measurement, ByproductWord, FusionBasis,
    GraphError, GraphState, MeasurementBasis, NodeId, Pauli, PauliPair,
};

type Unary = fn(&GraphState, NodeId) -> Result<GraphState, GraphError>;
type Binary = fn(&GraphState, NodeId, NodeId) -> Result<GraphState, GraphError>;

/// The rewrite rules under test; injectable so a mutated rule can be shown
/// to fail verification.
#[derive(Clone, Copy)]
pub struct RewriteRules {
    /// Local complementation that records its compensating byproducts.
    pub local_complement: Unary,
    pub measure_z: Unary,
    pub fuse_success: Binary,
    pub fuse_fail: Binary,
}

impl Default for RewriteRules {
    fn default() -> Self {
        Self {
            local_complement: GraphState::local_complement_tracked,
            measure_z: GraphState::measure_z,
            fuse_success: GraphState::fuse_success,
            fuse_fail: GraphState::fuse_fail,
        }
    }
}

// Every measurement below is either forced or deterministic.
fn no_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

fn physical(g: &GraphState) -> Result<Tableau, String> {
    tableau_from_graph(g)
        .and_then(|t| t.apply_byproducts(g))
        .map_err(|e| e.to_string())
}

/// Measures the products in sequence over every outcome branch, returning
/// the reachable post-measurement tableaux (with their outcome bits).
fn branches(t: &Tableau, ps: &[PauliProduct]) -> Result<Vec<(Vec<bool>, bool, Tableau)>, String> {
    let mut out = vec![(Vec::new(), true, t.clone())];
    for p in ps {
        let mut next = Vec::new();
        for (bits, all_det, t) in out {
            for forced in [false, true] {
                match t.measure_pauli(p, Some(forced), &mut no_rng()) {
                    Ok((t2, b, det)) => {
                        let mut bits = bits.clone();
                        bits.push(b);
                        next.push((bits, all_det && det, t2));
                    }
                    Err(super::OracleError::ContradictsDeterministic) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
        out = next;
    }
    Ok(out)
}

fn compare_branches(
    before: &GraphState,
    after: &GraphState,
    measured: &[PauliProduct],
    discard: &[NodeId],
) -> Result<(), String> {
    let expect = physical(after)?;
    for (bits, _, t) in branches(&physical(before)?, measured)? {
        let reduced = t.reduce(discard).map_err(|e| e.to_string())?;
        if !reduced.states_equal_up_to_pauli(&expect).map_err(|e| e.to_string())? {
            return Err(format!("branch {bits:?}: state differs from rewritten graph"));
        }
    }
    Ok(())
}

pub fn check_local_complement(rules: &RewriteRules, g: &GraphState, v: NodeId) -> Result<(), String> {
    let after = (rules.local_complement)(g, v).map_err(|e| e.to_string())?;
    let same = physical(g)?.states_equal(&physical(&after)?).map_err(|e| e.to_string())?;
    if same {
        Ok(())
    } else {
        Err(format!("local complementation at {v} changed the state"))
    }
}

pub fn check_measure_z(rules: &RewriteRules, g: &GraphState, v: NodeId) -> Result<(), String> {
    let after = (rules.measure_z)(g, v).map_err(|e| e.to_string())?;
    compare_branches(g, &after, &[PauliProduct::single(v, Pauli::Z)], &[v])
        .map_err(|e| format!("Z-measurement at {v}: {e}"))
}

pub fn check_fusion_success(
    rules: &RewriteRules,
    g: &GraphState,
    q1: NodeId,
    q2: NodeId,
) -> Result<(), String> {
    let after = (rules.fuse_success)(g, q1, q2).map_err(|e| e.to_string())?;
    let ps = [
        PauliProduct::new(false, vec![(q1, Pauli::X), (q2, Pauli::Z)]),
        PauliProduct::new(false, vec![(q1, Pauli::Z), (q2, Pauli::X)]),
    ];
    compare_branches(g, &after, &ps, &[q1, q2]).map_err(|e| format!("fusion ({q1},{q2}): {e}"))
}

/// A failed fusion acts as a Y-measurement on a photon of degree ≥ 2 and a
/// Z-measurement on one of degree ≤ 1.
pub fn check_fusion_fail(
    rules: &RewriteRules,
    g: &GraphState,
    q1: NodeId,
    q2: NodeId,
) -> Result<(), String> {
    let after = (rules.fuse_fail)(g, q1, q2).map_err(|e| e.to_string())?;
    let kind = |q: NodeId| if g.degree(q) >= 2 { Pauli::Y } else { Pauli::Z };
    let ps = [PauliProduct::single(q1, kind(q1)), PauliProduct::single(q2, kind(q2))];
    compare_branches(g, &after, &ps, &[q1, q2])
        .map_err(|e| format!("failed fusion ({q1},{q2}): {e}"))
}

fn pair_product(p: PauliPair, q1: NodeId, q2: NodeId) -> PauliProduct {
    PauliProduct::new(p.negated, vec![(q1, p.first), (q2, p.second)])
}

/// Both sides of a propagation identity, branch by branch: measuring `lhs`
/// after the byproducts must match measuring `rhs` before them, in outcome
/// determinism, deterministic values and the post-measurement state.
fn compare_propagation(
    g: &GraphState,
    words: &[(NodeId, &ByproductWord)],
    lhs: &[PauliProduct],
    rhs: &[PauliProduct],
) -> Result<(), String> {
    let base = tableau_from_graph(g).map_err(|e| e.to_string())?;
    let apply = |mut t: Tableau| -> Result<Tableau, String> {
        for (q, w) in words {
            t = t.apply_local_clifford(w, *q).map_err(|e| e.to_string())?;
        }
        Ok(t)
    };
    let left = branches(&apply(base.clone())?, lhs)?;
    let right = branches(&base, rhs)?;
    if left.len() != right.len() {
        return Err(format!("{} outcome branches vs {}", left.len(), right.len()));
    }
    for ((lb, ld, lt), (rb, rd, rt)) in left.iter().zip(&right) {
        if lb != rb || ld != rd {
            return Err(format!("outcomes {lb:?}/{ld} vs {rb:?}/{rd}"));
        }
        let rt = apply(rt.clone())?;
        if !lt.states_equal(&rt).map_err(|e| e.to_string())? {
            return Err(format!("post-measurement states differ on branch {lb:?}"));
        }
    }
    Ok(())
}

/// Checks `M_b U = U M_{b'}` for a Pauli-axis basis `b` on qubit `q` of `g`.
pub fn check_measurement_basis(
    g: &GraphState,
    q: NodeId,
    word: &ByproductWord,
    b: MeasurementBasis,
) -> Result<(), String> {
    let (adj, _) = propagate_through_measurement(word, b).map_err(|e| e.to_string())?;
    let prod = |m: MeasurementBasis| -> Result<PauliProduct, String> {
        let (neg, p) = m.as_pauli().ok_or_else(|| format!("basis {m} is not a Pauli axis"))?;
        Ok(PauliProduct::new(neg, vec![(q, p)]))
    };
    compare_propagation(g, &[(q, word)], &[prod(b)?], &[prod(adj)?])
        .map_err(|e| format!("basis {b} under {word:?}: {e}"))
}

/// Checks the fusion-basis identity for words `w1`, `w2` on `q1`, `q2`.
pub fn check_fusion_basis(
    g: &GraphState,
    q1: NodeId,
    q2: NodeId,
    w1: &ByproductWord,
    w2: &ByproductWord,
    f: FusionBasis,
) -> Result<(), String> {
    let adj = propagate_through_fusion(w1, w2, f).map_err(|e| e.to_string())?;
    let lhs = [pair_product(f.a, q1, q2), pair_product(f.b, q1, q2)];
    let rhs = [pair_product(adj.a, q1, q2), pair_product(adj.b, q1, q2)];
    compare_propagation(g, &[(q1, w1), (q2, w2)], &lhs, &rhs)
        .map_err(|e| format!("fusion {f} under {w1:?},{w2:?}: {e}"))
}
