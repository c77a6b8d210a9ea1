use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, Gate};
use crate::graphstate::{GraphState, MeasurementBasis, NodeId, Role};

/// Program graph state plus its measurement pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPattern {
    /// Bases live on the graph's nodes; outputs carry none.
    pub graph: GraphState,
    pub inputs: Vec<NodeId>,
    pub outputs: Vec<NodeId>,
    /// Measurement order (the order the bases were assigned in).
    pub order: Vec<NodeId>,
    /// Wire successor of every measured node.
    pub successor: BTreeMap<NodeId, NodeId>,
}

/// Each `J(α)` on a wire appends a fresh node linked to the wire's frontier
/// and measures the old frontier in `E(−α)` (measuring in `E(θ)` teleports
/// `J(−θ)`); each CZ links the two frontiers.
pub fn translate_circuit(c: &Circuit) -> MeasurementPattern {
    let mut graph = GraphState::new();
    let mut frontier: Vec<NodeId> = (0..c.qubits()).map(|_| graph.add_node()).collect();
    let inputs = frontier.clone();
    let mut order = Vec::new();
    let mut successor = BTreeMap::new();
    for g in c.gates() {
        match *g {
            Gate::J { wire, angle } => {
                let old = frontier[wire];
                let new = graph.add_node();
                graph.add_edge(old, new).unwrap();
                let theta = (-angle).rem_euclid(TAU);
                graph.set_basis(old, Some(MeasurementBasis::equatorial(theta))).unwrap();
                order.push(old);
                successor.insert(old, new);
                frontier[wire] = new;
            }
            Gate::Cz { a, b } => {
                // Two CZs on the same pair cancel.
                graph.toggle_edge(frontier[a], frontier[b]);
            }
        }
    }
    for v in graph.nodes().collect::<Vec<_>>() {
        graph.set_role(v, Role::Program).unwrap();
    }
    MeasurementPattern { graph, inputs, outputs: frontier, order, successor }
}

impl MeasurementPattern {
    pub fn node_basis(&self, v: NodeId) -> Option<MeasurementBasis> {
        self.graph.basis(v)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Nominal equatorial angle of a measured node.
    pub fn angle(&self, v: NodeId) -> Option<f64> {
        self.graph.basis(v).map(|b| {
            let [x, y, _] = b.bloch();
            y.atan2(x).rem_euclid(TAU)
        })
    }

    /// Pauli corrections triggered by outcome 1 on `v`: an X on its wire
    /// successor and a Z on the successor's other neighbours.
    pub fn corrections(&self, v: NodeId) -> Option<(NodeId, Vec<NodeId>)> {
        let f = *self.successor.get(&v)?;
        let zs = self.graph.neighbors(f).filter(|u| *u != v).collect();
        Some((f, zs))
    }
}

/// Feed-forward adjustment `(−1)^s α + tπ`, normalized into `[0, 2π)`.
pub fn adjusted_angle(alpha: f64, s: bool, t: bool) -> f64 {
    let a = if s { -alpha } else { alpha };
    (a + if t { PI } else { 0.0 }).rem_euclid(TAU)
}

/// Must-measure-before constraints between pattern nodes (wire order).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyDag {
    nodes: BTreeSet<NodeId>,
    succs: BTreeMap<NodeId, Vec<NodeId>>,
    preds: BTreeMap<NodeId, Vec<NodeId>>,
}

pub fn dependency_dag(p: &MeasurementPattern) -> DependencyDag {
    let nodes: BTreeSet<NodeId> = p.graph.nodes().collect();
    let mut succs: BTreeMap<NodeId, Vec<NodeId>> = nodes.iter().map(|v| (*v, Vec::new())).collect();
    let mut preds = succs.clone();
    for (&u, &v) in &p.successor {
        succs.get_mut(&u).unwrap().push(v);
        preds.get_mut(&v).unwrap().push(u);
    }
    DependencyDag { nodes, succs, preds }
}

impl DependencyDag {
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succs.values().map(Vec::len).sum()
    }

    pub fn predecessors(&self, v: NodeId) -> &[NodeId] {
        self.preds.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn successors(&self, v: NodeId) -> &[NodeId] {
        self.succs.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn sources(&self) -> Vec<NodeId> {
        self.nodes().filter(|v| self.predecessors(*v).is_empty()).collect()
    }

    /// Nodes not yet done whose predecessors are all done.
    pub fn front_layer(&self, done: &BTreeSet<NodeId>) -> Vec<NodeId> {
        self.nodes()
            .filter(|v| !done.contains(v) && self.predecessors(*v).iter().all(|u| done.contains(u)))
            .collect()
    }

    /// Kahn topological order (smallest id first), or `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        let mut indeg: BTreeMap<NodeId, usize> = self.nodes().map(|v| (v, self.predecessors(v).len())).collect();
        let mut ready: BTreeSet<NodeId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(v, _)| *v).collect();
        let mut out = Vec::with_capacity(self.len());
        while let Some(v) = ready.pop_first() {
            out.push(v);
            for &w in self.successors(v) {
                let d = indeg.get_mut(&w).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(w);
                }
            }
        }
        (out.len() == self.len()).then_some(out)
    }
}
