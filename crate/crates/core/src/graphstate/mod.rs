//! Graph states and the exact rewrite rules used by the compiler and the
//! runtime: local complementation, Z-removal, and the outcomes of type-II
//! fusions.
//!
//! A [`GraphState`] describes the physical state `W |G⟩`, where `|G⟩` is the
//! graph state of its adjacency and `W` is the tensor product of the
//! per-node [`ByproductWord`]s. Rewrites that change the graph record the
//! local Cliffords needed to keep that description exact (modulo Pauli
//! frame corrections, which are fixed by measurement outcomes at runtime).

mod basis;
mod io;
mod propagate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use basis::{BasisError, ByproductWord, LocalClifford, MeasurementBasis, Pauli};
pub use io::{parse_graph, write_graph, GraphParseError};
pub use propagate::{
    propagate_through_fusion, propagate_through_measurement, FusionBasis, PauliPair,
    PropagationError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Root,
    Leaf,
    Program,
    Ancilla,
    #[default]
    Unassigned,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Root => "root",
            Role::Leaf => "leaf",
            Role::Program => "program",
            Role::Ancilla => "ancilla",
            Role::Unassigned => "unassigned",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "root" => Role::Root,
            "leaf" => Role::Leaf,
            "program" => Role::Program,
            "ancilla" => Role::Ancilla,
            "unassigned" => Role::Unassigned,
            _ => return None,
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("fusion needs two distinct qubits, got {0} twice")]
    SameNode(NodeId),
    #[error("fused qubits {0} and {1} are adjacent")]
    AdjacentFusion(NodeId, NodeId),
    #[error("a star needs at least 2 qubits, got {0}")]
    StarTooSmall(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
}

/// Equality compares nodes, edges and annotations; the id counter is ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GraphState {
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    basis: BTreeMap<NodeId, MeasurementBasis>,
    byproducts: BTreeMap<NodeId, ByproductWord>,
    roles: BTreeMap<NodeId, Role>,
    next_id: u32,
}

impl PartialEq for GraphState {
    fn eq(&self, other: &Self) -> bool {
        self.adjacency == other.adjacency
            && self.basis == other.basis
            && self.byproducts == other.byproducts
            && self.roles == other.roles
    }
}

impl GraphState {
    pub fn new() -> Self {
        Self::default()
    }

    /// `n` isolated nodes with ids `0..n`.
    pub fn with_nodes(n: usize) -> Self {
        let mut g = Self::new();
        for _ in 0..n {
            g.add_node();
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        let mut g = Self::with_nodes(n);
        for &(a, b) in edges {
            g.add_edge(NodeId(a), NodeId(b))?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.adjacency.insert(id, BTreeSet::new());
        id
    }

    /// Inserts a node with a caller-chosen id (used by deserialization).
    pub(crate) fn insert_node(&mut self, id: NodeId) {
        self.adjacency.entry(id).or_default();
        self.next_id = self.next_id.max(id.0 + 1);
    }

    fn check(&self, v: NodeId) -> Result<(), GraphError> {
        if self.adjacency.contains_key(&v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(GraphError::SelfLoop(a));
        }
        self.adjacency.get_mut(&a).unwrap().insert(b);
        self.adjacency.get_mut(&b).unwrap().insert(a);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: NodeId, b: NodeId) {
        if let Some(s) = self.adjacency.get_mut(&a) {
            s.remove(&b);
        }
        if let Some(s) = self.adjacency.get_mut(&b) {
            s.remove(&a);
        }
    }

    pub fn toggle_edge(&mut self, a: NodeId, b: NodeId) {
        if self.has_edge(a, b) {
            self.remove_edge(a, b);
        } else {
            self.add_edge(a, b).expect("toggle on known distinct nodes");
        }
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency.get(&a).is_some_and(|s| s.contains(&b))
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(a, ns)| ns.iter().filter(move |b| a < *b).map(move |b| (*a, *b)))
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn basis(&self, v: NodeId) -> Option<MeasurementBasis> {
        self.basis.get(&v).copied()
    }

    pub fn set_basis(&mut self, v: NodeId, b: Option<MeasurementBasis>) -> Result<(), GraphError> {
        self.check(v)?;
        match b {
            Some(b) => self.basis.insert(v, b),
            None => self.basis.remove(&v),
        };
        Ok(())
    }

    pub fn byproduct(&self, v: NodeId) -> ByproductWord {
        self.byproducts.get(&v).cloned().unwrap_or_default()
    }

    pub fn byproducts(&self) -> impl Iterator<Item = (NodeId, &ByproductWord)> + '_ {
        self.byproducts.iter().map(|(k, w)| (*k, w))
    }

    pub fn set_byproduct(&mut self, v: NodeId, w: ByproductWord) -> Result<(), GraphError> {
        self.check(v)?;
        if w.is_identity() {
            self.byproducts.remove(&v);
        } else {
            self.byproducts.insert(v, w);
        }
        Ok(())
    }

    pub fn role(&self, v: NodeId) -> Role {
        self.roles.get(&v).copied().unwrap_or_default()
    }

    pub fn set_role(&mut self, v: NodeId, r: Role) -> Result<(), GraphError> {
        self.check(v)?;
        if r == Role::Unassigned {
            self.roles.remove(&v);
        } else {
            self.roles.insert(v, r);
        }
        Ok(())
    }

    /// Graph-only view: same nodes and edges, no annotations.
    pub fn same_graph(&self, other: &GraphState) -> bool {
        self.adjacency == other.adjacency
    }

    /// Connected components, each sorted, in order of smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for v in self.nodes() {
            if !seen.insert(v) {
                continue;
            }
            let mut comp = vec![v];
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for w in self.neighbors(u) {
                    if seen.insert(w) {
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    fn delete_node(&mut self, v: NodeId) {
        if let Some(ns) = self.adjacency.remove(&v) {
            for u in ns {
                self.adjacency.get_mut(&u).unwrap().remove(&v);
            }
        }
        self.basis.remove(&v);
        self.byproducts.remove(&v);
        self.roles.remove(&v);
    }

    fn lc_in_place(&mut self, v: NodeId) {
        let ns: Vec<NodeId> = self.neighbors(v).collect();
        for (i, &a) in ns.iter().enumerate() {
            for &b in &ns[i + 1..] {
                self.toggle_edge(a, b);
            }
        }
    }

    /// Toggles every edge among the neighbours of `v`.
    pub fn local_complement(&self, v: NodeId) -> Result<GraphState, GraphError> {
        self.check(v)?;
        let mut g = self.clone();
        g.lc_in_place(v);
        Ok(g)
    }

    /// Local complementation that keeps the physical state unchanged by
    /// recording `U_v(G)†` as byproducts (`|τ_v G⟩ = U_v(G) |G⟩`).
    pub fn local_complement_tracked(&self, v: NodeId) -> Result<GraphState, GraphError> {
        let mut g = self.local_complement(v)?;
        let ns: Vec<NodeId> = self.neighbors(v).collect();
        let mut wv = g.byproduct(v);
        wv.push_before(LocalClifford::XPlus);
        g.set_byproduct(v, wv)?;
        for u in ns {
            let mut wu = g.byproduct(u);
            wu.push_before(LocalClifford::ZMinus);
            g.set_byproduct(u, wu)?;
        }
        Ok(g)
    }

    /// Z-measurement: removes `v` and its edges.
    pub fn measure_z(&self, v: NodeId) -> Result<GraphState, GraphError> {
        self.check(v)?;
        let mut g = self.clone();
        g.delete_node(v);
        Ok(g)
    }

    fn check_fusion(&self, q1: NodeId, q2: NodeId) -> Result<(), GraphError> {
        self.check(q1)?;
        self.check(q2)?;
        if q1 == q2 {
            return Err(GraphError::SameNode(q1));
        }
        if self.has_edge(q1, q2) {
            return Err(GraphError::AdjacentFusion(q1, q2));
        }
        Ok(())
    }

    /// Successful `(X1 Z2, Z1 X2)` fusion: toggles every edge between
    /// `N(q1)` and `N(q2)` and consumes both qubits.
    pub fn fuse_success(&self, q1: NodeId, q2: NodeId) -> Result<GraphState, GraphError> {
        self.check_fusion(q1, q2)?;
        let n1: Vec<NodeId> = self.neighbors(q1).collect();
        let n2: Vec<NodeId> = self.neighbors(q2).collect();
        let mut g = self.clone();
        g.delete_node(q1);
        g.delete_node(q2);
        for &u in &n1 {
            for &w in &n2 {
                if u != w {
                    g.toggle_edge(u, w);
                }
            }
        }
        Ok(g)
    }

    /// Failed fusion. A photon of degree ≥ 2 is removed after local
    /// complementation (a Y-type removal), leaving `exp(iπ/4 Z)` on each
    /// former neighbour; a photon of degree ≤ 1 is simply removed.
    pub fn fuse_fail(&self, q1: NodeId, q2: NodeId) -> Result<GraphState, GraphError> {
        self.check_fusion(q1, q2)?;
        let mut g = self.clone();
        for q in [q1, q2] {
            g.remove_photon(q);
        }
        Ok(g)
    }

    fn remove_photon(&mut self, q: NodeId) {
        if self.degree(q) >= 2 {
            let ns: Vec<NodeId> = self.neighbors(q).collect();
            self.lc_in_place(q);
            self.delete_node(q);
            for u in ns {
                let mut w = self.byproduct(u);
                w.push_before(LocalClifford::ZPlus);
                self.set_byproduct(u, w).unwrap();
            }
        } else {
            self.delete_node(q);
        }
    }

    /// Star graph of `k` qubits: root (lowest id) plus `k - 1` leaves.
    pub fn make_star(k: usize) -> Result<GraphState, GraphError> {
        if k < 2 {
            return Err(GraphError::StarTooSmall(k));
        }
        let mut g = GraphState::with_nodes(k);
        let root = NodeId(0);
        g.set_role(root, Role::Root)?;
        for i in 1..k as u32 {
            g.add_edge(root, NodeId(i))?;
            g.set_role(NodeId(i), Role::Leaf)?;
        }
        Ok(g)
    }

    /// Disjoint union; `other`'s ids are shifted past this graph's ids.
    /// Returns the id offset applied to `other`.
    pub fn absorb(&mut self, other: &GraphState) -> u32 {
        let offset = self.next_id;
        for v in other.nodes() {
            self.insert_node(NodeId(v.0 + offset));
        }
        for (a, b) in other.edges() {
            self.add_edge(NodeId(a.0 + offset), NodeId(b.0 + offset)).unwrap();
        }
        for v in other.nodes() {
            let nv = NodeId(v.0 + offset);
            if let Some(b) = other.basis(v) {
                self.basis.insert(nv, b);
            }
            let w = other.byproduct(v);
            if !w.is_identity() {
                self.byproducts.insert(nv, w);
            }
            let r = other.role(v);
            if r != Role::Unassigned {
                self.roles.insert(nv, r);
            }
        }
        self.next_id = offset + other.next_id;
        offset
    }

    /// Checks the structural invariants; used by tests and deserialization.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (a, ns) in &self.adjacency {
            if ns.contains(a) {
                return Err(format!("self-loop at {a}"));
            }
            for b in ns {
                match self.adjacency.get(b) {
                    Some(back) if back.contains(a) => {}
                    _ => return Err(format!("asymmetric edge {a}-{b}")),
                }
            }
            if a.0 >= self.next_id {
                return Err(format!("node {a} beyond id counter"));
            }
        }
        for k in self.basis.keys().chain(self.byproducts.keys()).chain(self.roles.keys()) {
            if !self.adjacency.contains_key(k) {
                return Err(format!("annotation on missing node {k}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> GraphState {
        GraphState::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn two_stars(size: usize) -> (GraphState, NodeId, u32) {
        let a = GraphState::make_star(size).unwrap();
        let mut g = a.clone();
        let off = g.absorb(&a);
        (g, NodeId(0), off)
    }

    #[test]
    fn lc_triangle_and_path() {
        let t = triangle();
        let p = t.local_complement(NodeId(0)).unwrap();
        assert!(!p.has_edge(NodeId(1), NodeId(2)));
        assert_eq!(p.edge_count(), 2);
        let back = p.local_complement(NodeId(0)).unwrap();
        assert!(back.same_graph(&t));
        assert_eq!(
            t.local_complement(NodeId(9)).unwrap_err(),
            GraphError::UnknownNode(NodeId(9))
        );
    }

    #[test]
    fn measure_z_cases() {
        let s = GraphState::make_star(4).unwrap();
        let leaf = s.measure_z(NodeId(3)).unwrap();
        assert_eq!(leaf.degree(NodeId(0)), 2);
        let root = s.measure_z(NodeId(0)).unwrap();
        assert_eq!(root.node_count(), 3);
        assert_eq!(root.edge_count(), 0);
        let single = GraphState::with_nodes(1).measure_z(NodeId(0)).unwrap();
        assert_eq!(single.node_count(), 0);
    }

    #[test]
    fn star_shapes() {
        let s = GraphState::make_star(7).unwrap();
        assert_eq!(s.degree(NodeId(0)), 6);
        assert_eq!(s.role(NodeId(0)), Role::Root);
        assert_eq!(s.role(NodeId(3)), Role::Leaf);
        let e = GraphState::make_star(2).unwrap();
        assert_eq!(e.edge_count(), 1);
        assert_eq!(GraphState::make_star(1).unwrap_err(), GraphError::StarTooSmall(1));
    }

    #[test]
    fn leaf_leaf_fusion_joins_roots() {
        let (g, ra, off) = two_stars(5);
        let rb = NodeId(off);
        let out = g.fuse_success(NodeId(1), NodeId(off + 1)).unwrap();
        assert!(out.has_edge(ra, rb));
        assert_eq!(out.degree(ra), 4);
        assert_eq!(out.degree(rb), 4);
        assert_eq!(out.node_count(), g.node_count() - 2);
    }

    #[test]
    fn root_leaf_fusion_builds_degree_seven() {
        let (g, ra, off) = two_stars(5);
        let out = g.fuse_success(NodeId(off), NodeId(1)).unwrap();
        assert_eq!(out.degree(ra), 7);
        assert_eq!(out.edge_count(), 7);
    }

    #[test]
    fn wire_splice() {
        let g = GraphState::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let out = g.fuse_success(NodeId(1), NodeId(2)).unwrap();
        assert_eq!(out.edges().collect::<Vec<_>>(), vec![(NodeId(0), NodeId(3))]);
    }

    #[test]
    fn failed_root_leaf_fusion_leaves_star_and_clique() {
        let (g, ra, off) = two_stars(5);
        let out = g.fuse_fail(NodeId(off), NodeId(1)).unwrap();
        assert_eq!(out.degree(ra), 3);
        let b: Vec<NodeId> = (1..5).map(|i| NodeId(off + i)).collect();
        for (i, &u) in b.iter().enumerate() {
            for &w in &b[i + 1..] {
                assert!(out.has_edge(u, w));
            }
            assert_eq!(out.byproduct(u).gens(), &[LocalClifford::ZPlus]);
        }
        // Repair: LC on the clique turns it back into a star.
        let repaired = out.local_complement(b[0]).unwrap();
        assert_eq!(repaired.degree(b[0]), 3);
        for &u in &b[1..] {
            assert_eq!(repaired.degree(u), 1);
        }
    }

    #[test]
    fn failed_leaf_leaf_fusion_disconnects() {
        let (g, ra, off) = two_stars(5);
        let out = g.fuse_fail(NodeId(1), NodeId(off + 1)).unwrap();
        assert_eq!(out.degree(ra), 3);
        assert_eq!(out.degree(NodeId(off)), 3);
        assert!(!out.has_edge(ra, NodeId(off)));
        assert!(out.byproducts().next().is_none());
    }

    #[test]
    fn fusion_preconditions() {
        let g = GraphState::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(g.fuse_success(NodeId(0), NodeId(0)).unwrap_err(), GraphError::SameNode(NodeId(0)));
        assert_eq!(
            g.fuse_fail(NodeId(0), NodeId(1)).unwrap_err(),
            GraphError::AdjacentFusion(NodeId(0), NodeId(1))
        );
        assert!(g.fuse_success(NodeId(0), NodeId(7)).is_err());
    }

    #[test]
    fn ids_never_reused() {
        let g = GraphState::with_nodes(3).measure_z(NodeId(2)).unwrap();
        let mut h = g.clone();
        assert_eq!(h.add_node(), NodeId(3));
    }

    fn arb_graph() -> impl Strategy<Value = GraphState> {
        (1usize..8).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            prop::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
                let mut g = GraphState::with_nodes(n);
                let mut k = 0;
                for a in 0..n as u32 {
                    for b in a + 1..n as u32 {
                        if bits[k] {
                            g.add_edge(NodeId(a), NodeId(b)).unwrap();
                        }
                        k += 1;
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn lc_is_involution(g in arb_graph(), v in 0u32..8) {
            let v = NodeId(v % g.node_count() as u32);
            let twice = g.local_complement(v).unwrap().local_complement(v).unwrap();
            prop_assert!(twice.same_graph(&g));
            prop_assert!(twice.check_invariants().is_ok());
        }

        #[test]
        fn fusions_consume_two(g in arb_graph(), a in 0u32..8, b in 0u32..8) {
            let n = g.node_count() as u32;
            let (a, b) = (NodeId(a % n), NodeId(b % n));
            if a != b && !g.has_edge(a, b) {
                let s = g.fuse_success(a, b).unwrap();
                let f = g.fuse_fail(a, b).unwrap();
                prop_assert_eq!(s.node_count(), g.node_count() - 2);
                prop_assert_eq!(f.node_count(), g.node_count() - 2);
                prop_assert!(s.check_invariants().is_ok());
                prop_assert!(f.check_invariants().is_ok());
            }
        }
    }
}
