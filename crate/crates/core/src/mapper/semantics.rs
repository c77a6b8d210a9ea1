//! Contraction of ancilla wires back to the program graph.

use std::collections::{BTreeMap, BTreeSet};

use crate::graphstate::{GraphState, NodeId};
use crate::ir::{Coord, FlexLatticeIR, VNodeKind};

/// Checks that every program node is mapped exactly once, every ancilla is
/// a wire (degree 2), and contracting the wires yields exactly `program`.
pub fn check_semantics(ir: &FlexLatticeIR, program: &GraphState) -> Result<(), String> {
    let mut adj: BTreeMap<Coord, Vec<Coord>> = BTreeMap::new();
    let mut link = |a: Coord, b: Coord| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for e in &ir.spatial_edges {
        let (a, b) = e.endpoints();
        link(a, b);
    }
    for e in &ir.temporal_edges {
        link(e.source(), e.target());
    }

    let mut at: BTreeMap<NodeId, Coord> = BTreeMap::new();
    for (c, k) in ir.nodes() {
        match k {
            VNodeKind::Mapped(g) => {
                if at.insert(g, c).is_some() {
                    return Err(format!("g{g} mapped twice"));
                }
            }
            VNodeKind::Ancilla => {
                let d = adj.get(&c).map_or(0, Vec::len);
                if d != 2 {
                    return Err(format!("ancilla at {c} has degree {d}"));
                }
            }
            VNodeKind::Unused => {
                if adj.contains_key(&c) {
                    return Err(format!("unused site {c} carries an edge"));
                }
            }
        }
    }
    for v in program.nodes() {
        if !at.contains_key(&v) {
            return Err(format!("g{v} is not mapped"));
        }
    }
    if at.len() != program.node_count() {
        return Err("IR maps nodes absent from the program".into());
    }

    let mut found: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut visited_ancillas: BTreeSet<Coord> = BTreeSet::new();
    for (&g, &c) in &at {
        for &first in adj.get(&c).into_iter().flatten() {
            let (mut prev, mut cur) = (c, first);
            while ir.kind(cur) == VNodeKind::Ancilla {
                visited_ancillas.insert(cur);
                let next = adj[&cur].iter().copied().find(|n| *n != prev).unwrap_or(prev);
                prev = cur;
                cur = next;
            }
            let VNodeKind::Mapped(h) = ir.kind(cur) else {
                return Err(format!("wire from g{g} ends at unused site {cur}"));
            };
            if h == g {
                return Err(format!("wire from g{g} loops back"));
            }
            let e = (g.min(h), g.max(h));
            // Each edge is walked once from either end.
            if g < h && !found.insert(e) {
                return Err(format!("edge g{}-g{} realised twice", e.0, e.1));
            }
        }
    }
    let ancillas = ir.nodes().filter(|(_, k)| *k == VNodeKind::Ancilla).count();
    if visited_ancillas.len() != ancillas {
        return Err("ancilla cycle detached from program nodes".into());
    }
    let want: BTreeSet<(NodeId, NodeId)> = program.edges().collect();
    if found != want {
        let extra: Vec<_> = found.difference(&want).collect();
        let missing: Vec<_> = want.difference(&found).collect();
        return Err(format!("contracted graph differs: extra {extra:?}, missing {missing:?}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{SpatialEdge, VirtualHardwareConfig};

    #[test]
    fn wire_contracts_to_edge() {
        let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(3, 1));
        ir.push_layer();
        ir.set_kind(Coord::new(0, 0, 0), VNodeKind::Mapped(NodeId(0)));
        ir.set_kind(Coord::new(1, 0, 0), VNodeKind::Ancilla);
        ir.set_kind(Coord::new(2, 0, 0), VNodeKind::Mapped(NodeId(1)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (0, 0), (1, 0)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (1, 0), (2, 0)));
        let g = GraphState::from_edges(2, &[(0, 1)]).unwrap();
        check_semantics(&ir, &g).unwrap();
        let empty = GraphState::with_nodes(2);
        assert!(check_semantics(&ir, &empty).is_err());
        // A dangling ancilla is rejected.
        ir.spatial_edges.remove(&SpatialEdge::new(0, (1, 0), (2, 0)));
        assert!(check_semantics(&ir, &g).unwrap_err().contains("degree 1"));
    }
}
