//! Virtual hardware, the layered FlexLattice IR and its validation.

mod program;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphstate::NodeId;

pub use program::{
    emit_instructions, parse_program, replay_program, serialize_program, GNodeRef, Instruction,
    InstructionProgram, ProgramError,
};

pub const IR_SCHEMA: &str = "flexlattice-ir/1";
pub const DEFAULT_LIFETIME_CYCLES: u64 = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualHardwareConfig {
    pub width: u32,
    pub height: u32,
    /// Stored nodes one site may hold at once; `None` is unbounded.
    pub memory_per_site: Option<u32>,
    pub photon_lifetime_cycles: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("virtual hardware must be at least 1x1, got {0}x{1}")]
    EmptyLayer(u32, u32),
    #[error("photon lifetime must be positive")]
    ZeroLifetime,
}

impl VirtualHardwareConfig {
    pub fn new(width: u32, height: u32) -> Self {
        Self { width, height, memory_per_site: None, photon_lifetime_cycles: DEFAULT_LIFETIME_CYCLES }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.width == 0 || self.height == 0 {
            return Err(ConfigError::EmptyLayer(self.width, self.height));
        }
        if self.photon_lifetime_cycles == 0 {
            return Err(ConfigError::ZeroLifetime);
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

/// A virtual-hardware position `(x, y, layer)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
    pub layer: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32, layer: u32) -> Self {
        Self { x, y, layer }
    }

    pub fn site(&self) -> (u32, u32) {
        (self.x, self.y)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.layer)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "g_node")]
pub enum VNodeKind {
    Mapped(NodeId),
    Ancilla,
    #[default]
    Unused,
}

/// In-layer edge between two sites; stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpatialEdge {
    pub layer: u32,
    pub a: (u32, u32),
    pub b: (u32, u32),
}

impl SpatialEdge {
    pub fn new(layer: u32, a: (u32, u32), b: (u32, u32)) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self { layer, a, b }
    }

    pub fn endpoints(&self) -> (Coord, Coord) {
        (Coord::new(self.a.0, self.a.1, self.layer), Coord::new(self.b.0, self.b.1, self.layer))
    }
}

/// Edge between the same site on layers `from < to`; `to - from ≥ 2` is a
/// cross-layer edge backed by virtual memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemporalEdge {
    pub x: u32,
    pub y: u32,
    pub from: u32,
    pub to: u32,
}

impl TemporalEdge {
    pub fn span(&self) -> u32 {
        self.to.saturating_sub(self.from)
    }

    pub fn is_cross_layer(&self) -> bool {
        self.span() >= 2
    }

    pub fn source(&self) -> Coord {
        Coord::new(self.x, self.y, self.from)
    }

    pub fn target(&self) -> Coord {
        Coord::new(self.x, self.y, self.to)
    }
}

/// A node stored at `store_layer` and retrieved at `retrieve_layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemoryEvent {
    pub x: u32,
    pub y: u32,
    pub store_layer: u32,
    pub retrieve_layer: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlexLatticeIR {
    pub config: VirtualHardwareConfig,
    /// One row-major grid (`index = y * width + x`) per layer.
    pub layers: Vec<Vec<VNodeKind>>,
    pub spatial_edges: BTreeSet<SpatialEdge>,
    pub temporal_edges: BTreeSet<TemporalEdge>,
    pub memory_events: BTreeSet<MemoryEvent>,
}

#[derive(Serialize, Deserialize)]
struct IrDocument {
    schema: String,
    #[serde(flatten)]
    ir: FlexLatticeIR,
}

#[derive(Debug, Error)]
pub enum IrIoError {
    #[error("unsupported IR schema `{0}` (expected {IR_SCHEMA})")]
    Schema(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl FlexLatticeIR {
    pub fn new(config: VirtualHardwareConfig) -> Self {
        Self {
            config,
            layers: Vec::new(),
            spatial_edges: BTreeSet::new(),
            temporal_edges: BTreeSet::new(),
            memory_events: BTreeSet::new(),
        }
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn push_layer(&mut self) -> u32 {
        self.layers.push(vec![VNodeKind::Unused; self.config.sites()]);
        (self.layers.len() - 1) as u32
    }

    fn in_bounds(&self, x: u32, y: u32) -> bool {
        x < self.config.width && y < self.config.height
    }

    pub fn kind(&self, c: Coord) -> VNodeKind {
        if !self.in_bounds(c.x, c.y) {
            return VNodeKind::Unused;
        }
        self.layers
            .get(c.layer as usize)
            .and_then(|l| l.get((c.y * self.config.width + c.x) as usize))
            .copied()
            .unwrap_or_default()
    }

    /// Sets a node kind, growing the layer list as needed.
    pub fn set_kind(&mut self, c: Coord, k: VNodeKind) {
        assert!(self.in_bounds(c.x, c.y), "coordinate {c} outside the layer");
        while self.layers.len() <= c.layer as usize {
            self.push_layer();
        }
        let w = self.config.width;
        self.layers[c.layer as usize][(c.y * w + c.x) as usize] = k;
    }

    /// All non-unused nodes, layer by layer, row-major.
    pub fn nodes(&self) -> impl Iterator<Item = (Coord, VNodeKind)> + '_ {
        let w = self.config.width;
        self.layers.iter().enumerate().flat_map(move |(l, grid)| {
            grid.iter().enumerate().filter(|(_, k)| **k != VNodeKind::Unused).map(move |(i, k)| {
                (Coord::new(i as u32 % w, i as u32 / w, l as u32), *k)
            })
        })
    }

    /// Adds a temporal edge, with its memory event when it spans ≥2 layers.
    pub fn add_temporal(&mut self, x: u32, y: u32, from: u32, to: u32) {
        let e = TemporalEdge { x, y, from, to };
        if e.is_cross_layer() {
            self.memory_events.insert(MemoryEvent { x, y, store_layer: from, retrieve_layer: to - 1 });
        }
        self.temporal_edges.insert(e);
    }

    /// Drops trailing layers that hold no nodes.
    pub fn trim(&mut self) {
        while self.layers.last().is_some_and(|l| l.iter().all(|k| *k == VNodeKind::Unused)) {
            self.layers.pop();
        }
    }

    pub fn to_json(&self) -> String {
        let doc = IrDocument { schema: IR_SCHEMA.to_string(), ir: self.clone() };
        serde_json::to_string_pretty(&doc).expect("IR serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, IrIoError> {
        let doc: IrDocument = serde_json::from_str(text)?;
        if doc.schema != IR_SCHEMA {
            return Err(IrIoError::Schema(doc.schema));
        }
        Ok(doc.ir)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    OutOfBounds,
    SpatialNotAdjacent,
    EdgeEndpointUnused,
    TemporalOrder,
    TemporalInDegree,
    TemporalOutDegree,
    UnbackedCrossLayer,
    OrphanMemoryEvent,
    DuplicateGnode,
    MemoryCapacity,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::OutOfBounds => "out-of-bounds",
            ViolationKind::SpatialNotAdjacent => "spatial-not-adjacent",
            ViolationKind::EdgeEndpointUnused => "edge-endpoint-unused",
            ViolationKind::TemporalOrder => "temporal-order",
            ViolationKind::TemporalInDegree => "temporal-in-degree",
            ViolationKind::TemporalOutDegree => "temporal-out-degree",
            ViolationKind::UnbackedCrossLayer => "unbacked-cross-layer",
            ViolationKind::OrphanMemoryEvent => "orphan-memory-event",
            ViolationKind::DuplicateGnode => "duplicate-gnode",
            ViolationKind::MemoryCapacity => "memory-capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.detail)
    }
}

pub fn validate_ir(ir: &FlexLatticeIR) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut v = |kind, detail: String| out.push(Violation { kind, detail });
    let sites = ir.config.sites();
    for (l, grid) in ir.layers.iter().enumerate() {
        if grid.len() != sites {
            v(ViolationKind::OutOfBounds, format!("layer {l} has {} sites, expected {sites}", grid.len()));
        }
    }
    let exists = |c: Coord| ir.kind(c) != VNodeKind::Unused;
    let in_range = |x: u32, y: u32, layer: u32| ir.in_bounds(x, y) && (layer as usize) < ir.layers.len();

    for e in &ir.spatial_edges {
        let (a, b) = e.endpoints();
        if !in_range(a.x, a.y, a.layer) || !in_range(b.x, b.y, b.layer) {
            v(ViolationKind::OutOfBounds, format!("spatial edge {a}-{b}"));
            continue;
        }
        if a.x.abs_diff(b.x) + a.y.abs_diff(b.y) != 1 {
            v(ViolationKind::SpatialNotAdjacent, format!("spatial edge {a}-{b}"));
        }
        if !exists(a) || !exists(b) {
            v(ViolationKind::EdgeEndpointUnused, format!("spatial edge {a}-{b}"));
        }
    }

    let mut indeg: BTreeMap<Coord, usize> = BTreeMap::new();
    let mut outdeg: BTreeMap<Coord, usize> = BTreeMap::new();
    for e in &ir.temporal_edges {
        let (s, t) = (e.source(), e.target());
        if e.from >= e.to {
            v(ViolationKind::TemporalOrder, format!("temporal edge {s}->{t}"));
            continue;
        }
        if !in_range(e.x, e.y, e.to) {
            v(ViolationKind::OutOfBounds, format!("temporal edge {s}->{t}"));
            continue;
        }
        if !exists(s) || !exists(t) {
            v(ViolationKind::EdgeEndpointUnused, format!("temporal edge {s}->{t}"));
        }
        *indeg.entry(t).or_default() += 1;
        *outdeg.entry(s).or_default() += 1;
        if e.is_cross_layer() {
            let backing = MemoryEvent { x: e.x, y: e.y, store_layer: e.from, retrieve_layer: e.to - 1 };
            if !ir.memory_events.contains(&backing) {
                v(ViolationKind::UnbackedCrossLayer, format!("temporal edge {s}->{t}"));
            }
        }
    }
    for (c, d) in indeg {
        if d > 1 {
            v(ViolationKind::TemporalInDegree, format!("{c} has {d} edges from preceding layers"));
        }
    }
    for (c, d) in outdeg {
        if d > 1 {
            v(ViolationKind::TemporalOutDegree, format!("{c} has {d} edges to subsequent layers"));
        }
    }

    let mut per_site: BTreeMap<(u32, u32), Vec<(u32, u32)>> = BTreeMap::new();
    for m in &ir.memory_events {
        let edge = TemporalEdge { x: m.x, y: m.y, from: m.store_layer, to: m.retrieve_layer + 1 };
        if !ir.temporal_edges.contains(&edge) || !edge.is_cross_layer() {
            v(
                ViolationKind::OrphanMemoryEvent,
                format!("store at {} has no matching cross-layer edge", Coord::new(m.x, m.y, m.store_layer)),
            );
        }
        per_site.entry((m.x, m.y)).or_default().push((m.store_layer, m.retrieve_layer));
    }
    if let Some(cap) = ir.config.memory_per_site {
        for ((x, y), spans) in per_site {
            // Peak number of simultaneously stored nodes, via a sweep.
            let mut points: Vec<(u32, i32)> = Vec::new();
            for (s, r) in spans {
                points.push((s, 1));
                points.push((r + 1, -1));
            }
            points.sort_by_key(|p| (p.0, p.1));
            let mut cur = 0i32;
            let mut peak = 0i32;
            for (_, d) in points {
                cur += d;
                peak = peak.max(cur);
            }
            if peak as u32 > cap {
                v(ViolationKind::MemoryCapacity, format!("site ({x}, {y}) holds {peak} > {cap} stored nodes"));
            }
        }
    }

    let mut seen: BTreeMap<NodeId, Coord> = BTreeMap::new();
    for (c, k) in ir.nodes() {
        if let VNodeKind::Mapped(g) = k {
            if let Some(prev) = seen.insert(g, c) {
                v(ViolationKind::DuplicateGnode, format!("g{g} mapped at {prev} and {c}"));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrMetrics {
    pub logical_layers: usize,
    pub mapped_nodes: usize,
    pub ancilla_nodes: usize,
    pub spatial_edges: usize,
    pub temporal_edges: usize,
    /// Layer span of every cross-layer (stored) edge, in edge order.
    pub stored_node_layer_spans: Vec<u32>,
}

pub fn ir_metrics(ir: &FlexLatticeIR) -> IrMetrics {
    let mut m = IrMetrics {
        logical_layers: ir.layers.len(),
        spatial_edges: ir.spatial_edges.len(),
        temporal_edges: ir.temporal_edges.len(),
        ..IrMetrics::default()
    };
    for (_, k) in ir.nodes() {
        match k {
            VNodeKind::Mapped(_) => m.mapped_nodes += 1,
            VNodeKind::Ancilla => m.ancilla_nodes += 1,
            VNodeKind::Unused => {}
        }
    }
    m.stored_node_layer_spans =
        ir.temporal_edges.iter().filter(|e| e.is_cross_layer()).map(TemporalEdge::span).collect();
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The listing example: ancilla at (1,1,0) linked across two layers to
    /// a mapped node at (1,1,2), with an unrelated node N at (1,1,1).
    pub(crate) fn listing_ir() -> FlexLatticeIR {
        let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(2, 2));
        ir.set_kind(Coord::new(1, 1, 0), VNodeKind::Ancilla);
        ir.set_kind(Coord::new(1, 1, 2), VNodeKind::Mapped(NodeId(0)));
        ir.add_temporal(1, 1, 0, 2);
        ir
    }

    #[test]
    fn empty_ir_is_valid() {
        let ir = FlexLatticeIR::new(VirtualHardwareConfig::new(3, 3));
        assert!(validate_ir(&ir).is_empty());
        assert_eq!(ir_metrics(&ir), IrMetrics::default());
    }

    #[test]
    fn listing_metrics() {
        let ir = listing_ir();
        assert!(validate_ir(&ir).is_empty(), "{:?}", validate_ir(&ir));
        let m = ir_metrics(&ir);
        assert_eq!(m.logical_layers, 3);
        assert_eq!(m.temporal_edges, 1);
        assert_eq!(m.stored_node_layer_spans, vec![2]);
    }

    fn kinds(ir: &FlexLatticeIR) -> Vec<ViolationKind> {
        validate_ir(ir).into_iter().map(|v| v.kind).collect()
    }

    #[test]
    fn temporal_in_degree_violation() {
        let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(1, 1));
        for l in 0..3 {
            ir.set_kind(Coord::new(0, 0, l), VNodeKind::Ancilla);
        }
        ir.add_temporal(0, 0, 1, 2);
        ir.add_temporal(0, 0, 0, 2);
        assert!(kinds(&ir).contains(&ViolationKind::TemporalInDegree));
    }

    #[test]
    fn unbacked_cross_layer_violation() {
        let mut ir = listing_ir();
        ir.memory_events.clear();
        assert_eq!(kinds(&ir), vec![ViolationKind::UnbackedCrossLayer]);
    }

    #[test]
    fn other_violations() {
        let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(3, 1));
        ir.set_kind(Coord::new(0, 0, 0), VNodeKind::Mapped(NodeId(1)));
        ir.set_kind(Coord::new(2, 0, 0), VNodeKind::Mapped(NodeId(1)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (0, 0), (2, 0)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (0, 0), (1, 0)));
        ir.temporal_edges.insert(TemporalEdge { x: 0, y: 0, from: 0, to: 0 });
        let k = kinds(&ir);
        for want in [
            ViolationKind::SpatialNotAdjacent,
            ViolationKind::EdgeEndpointUnused,
            ViolationKind::TemporalOrder,
            ViolationKind::DuplicateGnode,
        ] {
            assert!(k.contains(&want), "{want:?} missing from {k:?}");
        }
    }

    #[test]
    fn memory_capacity() {
        let mut cfg = VirtualHardwareConfig::new(1, 1);
        cfg.memory_per_site = Some(1);
        let mut ir = FlexLatticeIR::new(cfg);
        for l in 0..6 {
            ir.set_kind(Coord::new(0, 0, l), VNodeKind::Ancilla);
        }
        ir.add_temporal(0, 0, 0, 3);
        ir.add_temporal(0, 0, 1, 4);
        assert!(kinds(&ir).contains(&ViolationKind::MemoryCapacity));
        ir.config.memory_per_site = Some(2);
        assert!(kinds(&ir).is_empty());
    }

    #[test]
    fn json_round_trip() {
        let ir = listing_ir();
        let text = ir.to_json();
        assert!(text.contains(IR_SCHEMA));
        assert_eq!(FlexLatticeIR::from_json(&text).unwrap(), ir);
        let bad = text.replace(IR_SCHEMA, "flexlattice-ir/0");
        assert!(matches!(FlexLatticeIR::from_json(&bad), Err(IrIoError::Schema(_))));
    }
}
