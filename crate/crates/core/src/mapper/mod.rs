//! Offline place-and-route of a measurement pattern onto the layered
//! virtual hardware.
//!
//! Layers are filled greedily from the front of the dependency DAG. Every
//! program edge whose second endpoint is not placed yet owns a *head*: an IR
//! node with a free outgoing temporal slot from which the edge's wire will
//! continue (the source node itself for one edge, adjacent ancilla branches
//! for the others). Placing the second endpoint lands each head on the
//! current layer — directly, or through virtual memory when it spans two or
//! more layers — and routes it spatially by BFS.

mod semantics;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{dependency_dag, DependencyDag, MeasurementPattern};
use crate::graphstate::NodeId;
use crate::ir::{
    validate_ir, Coord, FlexLatticeIR, SpatialEdge, VNodeKind, VirtualHardwareConfig, Violation,
};

pub use crate::ir::{ir_metrics, IrMetrics};
pub use semantics::check_semantics;

pub const DEFAULT_OCCUPANCY_CAP: f64 = 0.25;
pub const DEFAULT_REFRESH_INTERVAL: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapperConfig {
    pub vh: VirtualHardwareConfig,
    /// Fraction of layer sites that incomplete program nodes may occupy.
    pub occupancy_cap: f64,
    pub refresh_interval_layers: Option<u32>,
    /// Longest in-layer ancilla wire per edge; `None` means width + height.
    pub routing_budget: Option<u32>,
}

impl MapperConfig {
    pub fn new(vh: VirtualHardwareConfig) -> Self {
        Self {
            vh,
            occupancy_cap: DEFAULT_OCCUPANCY_CAP,
            refresh_interval_layers: Some(DEFAULT_REFRESH_INTERVAL),
            routing_budget: None,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        self.vh.validate().map_err(|e| MapError::Config(e.to_string()))?;
        if !(self.occupancy_cap > 0.0 && self.occupancy_cap <= 1.0) {
            return Err(MapError::Config(format!("occupancy cap {} not in (0, 1]", self.occupancy_cap)));
        }
        if self.refresh_interval_layers == Some(0) {
            return Err(MapError::Config("refresh interval must be at least 1".into()));
        }
        Ok(())
    }

    /// Incomplete program nodes allowed on one layer.
    pub fn cap_count(&self) -> usize {
        ((self.occupancy_cap * self.vh.sites() as f64).floor() as usize).max(1)
    }

    pub fn budget(&self) -> u32 {
        self.routing_budget.unwrap_or(self.vh.width + self.vh.height)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("invalid mapper config: {0}")]
    Config(String),
    #[error("edge g{from}-g{to} cannot be routed on layer {layer} within the routing budget")]
    Unroutable { from: NodeId, to: NodeId, layer: u32 },
    #[error("no schedulable node on layer {layer}")]
    Deadlock { layer: u32 },
    #[error("node g{0} needs more lattice neighbours than a site has")]
    DegreeTooHigh(NodeId),
    #[error("mapped IR failed validation: {0:?}")]
    Invalid(Vec<Violation>),
}

/// Continuation point of a pending program edge `source → target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Head {
    at: Coord,
    source: NodeId,
    target: NodeId,
}

/// Scheduling state between placements.
#[derive(Debug, Clone)]
pub struct MappingState {
    pub ir: FlexLatticeIR,
    pub layer: u32,
    pub placed: BTreeMap<NodeId, Coord>,
    heads: BTreeMap<NodeId, Vec<Head>>,
    /// True while the current layer holds nothing placed by a refresh.
    clean: bool,
    placed_on_layer: Vec<NodeId>,
}

impl MappingState {
    fn new(vh: VirtualHardwareConfig) -> Self {
        let mut ir = FlexLatticeIR::new(vh);
        ir.push_layer();
        Self { ir, layer: 0, placed: BTreeMap::new(), heads: BTreeMap::new(), clean: true, placed_on_layer: Vec::new() }
    }

    /// Nodes waiting in virtual memory: heads older than the previous layer.
    pub fn stored_count(&self) -> usize {
        self.heads.values().flatten().filter(|h| h.at.layer + 1 < self.layer).count()
    }

    fn open_layer(&mut self) {
        self.layer = self.ir.push_layer();
        self.clean = true;
        self.placed_on_layer.clear();
    }

    /// Opens a new layer and retrieves every stored head onto it, at the
    /// same site, as an ancilla that becomes the edge's new head. Heads whose
    /// site is already taken stay in memory until the next refresh.
    pub fn refresh(&mut self) {
        self.open_layer();
        let layer = self.layer;
        let mut all: Vec<Head> = self.heads.values().flatten().copied().collect();
        all.sort();
        for h in all {
            if h.at.layer + 1 >= layer {
                continue;
            }
            let land = Coord::new(h.at.x, h.at.y, layer);
            if self.ir.kind(land) != VNodeKind::Unused {
                continue;
            }
            self.ir.set_kind(land, VNodeKind::Ancilla);
            self.ir.add_temporal(h.at.x, h.at.y, h.at.layer, layer);
            let list = self.heads.get_mut(&h.target).unwrap();
            let slot = list.iter_mut().find(|x| **x == h).unwrap();
            slot.at = land;
            self.clean = false;
        }
    }
}

/// Tentative edits for one placement, applied only if all routing succeeds.
struct Attempt {
    grid: Vec<VNodeKind>,
    kinds: Vec<(Coord, VNodeKind)>,
    spatial: Vec<SpatialEdge>,
    temporal: Vec<(u32, u32, u32, u32)>,
    new_heads: Vec<Head>,
}

struct Mapper<'a> {
    pattern: &'a MeasurementPattern,
    dag: DependencyDag,
    cfg: MapperConfig,
    st: MappingState,
}

const DIRS: [(i32, i32); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

impl<'a> Mapper<'a> {
    fn w(&self) -> u32 {
        self.cfg.vh.width
    }

    fn h(&self) -> u32 {
        self.cfg.vh.height
    }

    fn idx(&self, x: u32, y: u32) -> usize {
        (y * self.w() + x) as usize
    }

    fn neighbours(&self, x: u32, y: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        DIRS.iter().filter_map(move |(dx, dy)| {
            let nx = x as i32 + dx;
            let ny = y as i32 + dy;
            (nx >= 0 && ny >= 0 && (nx as u32) < self.w() && (ny as u32) < self.h()).then_some((nx as u32, ny as u32))
        })
    }

    fn unplaced_neighbours(&self, v: NodeId) -> Vec<NodeId> {
        self.pattern.graph.neighbors(v).filter(|u| !self.st.placed.contains_key(u)).collect()
    }

    /// BFS through free sites from `start` to a site adjacent to `goal`;
    /// returns the free cells of the wire (possibly empty).
    fn route(&self, grid: &[VNodeKind], start: (u32, u32), goal: (u32, u32)) -> Option<Vec<(u32, u32)>> {
        let adjacent = |a: (u32, u32), b: (u32, u32)| a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1;
        if adjacent(start, goal) {
            return Some(Vec::new());
        }
        let budget = self.cfg.budget() as usize;
        let mut prev: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
        let mut dist: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        let mut q = VecDeque::new();
        dist.insert(start, 0);
        q.push_back(start);
        while let Some(c) = q.pop_front() {
            let d = dist[&c];
            if d >= budget {
                continue;
            }
            for n in self.neighbours(c.0, c.1) {
                if dist.contains_key(&n) || grid[self.idx(n.0, n.1)] != VNodeKind::Unused {
                    continue;
                }
                dist.insert(n, d + 1);
                prev.insert(n, c);
                if adjacent(n, goal) {
                    let mut path = vec![n];
                    let mut cur = n;
                    while let Some(&p) = prev.get(&cur) {
                        if p == start {
                            break;
                        }
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                q.push_back(n);
            }
        }
        None
    }

    fn current_grid(&self) -> Vec<VNodeKind> {
        self.st.ir.layers[self.st.layer as usize].clone()
    }

    /// Tries to place `v` at site `s` of the current layer.
    fn attempt(&self, v: NodeId, s: (u32, u32)) -> Result<Attempt, (NodeId, NodeId)> {
        let l = self.st.layer;
        let here = Coord::new(s.0, s.1, l);
        let mut a = Attempt {
            grid: self.current_grid(),
            kinds: Vec::new(),
            spatial: Vec::new(),
            temporal: Vec::new(),
            new_heads: Vec::new(),
        };
        let mark = |a: &mut Attempt, c: (u32, u32), k: VNodeKind, idx: usize| {
            a.grid[idx] = k;
            a.kinds.push((Coord::new(c.0, c.1, l), k));
        };
        mark(&mut a, s, VNodeKind::Mapped(v), self.idx(s.0, s.1));
        let mut in_slot_free = true;
        let mut heads: Vec<Head> = self.st.heads.get(&v).cloned().unwrap_or_default();
        // Same-layer heads first, then older ones, each in coordinate order.
        heads.sort_by_key(|h| (std::cmp::Reverse(h.at.layer), h.at.y, h.at.x, h.source));
        for h in heads {
            let edge = (h.source, v);
            let start = if h.at.layer == l {
                (h.at.x, h.at.y)
            } else if h.at.site() == s && in_slot_free {
                in_slot_free = false;
                a.temporal.push((s.0, s.1, h.at.layer, l));
                continue;
            } else {
                let i = self.idx(h.at.x, h.at.y);
                if a.grid[i] != VNodeKind::Unused {
                    return Err(edge);
                }
                mark(&mut a, h.at.site(), VNodeKind::Ancilla, i);
                a.temporal.push((h.at.x, h.at.y, h.at.layer, l));
                h.at.site()
            };
            let path = self.route(&a.grid, start, s).ok_or(edge)?;
            let mut prev = start;
            for c in path {
                mark(&mut a, c, VNodeKind::Ancilla, self.idx(c.0, c.1));
                a.spatial.push(SpatialEdge::new(l, prev, c));
                prev = c;
            }
            a.spatial.push(SpatialEdge::new(l, prev, s));
        }
        // Heads for the edges still pending from `v`.
        let targets = self.unplaced_neighbours(v);
        if !targets.is_empty() {
            let free: Vec<(u32, u32)> = self
                .neighbours(s.0, s.1)
                .filter(|n| a.grid[self.idx(n.0, n.1)] == VNodeKind::Unused)
                .collect();
            let mut sites = vec![s];
            sites.extend(free.iter().copied().take(targets.len() - 1));
            if sites.len() < targets.len() {
                return Err((v, targets[sites.len()]));
            }
            let assignment = self.assign_heads(&targets, &sites).ok_or((v, targets[0]))?;
            for (t, site) in targets.iter().zip(assignment) {
                if site != s {
                    mark(&mut a, site, VNodeKind::Ancilla, self.idx(site.0, site.1));
                    a.spatial.push(SpatialEdge::new(l, s, site));
                }
                a.new_heads.push(Head { at: Coord::new(site.0, site.1, l), source: v, target: *t });
            }
        }
        let _ = here;
        Ok(a)
    }

    /// Matches each pending target to a head site so that no two heads
    /// aiming at the same node share a site column.
    fn assign_heads(&self, targets: &[NodeId], sites: &[(u32, u32)]) -> Option<Vec<(u32, u32)>> {
        let taken = |t: NodeId, c: (u32, u32)| {
            self.st.heads.get(&t).is_some_and(|hs| hs.iter().any(|h| h.at.site() == c))
        };
        fn go(
            k: usize,
            targets: &[NodeId],
            sites: &[(u32, u32)],
            used: &mut Vec<bool>,
            out: &mut Vec<(u32, u32)>,
            taken: &dyn Fn(NodeId, (u32, u32)) -> bool,
        ) -> bool {
            if k == targets.len() {
                return true;
            }
            for i in 0..sites.len() {
                if used[i] || taken(targets[k], sites[i]) {
                    continue;
                }
                used[i] = true;
                out.push(sites[i]);
                if go(k + 1, targets, sites, used, out, taken) {
                    return true;
                }
                out.pop();
                used[i] = false;
            }
            false
        }
        let mut out = Vec::new();
        let mut used = vec![false; sites.len()];
        go(0, targets, sites, &mut used, &mut out, &taken).then_some(out)
    }

    fn commit(&mut self, v: NodeId, a: Attempt) {
        let l = self.st.layer;
        for (c, k) in a.kinds {
            self.st.ir.set_kind(c, k);
            if let VNodeKind::Mapped(g) = k {
                self.st.placed.insert(g, c);
            }
        }
        for e in a.spatial {
            self.st.ir.spatial_edges.insert(e);
        }
        for (x, y, from, to) in a.temporal {
            self.st.ir.add_temporal(x, y, from, to);
        }
        self.st.heads.remove(&v);
        for h in a.new_heads {
            self.st.heads.entry(h.target).or_default().push(h);
        }
        debug_assert_eq!(self.st.placed[&v].layer, l);
        self.st.placed_on_layer.push(v);
    }

    fn incomplete_on_layer(&self) -> usize {
        self.st
            .placed_on_layer
            .iter()
            .filter(|v| self.pattern.graph.neighbors(**v).any(|u| !self.st.placed.contains_key(&u)))
            .count()
    }

    /// Candidate sites for `v`, nearest to its heads first, row-major ties.
    fn sites_for(&self, v: NodeId) -> Vec<(u32, u32)> {
        let grid = &self.st.ir.layers[self.st.layer as usize];
        let heads = self.st.heads.get(&v).cloned().unwrap_or_default();
        let mut sites: Vec<(u32, (u32, u32))> = Vec::new();
        for y in 0..self.h() {
            for x in 0..self.w() {
                if grid[self.idx(x, y)] != VNodeKind::Unused {
                    continue;
                }
                let d: u32 = heads.iter().map(|h| h.at.x.abs_diff(x) + h.at.y.abs_diff(y)).sum();
                sites.push((d, (x, y)));
            }
        }
        sites.sort_by_key(|(d, (x, y))| (*d, *y, *x));
        sites.into_iter().map(|(_, s)| s).collect()
    }

    fn run(mut self) -> Result<FlexLatticeIR, MapError> {
        let total = self.pattern.graph.node_count();
        let cap = self.cfg.cap_count();
        let interval = self.cfg.refresh_interval_layers;
        let mut layers_in_interval = 0u32;
        while self.st.placed.len() < total {
            let mut progress = true;
            let mut last_err: Option<(NodeId, NodeId)> = None;
            while progress && self.st.placed.len() < total {
                progress = false;
                let placed: BTreeSet<NodeId> = self.st.placed.keys().copied().collect();
                let mut front = self.dag.front_layer(&placed);
                if front.is_empty() {
                    return Err(MapError::Deadlock { layer: self.st.layer });
                }
                front.sort_by_key(|v| {
                    let n = self.pattern.graph.neighbors(*v).filter(|u| placed.contains(u)).count();
                    (std::cmp::Reverse(n), *v)
                });
                'cand: for v in front {
                    for s in self.sites_for(v) {
                        match self.attempt(v, s) {
                            Ok(a) => {
                                let before = self.st.clone();
                                self.commit(v, a);
                                if self.incomplete_on_layer() > cap {
                                    self.st = before;
                                    continue 'cand;
                                }
                                progress = true;
                                break 'cand;
                            }
                            Err(e) => last_err = last_err.or(Some(e)),
                        }
                    }
                }
            }
            if self.st.placed.len() == total {
                break;
            }
            if self.st.placed_on_layer.is_empty() && self.st.clean {
                let (from, to) = last_err.ok_or(MapError::Deadlock { layer: self.st.layer })?;
                return Err(MapError::Unroutable { from, to, layer: self.st.layer });
            }
            layers_in_interval += 1;
            match interval {
                Some(k) if layers_in_interval >= k => {
                    layers_in_interval = 0;
                    self.st.refresh();
                }
                _ => self.st.open_layer(),
            }
        }
        let mut ir = self.st.ir;
        ir.trim();
        let violations = validate_ir(&ir);
        if !violations.is_empty() {
            return Err(MapError::Invalid(violations));
        }
        Ok(ir)
    }
}

pub fn map_program(p: &MeasurementPattern, cfg: &MapperConfig) -> Result<FlexLatticeIR, MapError> {
    cfg.validate()?;
    let dag = dependency_dag(p);
    let max_deg = if cfg.vh.sites() == 1 { 2 } else { 5 };
    if let Some(v) = p.graph.nodes().find(|v| p.graph.degree(*v) > max_deg) {
        return Err(MapError::DegreeTooHigh(v));
    }
    let mapper = Mapper { pattern: p, dag, cfg: *cfg, st: MappingState::new(cfg.vh) };
    if p.graph.node_count() == 0 {
        return Ok(FlexLatticeIR::new(cfg.vh));
    }
    mapper.run()
}
