//! Intermediate-level instructions: emission from an IR, the line-oriented
//! text format, and abstract replay back into an IR.
//!
//! Grammar (one instruction per line, `#` comments, `...` elision lines
//! ignored):
//!
//! ```text
//! coord := "(" int "," int "," int ")"
//! gnode := "g" int | identifier
//! map_v_node(coord, gnode)        make_v_node_ancilla(coord)
//! store_v_node(coord)             retrieve_v_node(coord, coord)
//! enable_spatial_v_edge(coord, coord)
//! enable_temporal_v_edge(coord, coord)
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_ir, Coord, FlexLatticeIR, SpatialEdge, VNodeKind, VirtualHardwareConfig, Violation};
use crate::graphstate::NodeId;

/// A program-graph node as named in an instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GNodeRef {
    Id(NodeId),
    /// Symbolic name (hand-written programs only; cannot be replayed).
    Name(String),
}

impl fmt::Display for GNodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GNodeRef::Id(id) => write!(f, "g{id}"),
            GNodeRef::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Instruction {
    MapVNode(Coord, GNodeRef),
    MakeAncilla(Coord),
    Store(Coord),
    /// Re-materializes the node stored from the first coordinate at the
    /// second position.
    Retrieve(Coord, Coord),
    EnableSpatial(Coord, Coord),
    EnableTemporal(Coord, Coord),
}

impl Instruction {
    /// The layer the instruction is scheduled on.
    pub fn layer(&self) -> u32 {
        match self {
            Instruction::MapVNode(c, _)
            | Instruction::MakeAncilla(c)
            | Instruction::Store(c)
            | Instruction::EnableSpatial(c, _)
            | Instruction::EnableTemporal(c, _) => c.layer,
            Instruction::Retrieve(_, at) => at.layer,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::MapVNode(c, g) => write!(f, "map_v_node({c}, {g})"),
            Instruction::MakeAncilla(c) => write!(f, "make_v_node_ancilla({c})"),
            Instruction::Store(c) => write!(f, "store_v_node({c})"),
            Instruction::Retrieve(c, at) => write!(f, "retrieve_v_node({c}, {at})"),
            Instruction::EnableSpatial(a, b) => write!(f, "enable_spatial_v_edge({a}, {b})"),
            Instruction::EnableTemporal(a, b) => write!(f, "enable_temporal_v_edge({a}, {b})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionProgram {
    pub instructions: Vec<Instruction>,
}

impl InstructionProgram {
    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Instructions grouped by scheduling layer, in program order.
    pub fn by_layer(&self) -> BTreeMap<u32, Vec<&Instruction>> {
        let mut m: BTreeMap<u32, Vec<&Instruction>> = BTreeMap::new();
        for i in &self.instructions {
            m.entry(i.layer()).or_default().push(i);
        }
        m
    }

    pub fn layer_count(&self) -> usize {
        self.instructions.iter().map(|i| i.layer() as usize + 1).max().unwrap_or(0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error("IR is invalid: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidIr(Vec<Violation>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {index} (`{instr}`): {message}")]
    Replay { index: usize, instr: String, message: String },
}

/// Per layer: node declarations (row-major), spatial enables, stores,
/// retrieves, then temporal enables towards the next layer.
pub fn emit_instructions(ir: &FlexLatticeIR) -> Result<InstructionProgram, ProgramError> {
    let violations = validate_ir(ir);
    if !violations.is_empty() {
        return Err(ProgramError::InvalidIr(violations));
    }
    let mut out = Vec::new();
    let w = ir.config.width;
    for (l, grid) in ir.layers.iter().enumerate() {
        let l = l as u32;
        for (i, k) in grid.iter().enumerate() {
            let c = Coord::new(i as u32 % w, i as u32 / w, l);
            match k {
                VNodeKind::Mapped(g) => out.push(Instruction::MapVNode(c, GNodeRef::Id(*g))),
                VNodeKind::Ancilla => out.push(Instruction::MakeAncilla(c)),
                VNodeKind::Unused => {}
            }
        }
        for e in ir.spatial_edges.iter().filter(|e| e.layer == l) {
            let (a, b) = e.endpoints();
            out.push(Instruction::EnableSpatial(a, b));
        }
        for m in ir.memory_events.iter().filter(|m| m.store_layer == l) {
            out.push(Instruction::Store(Coord::new(m.x, m.y, l)));
        }
        for m in ir.memory_events.iter().filter(|m| m.retrieve_layer == l) {
            out.push(Instruction::Retrieve(Coord::new(m.x, m.y, m.store_layer), Coord::new(m.x, m.y, l)));
        }
        let mut temporal: Vec<(Coord, Coord)> = ir
            .temporal_edges
            .iter()
            .filter(|e| e.to == l + 1)
            .map(|e| (Coord::new(e.x, e.y, l), e.target()))
            .collect();
        temporal.sort_by_key(|(a, _)| (a.y, a.x));
        for (a, b) in temporal {
            out.push(Instruction::EnableTemporal(a, b));
        }
    }
    Ok(InstructionProgram { instructions: out })
}

pub fn serialize_program(p: &InstructionProgram) -> String {
    let mut s = String::new();
    for i in &p.instructions {
        s.push_str(&i.to_string());
        s.push('\n');
    }
    s
}

struct Cursor<'a> {
    s: &'a str,
}

impl<'a> Cursor<'a> {
    fn ws(&mut self) {
        self.s = self.s.trim_start();
    }

    fn eat(&mut self, c: char) -> Result<(), String> {
        self.ws();
        self.s = self.s.strip_prefix(c).ok_or_else(|| format!("expected `{c}` at `{}`", self.s))?;
        Ok(())
    }

    fn int(&mut self) -> Result<u32, String> {
        self.ws();
        let end = self.s.find(|c: char| !c.is_ascii_digit()).unwrap_or(self.s.len());
        let (num, rest) = self.s.split_at(end);
        self.s = rest;
        num.parse().map_err(|_| format!("expected an integer at `{num}{rest}`"))
    }

    fn coord(&mut self) -> Result<Coord, String> {
        self.eat('(')?;
        let x = self.int()?;
        self.eat(',')?;
        let y = self.int()?;
        self.eat(',')?;
        let l = self.int()?;
        self.eat(')')?;
        Ok(Coord::new(x, y, l))
    }

    fn ident(&mut self) -> Result<&'a str, String> {
        self.ws();
        let end = self.s.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(self.s.len());
        if end == 0 {
            return Err(format!("expected a name at `{}`", self.s));
        }
        let (id, rest) = self.s.split_at(end);
        self.s = rest;
        Ok(id)
    }

    fn gnode(&mut self) -> Result<GNodeRef, String> {
        let id = self.ident()?;
        match id.strip_prefix('g').map(str::parse::<u32>) {
            Some(Ok(n)) => Ok(GNodeRef::Id(NodeId(n))),
            _ => Ok(GNodeRef::Name(id.to_string())),
        }
    }
}

fn parse_line(l: &str) -> Result<Instruction, String> {
    let mut c = Cursor { s: l };
    let name = c.ident()?;
    c.eat('(')?;
    let instr = match name {
        "map_v_node" => {
            let v = c.coord()?;
            c.eat(',')?;
            Instruction::MapVNode(v, c.gnode()?)
        }
        "make_v_node_ancilla" => Instruction::MakeAncilla(c.coord()?),
        "store_v_node" => Instruction::Store(c.coord()?),
        "retrieve_v_node" | "enable_spatial_v_edge" | "enable_temporal_v_edge" => {
            let a = c.coord()?;
            c.eat(',')?;
            let b = c.coord()?;
            match name {
                "retrieve_v_node" => Instruction::Retrieve(a, b),
                "enable_spatial_v_edge" => Instruction::EnableSpatial(a, b),
                _ => Instruction::EnableTemporal(a, b),
            }
        }
        other => return Err(format!("unknown instruction `{other}`")),
    };
    c.eat(')')?;
    c.ws();
    if !c.s.is_empty() {
        return Err(format!("trailing text `{}`", c.s));
    }
    Ok(instr)
}

pub fn parse_program(text: &str) -> Result<InstructionProgram, ProgramError> {
    let mut instructions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() || l == "..." {
            continue;
        }
        let instr = parse_line(l).map_err(|message| ProgramError::Parse { line: i + 1, message })?;
        instructions.push(instr);
    }
    Ok(InstructionProgram { instructions })
}

/// Rebuilds the IR a program describes; the inverse of emission.
pub fn replay_program(p: &InstructionProgram, config: VirtualHardwareConfig) -> Result<FlexLatticeIR, ProgramError> {
    let mut ir = FlexLatticeIR::new(config);
    // Stored node per (site, retrieve layer) → its original layer.
    let mut retrieved: BTreeMap<Coord, u32> = BTreeMap::new();
    let mut stored: BTreeMap<Coord, bool> = BTreeMap::new();
    for (index, instr) in p.instructions.iter().enumerate() {
        let fail = |message: String| ProgramError::Replay { index, instr: instr.to_string(), message };
        let check = |c: Coord| {
            if c.x < config.width && c.y < config.height {
                Ok(())
            } else {
                Err(fail(format!("{c} outside the {}x{} layer", config.width, config.height)))
            }
        };
        match instr {
            Instruction::MapVNode(c, g) => {
                check(*c)?;
                let GNodeRef::Id(id) = g else {
                    return Err(fail("symbolic g_node names cannot be replayed".into()));
                };
                ir.set_kind(*c, VNodeKind::Mapped(*id));
            }
            Instruction::MakeAncilla(c) => {
                check(*c)?;
                ir.set_kind(*c, VNodeKind::Ancilla);
            }
            Instruction::Store(c) => {
                check(*c)?;
                if ir.kind(*c) == VNodeKind::Unused {
                    return Err(fail(format!("store of undeclared node {c}")));
                }
                stored.insert(*c, false);
            }
            Instruction::Retrieve(c, at) => {
                check(*at)?;
                if c.site() != at.site() || at.layer <= c.layer {
                    return Err(fail("retrieval must be at the same site on a later layer".into()));
                }
                match stored.get_mut(c) {
                    Some(used) if !*used => *used = true,
                    _ => return Err(fail(format!("{c} is not in virtual memory"))),
                }
                retrieved.insert(*at, c.layer);
            }
            Instruction::EnableSpatial(a, b) => {
                check(*a)?;
                check(*b)?;
                if a.layer != b.layer {
                    return Err(fail("spatial edge across layers".into()));
                }
                ir.spatial_edges.insert(SpatialEdge::new(a.layer, a.site(), b.site()));
            }
            Instruction::EnableTemporal(a, b) => {
                check(*a)?;
                if a.site() != b.site() || b.layer != a.layer + 1 {
                    return Err(fail("temporal enable must join the same site on adjacent layers".into()));
                }
                let from = retrieved.remove(a).unwrap_or(a.layer);
                ir.add_temporal(a.x, a.y, from, b.layer);
            }
        }
    }
    if let Some((c, _)) = stored.iter().find(|(_, used)| !**used) {
        return Err(ProgramError::Replay {
            index: p.instructions.len(),
            instr: String::new(),
            message: format!("{c} stored but never retrieved"),
        });
    }
    // Layers referenced only by edges still need a grid.
    let max_layer = p.layer_count().max(
        ir.temporal_edges.iter().map(|e| e.to as usize + 1).max().unwrap_or(0),
    );
    while ir.layers.len() < max_layer {
        ir.push_layer();
    }
    Ok(ir)
}

#[cfg(test)]
mod tests {
    use super::super::tests::listing_ir;
    use super::*;
    use crate::ir::ir_metrics;
    use proptest::prelude::*;

    const LISTING: &str = "make_v_node_ancilla((1, 1, 0))
store_v_node((1, 1, 0))
...
retrieve_v_node((1, 1, 0), (1, 1, 1))
enable_temporal_v_edge((1, 1, 1), (1, 1, 2))
map_v_node((1, 1, 2), A)
";

    #[test]
    fn listing_emission() {
        let p = emit_instructions(&listing_ir()).unwrap();
        let text = serialize_program(&p);
        let expected: String = LISTING.replace("...\n", "").replace(", A)", ", g0)");
        assert_eq!(text, expected);
    }

    #[test]
    fn parse_listing() {
        let p = parse_program(LISTING).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.instructions[4], Instruction::MapVNode(Coord::new(1, 1, 2), GNodeRef::Name("A".into())));
        assert!(parse_program("").unwrap().is_empty());
        let one = parse_program("map_v_node((0,0,0), g7)").unwrap();
        assert_eq!(one.instructions, vec![Instruction::MapVNode(Coord::new(0, 0, 0), GNodeRef::Id(NodeId(7)))]);
    }

    #[test]
    fn parse_errors_have_lines() {
        let e = parse_program("store_v_node((0,0,0))\nfly((1,1,1))\n").unwrap_err();
        assert!(matches!(e, ProgramError::Parse { line: 2, .. }));
        assert!(parse_program("store_v_node((0,0))").is_err());
        assert!(parse_program("store_v_node((0,0,0)) extra").is_err());
    }

    #[test]
    fn small_emissions() {
        let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(2, 1));
        ir.set_kind(Coord::new(0, 0, 0), VNodeKind::Mapped(NodeId(3)));
        assert_eq!(emit_instructions(&ir).unwrap().len(), 1);
        ir.set_kind(Coord::new(1, 0, 0), VNodeKind::Mapped(NodeId(4)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (0, 0), (1, 0)));
        let p = emit_instructions(&ir).unwrap();
        assert_eq!(p.len(), 3);
        assert!(matches!(p.instructions[2], Instruction::EnableSpatial(..)));
        ir.spatial_edges.insert(SpatialEdge::new(0, (0, 0), (0, 0)));
        assert!(matches!(emit_instructions(&ir), Err(ProgramError::InvalidIr(_))));
    }

    #[test]
    fn replay_listing() {
        let ir = listing_ir();
        let p = emit_instructions(&ir).unwrap();
        let back = replay_program(&p, ir.config).unwrap();
        assert_eq!(back, ir);
        assert_eq!(ir_metrics(&back), ir_metrics(&ir));
    }

    /// Random valid IRs: a chain of temporal edges per site plus random
    /// spatial edges between used neighbours.
    fn arb_ir() -> impl Strategy<Value = FlexLatticeIR> {
        (1u32..4, 1u32..4, 1u32..6).prop_flat_map(|(w, h, layers)| {
            let sites = (w * h * layers) as usize;
            (
                prop::collection::vec(0u8..3, sites),
                prop::collection::vec(any::<bool>(), sites * 2),
                prop::collection::vec(0u32..3, sites),
            )
                .prop_map(move |(kinds, sp, gaps)| {
                    let mut ir = FlexLatticeIR::new(VirtualHardwareConfig::new(w, h));
                    let mut g = 0;
                    for l in 0..layers {
                        ir.push_layer();
                        for y in 0..h {
                            for x in 0..w {
                                let i = ((l * h + y) * w + x) as usize;
                                let k = match kinds[i] {
                                    0 => VNodeKind::Unused,
                                    1 => VNodeKind::Ancilla,
                                    _ => {
                                        g += 1;
                                        VNodeKind::Mapped(NodeId(g))
                                    }
                                };
                                ir.set_kind(Coord::new(x, y, l), k);
                            }
                        }
                    }
                    for y in 0..h {
                        for x in 0..w {
                            // Walk up the layers, linking used nodes by gaps.
                            let mut l = 0;
                            while l < layers {
                                let i = ((l * h + y) * w + x) as usize;
                                let to = l + 1 + gaps[i];
                                if to < layers
                                    && ir.kind(Coord::new(x, y, l)) != VNodeKind::Unused
                                    && ir.kind(Coord::new(x, y, to)) != VNodeKind::Unused
                                {
                                    ir.add_temporal(x, y, l, to);
                                    l = to;
                                } else {
                                    l += 1;
                                }
                            }
                            for l in 0..layers {
                                let i = ((l * h + y) * w + x) as usize;
                                let c = Coord::new(x, y, l);
                                if ir.kind(c) == VNodeKind::Unused {
                                    continue;
                                }
                                for (k, (nx, ny)) in [(x + 1, y), (x, y + 1)].into_iter().enumerate() {
                                    if nx < w && ny < h && sp[2 * i + k]
                                        && ir.kind(Coord::new(nx, ny, l)) != VNodeKind::Unused
                                    {
                                        ir.spatial_edges.insert(SpatialEdge::new(l, (x, y), (nx, ny)));
                                    }
                                }
                            }
                        }
                    }
                    ir.trim();
                    ir
                })
        })
    }

    proptest! {
        #[test]
        fn emission_is_lossless_and_stable(ir in arb_ir()) {
            prop_assert!(validate_ir(&ir).is_empty(), "{:?}", validate_ir(&ir));
            let p = emit_instructions(&ir).unwrap();
            let text = serialize_program(&p);
            let parsed = parse_program(&text).unwrap();
            prop_assert_eq!(&parsed, &p);
            prop_assert_eq!(serialize_program(&parsed), text.clone());
            let back = replay_program(&parsed, ir.config).unwrap();
            prop_assert_eq!(&back, &ir);
            prop_assert_eq!(serialize_program(&emit_instructions(&back).unwrap()), text);
        }
    }
}
