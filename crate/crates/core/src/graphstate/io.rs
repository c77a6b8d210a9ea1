//! Edge-list text format for graph states.
//!
//! ```text
//! # comments and blank lines are ignored
//! 3                 node count
//! ids 0 4 7         optional; default ids are 0..count
//! 0 4               one edge per line
//! 4 7
//! annotations
//! 4 role=root basis=XY:0.500000000000 word=Z+,X-
//! ```

use thiserror::Error;

use super::{ByproductWord, GraphState, LocalClifford, MeasurementBasis, NodeId, Role};

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct GraphParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> GraphParseError {
    GraphParseError { line, message: message.into() }
}

pub fn write_graph(g: &GraphState) -> String {
    let mut out = format!("{}\n", g.node_count());
    let ids: Vec<NodeId> = g.nodes().collect();
    let contiguous = ids.iter().enumerate().all(|(i, v)| v.0 as usize == i);
    if !contiguous {
        out.push_str("ids");
        for v in &ids {
            out.push_str(&format!(" {v}"));
        }
        out.push('\n');
    }
    for (a, b) in g.edges() {
        out.push_str(&format!("{a} {b}\n"));
    }
    let mut notes = String::new();
    for v in ids {
        let mut fields = Vec::new();
        if g.role(v) != Role::Unassigned {
            fields.push(format!("role={}", g.role(v).as_str()));
        }
        if let Some(b) = g.basis(v) {
            fields.push(format!("basis={b}"));
        }
        let w = g.byproduct(v);
        if !w.is_identity() {
            let gens: Vec<String> = w.gens().iter().map(|c| c.to_string()).collect();
            fields.push(format!("word={}", gens.join(",")));
        }
        if !fields.is_empty() {
            notes.push_str(&format!("{v} {}\n", fields.join(" ")));
        }
    }
    if !notes.is_empty() {
        out.push_str("annotations\n");
        out.push_str(&notes);
    }
    out
}

fn parse_id(tok: &str, line: usize) -> Result<NodeId, GraphParseError> {
    tok.parse::<u32>().map(NodeId).map_err(|_| err(line, format!("bad node id `{tok}`")))
}

pub fn parse_graph(text: &str) -> Result<GraphState, GraphParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let (ln, first) = lines.next().ok_or_else(|| err(1, "missing node count"))?;
    let count: usize = first.parse().map_err(|_| err(ln, format!("bad node count `{first}`")))?;
    let mut g = GraphState::new();
    match lines.peek() {
        Some((ln, l)) if l.starts_with("ids") => {
            let ln = *ln;
            let ids = l["ids".len()..]
                .split_whitespace()
                .map(|t| parse_id(t, ln))
                .collect::<Result<Vec<_>, _>>()?;
            if ids.len() != count {
                return Err(err(ln, format!("expected {count} ids, got {}", ids.len())));
            }
            for id in ids {
                if g.contains(id) {
                    return Err(err(ln, format!("duplicate id {id}")));
                }
                g.insert_node(id);
            }
            lines.next();
        }
        _ => {
            for _ in 0..count {
                g.add_node();
            }
        }
    }

    let mut in_notes = false;
    for (ln, l) in lines {
        if l == "annotations" {
            in_notes = true;
            continue;
        }
        let mut toks = l.split_whitespace();
        let v = parse_id(toks.next().unwrap(), ln)?;
        if !g.contains(v) {
            return Err(err(ln, format!("unknown node {v}")));
        }
        if !in_notes {
            let u = parse_id(toks.next().ok_or_else(|| err(ln, "edge needs two ids"))?, ln)?;
            if toks.next().is_some() {
                return Err(err(ln, "trailing tokens after edge"));
            }
            g.add_edge(v, u).map_err(|e| err(ln, e.to_string()))?;
            continue;
        }
        for field in toks {
            let (key, val) = field.split_once('=').ok_or_else(|| err(ln, format!("bad field `{field}`")))?;
            match key {
                "role" => {
                    let r = Role::parse(val).ok_or_else(|| err(ln, format!("bad role `{val}`")))?;
                    g.set_role(v, r).unwrap();
                }
                "basis" => {
                    let b: MeasurementBasis = val.parse().map_err(|e: super::BasisError| err(ln, e.to_string()))?;
                    g.set_basis(v, Some(b)).unwrap();
                }
                "word" => {
                    let gens = val
                        .split(',')
                        .map(|t| t.parse::<LocalClifford>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(ln, e.to_string()))?;
                    g.set_byproduct(v, ByproductWord::from_gens(gens)).unwrap();
                }
                _ => return Err(err(ln, format!("unknown field `{key}`"))),
            }
        }
    }
    Ok(g)
}
