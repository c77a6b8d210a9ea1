//! Compiler and Monte-Carlo runtime for fusion-based measurement-based
//! quantum computing.
//!
//! Pipeline: [`frontend`] circuits → program graph states → [`mapper`]
//! place-and-route onto the layered virtual hardware ([`ir`]) → [`online`]
//! percolation-based execution over probabilistic fusions. [`oracle`] is a
//! small stabilizer simulator used to validate the rewrite rules in
//! [`graphstate`]; [`harness`] drives experiments.

pub mod graphstate;
pub mod ir;
pub mod mapper;
pub mod frontend;
pub mod online;
pub mod oracle;
pub mod harness;

pub use graphstate::{
    ByproductWord, FusionBasis, GraphError, GraphState, LocalClifford, MeasurementBasis, NodeId,
    Pauli, Role,
};
