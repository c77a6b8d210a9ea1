//! Circuits over `{J(α), CZ}`, benchmark generators, translation to
//! measurement patterns and the measurement dependency DAG.

mod benchmarks;
mod circuit;
mod pattern;

pub use benchmarks::{
    build_benchmark, qaoa_edges, rca_layout, AdderLayout, BenchmarkError, BenchmarkName,
    BENCHMARK_DEFAULTS, BENCHMARK_RNG,
};
pub use circuit::{gates, Circuit, CircuitError, Gate};
pub use pattern::{adjusted_angle, dependency_dag, translate_circuit, DependencyDag, MeasurementPattern};
