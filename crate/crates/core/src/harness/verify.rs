//! Self-check suites: rewrite rules against the stabilizer oracle, byproduct
//! propagation identities and event-log fusion recounts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::pipeline::{compile, run_trials};
use super::{HarnessError, RunConfig};
use crate::frontend::BenchmarkName;
use crate::graphstate::{ByproductWord, FusionBasis, GraphState, LocalClifford, MeasurementBasis, NodeId};
use crate::oracle::{
    check_fusion_basis, check_fusion_fail, check_fusion_success, check_local_complement, check_measure_z,
    check_measurement_basis, RewriteRules,
};

/// Failure messages kept per suite.
const KEPT_FAILURES: usize = 5;

#[derive(Clone, Copy)]
pub struct VerifyOptions {
    pub rules: RewriteRules,
    /// Graphs up to this many nodes are checked exhaustively.
    pub exhaustive_max_nodes: usize,
    pub random_cases: usize,
    pub random_seed: u64,
    pub recount_runs: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { rules: RewriteRules::default(), exhaustive_max_nodes: 5, random_cases: 500, random_seed: 0, recount_runs: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub cases: u64,
    pub failed: u64,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), cases: 0, failed: 0, failures: Vec::new() }
    }

    fn record(&mut self, r: Result<(), String>) {
        self.cases += 1;
        if let Err(e) = r {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(e);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.cases > 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub suites: Vec<SuiteResult>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }
}

/// Every labelled graph on `n` nodes.
fn all_graphs(n: usize) -> impl Iterator<Item = GraphState> {
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect();
    (0u64..1 << pairs.len()).map(move |mask| {
        let edges: Vec<(u32, u32)> =
            pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        GraphState::from_edges(n, &edges).expect("edges are in range")
    })
}

/// Every rule at every vertex and every non-adjacent ordered pair
/// (fusions join qubits of different states, so they are never adjacent).
fn check_all_rules(rules: &RewriteRules, g: &GraphState, suite: &mut SuiteResult) {
    let nodes: Vec<NodeId> = g.nodes().collect();
    for &v in &nodes {
        suite.record(check_local_complement(rules, g, v));
        suite.record(check_measure_z(rules, g, v));
        for &u in &nodes {
            if u != v && !g.has_edge(u, v) {
                suite.record(check_fusion_success(rules, g, v, u));
                suite.record(check_fusion_fail(rules, g, v, u));
            }
        }
    }
}

fn exhaustive_rules(opts: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("rewrite rules, all graphs");
    for n in 1..=opts.exhaustive_max_nodes {
        for g in all_graphs(n) {
            check_all_rules(&opts.rules, &g, &mut suite);
        }
    }
    suite
}

/// Seeded random graphs of 6–8 nodes with edge probability 1/2; each case
/// checks one random vertex rule pair and one random fusion pair.
fn random_rules(opts: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("rewrite rules, random graphs");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.random_seed);
    for case in 0..opts.random_cases {
        let n = rng.random_range(6..=8usize);
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = GraphState::from_edges(n, &edges).expect("edges are in range");
        let v = NodeId(rng.random_range(0..n as u32));
        let tag = |r: Result<(), String>| r.map_err(|e| format!("case {case}: {e}"));
        let mut outcome = tag(check_local_complement(&opts.rules, &g, v)).and(tag(check_measure_z(&opts.rules, &g, v)));
        let open: Vec<(NodeId, NodeId)> = g
            .nodes()
            .flat_map(|a| g.nodes().map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && !g.has_edge(a, b))
            .collect();
        if !open.is_empty() {
            let (a, b) = open[rng.random_range(0..open.len())];
            outcome = outcome
                .and(tag(check_fusion_success(&opts.rules, &g, a, b)))
                .and(tag(check_fusion_fail(&opts.rules, &g, a, b)));
        }
        suite.record(outcome);
    }
    suite
}

/// Byproduct words of length one and two over the quarter-turn generators.
fn short_words() -> Vec<ByproductWord> {
    let mut out: Vec<ByproductWord> = LocalClifford::ALL.iter().map(|g| ByproductWord::from_gens(vec![*g])).collect();
    for a in LocalClifford::ALL {
        for b in LocalClifford::ALL {
            out.push(ByproductWord::from_gens(vec![a, b]));
        }
    }
    out
}

/// Measurement and fusion propagation on every 3-qubit graph state, for
/// every Pauli axis with both signs.
fn propagation(_: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("byproduct propagation, 3-qubit states");
    let axes = [MeasurementBasis::x(), MeasurementBasis::y(), MeasurementBasis::z()];
    let words = short_words();
    for g in all_graphs(3) {
        for q in g.nodes() {
            for w in &words {
                for b in axes {
                    let flipped = MeasurementBasis::from_bloch(b.bloch().map(|c| -c)).expect("axis basis");
                    suite.record(check_measurement_basis(&g, q, w, b));
                    suite.record(check_measurement_basis(&g, q, w, flipped));
                }
            }
        }
        for (q1, q2) in [(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))] {
            if g.has_edge(q1, q2) {
                continue;
            }
            for a in LocalClifford::ALL {
                for b in LocalClifford::ALL {
                    let (w1, w2) = (ByproductWord::from_gens(vec![a]), ByproductWord::from_gens(vec![b]));
                    suite.record(check_fusion_basis(&g, q1, q2, &w1, &w2, FusionBasis::standard()));
                }
            }
        }
    }
    suite
}

/// Reported attempted fusions against the event-log recount.
fn recount(opts: &VerifyOptions) -> SuiteResult {
    let mut suite = SuiteResult::new("fusion recount from event log");
    let mut run = RunConfig::benchmark(BenchmarkName::Vqe, 4);
    run.hardware.rsl_width = 24;
    run.hardware.rsl_height = 24;
    run.hardware.p_fusion = 0.9;
    run.renorm.node_size = 12;
    run.hardware.seed = opts.random_seed;
    run.trials = opts.recount_runs;
    let outcome = compile(&run).map_err(|e| e.to_string()).and_then(|c| run_trials(&run, &c).map_err(|e| e.to_string()));
    match outcome {
        Err(e) => suite.record(Err(e)),
        Ok((s, _)) => {
            for t in &s.per_trial {
                suite.record(match t.fusions_recounted {
                    Some(n) if n == t.report.fusions_attempted => Ok(()),
                    other => Err(format!("trial {}: reported {} recounted {other:?}", t.index, t.report.fusions_attempted)),
                });
            }
        }
    }
    suite
}

pub fn verify_with(opts: &VerifyOptions) -> VerifySummary {
    VerifySummary { suites: vec![exhaustive_rules(opts), random_rules(opts), propagation(opts), recount(opts)] }
}

impl VerifySummary {
    /// The summary itself when every suite passed; otherwise an error
    /// naming the failed suites.
    pub fn into_result(self) -> Result<Self, HarnessError> {
        if self.passed() {
            return Ok(self);
        }
        let failed: Vec<String> = self.suites.iter().filter(|x| !x.passed()).map(|x| x.name.clone()).collect();
        Err(HarnessError::Verification(failed.join(", ")))
    }
}

/// Runs every suite with the shipped rules; any failure is an error.
pub fn cmd_verify() -> Result<VerifySummary, HarnessError> {
    verify_with(&VerifyOptions::default()).into_result()
}
