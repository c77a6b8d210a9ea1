//! Compile → execute pipeline and trial aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, RunConfig};
use crate::frontend::{build_benchmark, translate_circuit, Circuit, MeasurementPattern};
use crate::graphstate::{MeasurementBasis, NodeId};
use crate::ir::{emit_instructions, serialize_program, FlexLatticeIR, InstructionProgram, ProgramError};
use crate::mapper::{check_semantics, ir_metrics, map_program, IrMetrics, MapError};
use crate::online::{
    baseline_retry_execute, execute_with_bases, recount_fusions, DepthModel, ExecutionReport, Outcome,
};

/// Everything the offline pass produces.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub circuit: Circuit,
    pub pattern: MeasurementPattern,
    pub ir: FlexLatticeIR,
    pub program: InstructionProgram,
    pub metrics: IrMetrics,
}

impl Compiled {
    pub fn bases(&self) -> BTreeMap<NodeId, MeasurementBasis> {
        self.pattern.graph.nodes().filter_map(|v| self.pattern.graph.basis(v).map(|b| (v, b))).collect()
    }
}

fn load_circuit(run: &RunConfig) -> Result<Circuit, HarnessError> {
    if let Some(b) = &run.benchmark {
        return build_benchmark(b.name, b.n, b.seed).map_err(|e| HarnessError::Config(e.to_string()));
    }
    if let Some(path) = &run.circuit {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        return Circuit::parse(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())));
    }
    Ok(Circuit::new(0))
}

/// Builds the circuit, maps it and emits the instruction program. The
/// mapped IR is checked to realize exactly the program graph.
pub fn compile(run: &RunConfig) -> Result<Compiled, HarnessError> {
    let circuit = load_circuit(run)?.limit_cz_fanout(run.virt.fanout());
    let pattern = translate_circuit(&circuit);
    let ir = map_program(&pattern, &run.virt.mapper_config(run.hardware.photon_lifetime_cycles))?;
    check_semantics(&ir, &pattern.graph)
        .map_err(|e| HarnessError::Verification(format!("mapped IR does not realize the program: {e}")))?;
    let program = emit_instructions(&ir).map_err(|e| match e {
        ProgramError::InvalidIr(v) => HarnessError::Mapper(MapError::Invalid(v)),
        other => HarnessError::Mapper(MapError::Config(other.to_string())),
    })?;
    let metrics = ir_metrics(&ir);
    Ok(Compiled { circuit, pattern, ir, program, metrics })
}

/// Compiles and writes `circuit.txt`, `pattern.json`, `ir.json`,
/// `program.txt` and `metrics.json` into the output directory.
pub fn cmd_compile(run: &RunConfig) -> Result<Compiled, HarnessError> {
    run.validate()?;
    let c = compile(run)?;
    let dir = &run.out_dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("circuit.txt"), c.circuit.to_text())?;
    fs::write(dir.join("pattern.json"), to_json(&c.pattern))?;
    fs::write(dir.join("ir.json"), c.ir.to_json())?;
    fs::write(dir.join("program.txt"), serialize_program(&c.program))?;
    fs::write(dir.join("metrics.json"), to_json(&c.metrics))?;
    Ok(c)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("harness output serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, stddev: var.sqrt(), min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u32,
    pub seed: u64,
    /// Attempted fusions recounted from the trial's event log.
    pub fusions_recounted: Option<u64>,
    pub report: ExecutionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: String,
    pub trials: u32,
    pub completed: u32,
    pub rsl_cap_exceeded: u32,
    pub delay_budget_exceeded: u32,
    pub connection_lost: u32,
    pub rsl: Stats,
    pub fusions: Stats,
    pub rsl_per_logical: Stats,
    pub ir: IrMetrics,
    pub per_trial: Vec<TrialRecord>,
}

impl RunSummary {
    fn new(mode: &str, ir: IrMetrics, per_trial: Vec<TrialRecord>) -> Self {
        let count = |o: Outcome| per_trial.iter().filter(|t| t.report.outcome == o).count() as u32;
        let field = |f: fn(&ExecutionReport) -> f64| per_trial.iter().map(|t| f(&t.report)).collect::<Vec<_>>();
        Self {
            mode: mode.to_string(),
            trials: per_trial.len() as u32,
            completed: count(Outcome::Completed),
            rsl_cap_exceeded: count(Outcome::RslCapExceeded),
            delay_budget_exceeded: count(Outcome::DelayBudgetExceeded),
            connection_lost: count(Outcome::ConnectionLost),
            rsl: Stats::of(&field(|r| r.rsl_consumed as f64)),
            fusions: Stats::of(&field(|r| r.fusions_attempted as f64)),
            rsl_per_logical: Stats::of(&field(ExecutionReport::rsl_per_logical)),
            ir,
            per_trial,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Seed of trial `i`: consecutive seeds from the configured base seed.
fn trial_seed(run: &RunConfig, i: u32) -> u64 {
    run.hardware.seed.wrapping_add(u64::from(i))
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes every trial of the compiled program; event logs are returned
/// alongside the summary, indexed like the trials.
pub fn run_trials(run: &RunConfig, c: &Compiled) -> Result<(RunSummary, Vec<String>), HarnessError> {
    let bases = c.bases();
    let results: Vec<Result<(TrialRecord, String), HarnessError>> = with_threads(run.threads, || {
        (0..run.trials)
            .into_par_iter()
            .map(|i| {
                let mut hw = run.hardware;
                hw.seed = trial_seed(run, i);
                let mut log = String::new();
                let report = execute_with_bases(&c.program, &hw, &run.renorm, Some(&bases), Some(&mut log))?;
                let recount = recount_fusions(&log).map_err(HarnessError::Verification)?;
                Ok((TrialRecord { index: i, seed: hw.seed, fusions_recounted: Some(recount), report }, log))
            })
            .collect()
    })?;
    let mut trials = Vec::new();
    let mut logs = Vec::new();
    for r in results {
        let (t, l) = r?;
        trials.push(t);
        logs.push(l);
    }
    Ok((RunSummary::new("run", c.metrics.clone(), trials), logs))
}

fn write_summary(dir: &Path, name: &str, s: &RunSummary) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), s.to_json())?;
    Ok(())
}

/// Compiles, executes every trial and writes `report.json` plus one event
/// log per trial under `events/`.
pub fn cmd_run(run: &RunConfig) -> Result<RunSummary, HarnessError> {
    run.validate()?;
    let c = compile(run)?;
    let (s, logs) = run_trials(run, &c)?;
    write_summary(&run.out_dir, "report.json", &s)?;
    let events = run.out_dir.join("events");
    fs::create_dir_all(&events)?;
    for (i, log) in logs.iter().enumerate() {
        fs::write(events.join(format!("trial-{i:04}.jsonl")), log)?;
    }
    Ok(s)
}

/// Repeat-until-success baseline on the compiled program's layer model;
/// writes `baseline.json`.
pub fn cmd_baseline(run: &RunConfig) -> Result<RunSummary, HarnessError> {
    run.validate()?;
    let c = compile(run)?;
    let model = DepthModel::from_ir(&c.ir, run.hardware.merge_factor()?);
    let results: Vec<Result<TrialRecord, HarnessError>> = with_threads(run.threads, || {
        (0..run.trials)
            .into_par_iter()
            .map(|i| {
                let mut hw = run.hardware;
                hw.seed = trial_seed(run, i);
                let report = baseline_retry_execute(&model, &hw)?;
                Ok(TrialRecord { index: i, seed: hw.seed, fusions_recounted: None, report })
            })
            .collect()
    })?;
    let trials = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let s = RunSummary::new("baseline", c.metrics.clone(), trials);
    write_summary(&run.out_dir, "baseline.json", &s)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::BenchmarkName;

    #[test]
    fn stats_match_hand_values() {
        let s = Stats::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.stddev - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max), (2.0, 9.0));
        assert_eq!(Stats::of(&[3.0]).stddev, 0.0);
    }

    #[test]
    fn empty_circuit_compiles_to_empty_program() {
        let run = RunConfig::default();
        let c = compile(&run).unwrap();
        assert!(c.program.is_empty());
        assert_eq!(c.metrics.logical_layers, 0);
    }

    #[test]
    fn certain_fusions_cost_one_merged_layer_per_logical_layer() {
        let mut run = RunConfig::benchmark(BenchmarkName::Qaoa, 4);
        run.hardware.p_fusion = 1.0;
        run.trials = 2;
        let c = compile(&run).unwrap();
        let (s, logs) = run_trials(&run, &c).unwrap();
        let layers = c.metrics.logical_layers as f64;
        let m = f64::from(run.hardware.merge_factor().unwrap());
        assert_eq!(s.completed, 2);
        assert_eq!(s.rsl.mean, layers * m);
        assert_eq!(logs.len(), 2);
        for t in &s.per_trial {
            assert_eq!(t.fusions_recounted, Some(t.report.fusions_attempted));
        }
    }
}
