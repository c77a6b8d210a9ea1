//! Parameter sweeps emitting plot-ready CSV.

use rayon::prelude::*;
use serde::Serialize;

use super::config::unlimited_time;
use super::pipeline::{compile, run_trials, with_threads, Stats};
use super::{HarnessError, RunConfig, SweepMetric, SweepSpec};
use crate::online::{build_merged_layer, renormalize, substream};

/// Bumped whenever a column is added, removed or reinterpreted.
pub const CSV_SCHEMA: &str = "flexperc-sweep/1";

pub const CSV_HEADER: &[&str] = &[
    "schema",
    "parameter",
    "value",
    "metric",
    "trials",
    "successes",
    "success_rate",
    "mean_nodes",
    "std_nodes",
    "mean_reference_nodes",
    "mean_rsl",
    "std_rsl",
    "mean_fusions",
    "std_fusions",
    "mean_rsl_per_logical",
    "logical_layers",
    "error",
];

/// One sweep point. Columns that do not apply to the metric stay empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub trials: u32,
    pub successes: u32,
    pub success_rate: Option<f64>,
    pub mean_nodes: Option<f64>,
    pub std_nodes: Option<f64>,
    /// Coarse nodes the unlimited-time, non-modular search finds on the
    /// same layers (modular points only).
    pub mean_reference_nodes: Option<f64>,
    pub mean_rsl: Option<f64>,
    pub std_rsl: Option<f64>,
    pub mean_fusions: Option<f64>,
    pub std_fusions: Option<f64>,
    pub mean_rsl_per_logical: Option<f64>,
    pub logical_layers: Option<u64>,
    pub error: Option<String>,
}

fn renorm_point(run: &RunConfig) -> SweepRow {
    let modular = run.renorm.module_count > 1;
    let reference = unlimited_time(&run.renorm);
    let per_trial: Vec<Result<(bool, f64, f64), String>> = (0..run.trials)
        .into_par_iter()
        .map(|t| {
            let mut hw = run.hardware;
            hw.seed = hw.seed.wrapping_add(u64::from(t));
            let (layer, _) = build_merged_layer(&hw, &mut substream(hw.seed, 0, 0)).map_err(|e| e.to_string())?;
            let (tw, th) = run.renorm.target_size(hw.rsl_width, hw.rsl_height).map_err(|e| e.to_string())?;
            let (ok, nodes) = match renormalize(&layer, &run.renorm) {
                Ok(l) => (tw > 0 && th > 0 && l.width >= tw && l.height >= th, l.node_count() as f64),
                Err(_) => (false, 0.0),
            };
            let ref_nodes =
                if modular { renormalize(&layer, &reference).map(|l| l.node_count() as f64).unwrap_or(0.0) } else { 0.0 };
            Ok((ok, nodes, ref_nodes))
        })
        .collect();
    let mut row = SweepRow { trials: run.trials, ..SweepRow::default() };
    let mut nodes = Vec::new();
    let mut refs = Vec::new();
    for r in per_trial {
        match r {
            Ok((ok, n, rn)) => {
                row.successes += ok as u32;
                nodes.push(n);
                refs.push(rn);
            }
            Err(e) => {
                row.error = Some(e);
                return row;
            }
        }
    }
    let s = Stats::of(&nodes);
    row.success_rate = Some(f64::from(row.successes) / f64::from(run.trials));
    row.mean_nodes = Some(s.mean);
    row.std_nodes = Some(s.stddev);
    if modular {
        row.mean_reference_nodes = Some(Stats::of(&refs).mean);
    }
    row
}

fn run_point(run: &RunConfig) -> Result<SweepRow, HarnessError> {
    let c = compile(run)?;
    let (s, _) = run_trials(run, &c)?;
    Ok(SweepRow {
        trials: s.trials,
        successes: s.completed,
        success_rate: Some(f64::from(s.completed) / f64::from(s.trials)),
        mean_rsl: Some(s.rsl.mean),
        std_rsl: Some(s.rsl.stddev),
        mean_fusions: Some(s.fusions.mean),
        std_fusions: Some(s.fusions.stddev),
        mean_rsl_per_logical: Some(s.rsl_per_logical.mean),
        logical_layers: Some(c.metrics.logical_layers as u64),
        ..SweepRow::default()
    })
}

fn compile_point(run: &RunConfig) -> Result<SweepRow, HarnessError> {
    let c = compile(run)?;
    Ok(SweepRow { trials: 1, successes: 1, logical_layers: Some(c.metrics.logical_layers as u64), ..SweepRow::default() })
}

fn point(spec: &SweepSpec, v: f64) -> SweepRow {
    let run = match spec.point(v).and_then(|r| r.validate().map(|_| r)) {
        Ok(r) => r,
        Err(e) => return SweepRow { value: v, error: Some(e.to_string()), ..SweepRow::default() },
    };
    let mut row = match spec.metric {
        SweepMetric::Renorm => renorm_point(&run),
        SweepMetric::Run => run_point(&run).unwrap_or_else(|e| SweepRow { error: Some(e.to_string()), ..SweepRow::default() }),
        SweepMetric::Compile => {
            compile_point(&run).unwrap_or_else(|e| SweepRow { error: Some(e.to_string()), ..SweepRow::default() })
        }
    };
    row.value = v;
    row
}

/// Evaluates every point; failures are recorded in their row and the
/// sweep carries on.
pub fn cmd_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    if !super::SWEEP_PARAMETERS.contains(&spec.parameter.as_str()) {
        return Err(HarnessError::Config(format!("unknown sweep parameter `{}`", spec.parameter)));
    }
    if spec.values.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one value".into()));
    }
    with_threads(spec.base.threads, || spec.values.iter().map(|&v| point(spec, v)).collect())
}

/// Renders rows with fixed six-decimal floats so identical sweeps produce
/// identical bytes.
pub fn sweep_csv(spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    let metric = match spec.metric {
        SweepMetric::Renorm => "renorm",
        SweepMetric::Run => "run",
        SweepMetric::Compile => "compile",
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory csv");
    for r in rows {
        w.write_record([
            CSV_SCHEMA.to_string(),
            spec.parameter.clone(),
            format!("{:.6}", r.value),
            metric.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            f(r.success_rate),
            f(r.mean_nodes),
            f(r.std_nodes),
            f(r.mean_reference_nodes),
            f(r.mean_rsl),
            f(r.std_rsl),
            f(r.mean_fusions),
            f(r.std_fusions),
            f(r.mean_rsl_per_logical),
            r.logical_layers.map(|l| l.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut r = RunConfig::default();
        r.hardware.rsl_width = 24;
        r.hardware.rsl_height = 24;
        r.renorm.node_size = 6;
        r.trials = 8;
        r
    }

    #[test]
    fn renorm_sweep_rises_with_probability() {
        let spec = SweepSpec { parameter: "p_fusion".into(), values: vec![0.3, 1.0], metric: SweepMetric::Renorm, base: small() };
        let rows = cmd_sweep(&spec).unwrap();
        assert_eq!(rows[0].success_rate, Some(0.0));
        assert_eq!(rows[1].success_rate, Some(1.0));
        assert_eq!(rows[1].mean_nodes, Some(16.0));
    }

    #[test]
    fn failures_stay_in_row() {
        let spec = SweepSpec { parameter: "node_size".into(), values: vec![1.0, 6.0], metric: SweepMetric::Renorm, base: small() };
        let rows = cmd_sweep(&spec).unwrap();
        assert!(rows[0].error.is_some());
        assert!(rows[1].error.is_none());
        let csv = sweep_csv(&spec, &rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[2].starts_with("flexperc-sweep/1,node_size,6.000000,renorm,8,"));
    }

    #[test]
    fn unknown_parameter_is_a_config_error() {
        let spec = SweepSpec { parameter: "speed".into(), values: vec![1.0], metric: SweepMetric::Renorm, base: small() };
        assert_eq!(cmd_sweep(&spec).unwrap_err().exit_code(), 2);
    }
}
