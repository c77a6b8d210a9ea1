use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flexperc::frontend::BenchmarkName;
use flexperc::harness::{
    cmd_baseline, cmd_compile, cmd_run, cmd_sweep, sweep_csv, verify_with, BenchmarkSpec, HarnessError, Overrides,
    RunConfig, RunSummary, SweepSpec, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "flexperc", version, about = "Compile and simulate MBQC programs on percolated photonic hardware")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a program and write pattern, IR, instruction program and metrics.
    Compile(RunArgs),
    /// Compile, then execute every trial on the percolation runtime.
    Run(RunArgs),
    /// Execute the repeat-until-success baseline on the program's layer model.
    Baseline(RunArgs),
    /// Evaluate a parameter sweep and write plot-ready CSV.
    Sweep(SweepArgs),
    /// Check rewrite rules, byproduct propagation and fusion accounting.
    Verify,
}

/// Flags override values from the config file.
#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Abort a trial after this many resource-state layers.
    #[arg(long)]
    cap: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trials: self.trials,
            out_dir: self.out_dir.clone(),
            cap: self.cap,
            threads: self.threads,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Benchmark to build instead of the config's program (qaoa, qft, rca, vqe).
    #[arg(long)]
    benchmark: Option<BenchmarkName>,
    /// Benchmark qubit count.
    #[arg(long, default_value_t = 4)]
    n: usize,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, HarnessError> {
        let mut run = match &self.common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(name) = self.benchmark {
            run.benchmark = Some(BenchmarkSpec { name, n: self.n, seed: 0 });
        }
        self.common.overrides().apply(&mut run);
        Ok(run)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
}

fn print_summary(s: &RunSummary, file: &str, run: &RunConfig) -> Result<(), HarnessError> {
    println!("{} trials: {}, completed {}", s.mode, s.trials, s.completed);
    println!(
        "aborts: rsl-cap {}, delay-budget {}, connection-lost {}",
        s.rsl_cap_exceeded, s.delay_budget_exceeded, s.connection_lost
    );
    println!("#RSL    mean {:.2} stddev {:.2}", s.rsl.mean, s.rsl.stddev);
    println!("#fusion mean {:.2} stddev {:.2}", s.fusions.mean, s.fusions.stddev);
    println!("report: {}", run.out_dir.join(file).display());
    if s.completed < s.trials {
        return Err(HarnessError::Runtime(format!("{} of {} trials aborted", s.trials - s.completed, s.trials)));
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<(), HarnessError> {
    match cmd {
        Command::Compile(a) => {
            let run = a.config()?;
            let c = cmd_compile(&run)?;
            let m = &c.metrics;
            println!("logical layers: {}", m.logical_layers);
            println!("mapped nodes: {} ({} ancilla)", m.mapped_nodes, m.ancilla_nodes);
            println!("edges: {} spatial, {} temporal", m.spatial_edges, m.temporal_edges);
            println!("instructions: {}", c.program.len());
            println!("artifacts: {}", run.out_dir.display());
            Ok(())
        }
        Command::Run(a) => {
            let run = a.config()?;
            let s = cmd_run(&run)?;
            print_summary(&s, "report.json", &run)
        }
        Command::Baseline(a) => {
            let run = a.config()?;
            let s = cmd_baseline(&run)?;
            print_summary(&s, "baseline.json", &run)
        }
        Command::Sweep(a) => {
            let path = a.common.config.as_ref().ok_or_else(|| HarnessError::Config("sweep needs --config".into()))?;
            let mut spec = SweepSpec::load(path)?;
            a.common.overrides().apply(&mut spec.base);
            spec.validate()?;
            let rows = cmd_sweep(&spec)?;
            let csv = sweep_csv(&spec, &rows);
            fs::create_dir_all(&spec.base.out_dir)?;
            let out = spec.base.out_dir.join("sweep.csv");
            fs::write(&out, &csv)?;
            print!("{csv}");
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Verify => {
            let summary = verify_with(&VerifyOptions::default());
            for s in &summary.suites {
                println!("{} {}: {}/{} cases", if s.passed() { "PASS" } else { "FAIL" }, s.name, s.cases - s.failed, s.cases);
                for f in &s.failures {
                    println!("  {f}");
                }
            }
            summary.into_result().map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flexperc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
