//! Fixtures shared by the benchmarks.

use flexperc::frontend::BenchmarkName;
use flexperc::harness::RunConfig;
use flexperc::online::{build_merged_layer, HardwareConfig, MergedLayer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// QAOA-`n` on the default 48×48 layer with a single trial.
pub fn qaoa_run(n: usize) -> RunConfig {
    let mut run = RunConfig::benchmark(BenchmarkName::Qaoa, n);
    run.trials = 1;
    run
}

pub fn merged_layer(width: u32, p_fusion: f64, seed: u64) -> MergedLayer {
    let cfg = HardwareConfig::new(width, width, 4, p_fusion);
    build_merged_layer(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).expect("valid hardware").0
}
