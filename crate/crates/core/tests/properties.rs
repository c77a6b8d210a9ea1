//! Cross-module invariants over randomized inputs.

use std::collections::BTreeMap;

use flexperc::frontend::BenchmarkName;
use flexperc::harness::{compile, run_trials, BenchmarkSpec, RunConfig};
use flexperc::ir::VNodeKind;
use flexperc::online::{renormalize, renormalize_2d, MergedLayer, PathSearch, RenormConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn layer(width: u32, p: f64, seed: u64) -> MergedLayer {
    MergedLayer::bernoulli(width, width, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn program(name: BenchmarkName, n: usize, seed: u64) -> RunConfig {
    let mut run = RunConfig::benchmark(name, n);
    run.benchmark = Some(BenchmarkSpec { name, n, seed });
    run.virt.width = 3;
    run.virt.height = 3;
    run
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn renormalized_lattices_are_valid(
        seed in any::<u64>(),
        p in 0.55f64..1.0,
        modules in prop::sample::select(vec![1u32, 4, 6, 9]),
        mi in 2.0f64..10.0,
        greedy in any::<bool>(),
    ) {
        let l = layer(72, p, seed);
        let search = if greedy { PathSearch::Greedy } else { PathSearch::Strips };
        let rc = RenormConfig { node_size: 6, module_count: modules, mi_ratio: mi, search };
        let lattice = renormalize(&l, &rc).unwrap();
        prop_assert!(lattice.validate(&l).is_ok(), "{:?}", lattice.validate(&l));
    }

    #[test]
    fn mapping_respects_cap_and_is_deterministic(
        name in prop::sample::select(vec![BenchmarkName::Qaoa, BenchmarkName::Qft, BenchmarkName::Vqe, BenchmarkName::Rca]),
        n in 3usize..7,
        seed in 0u64..100,
    ) {
        let run = program(name, n, seed);
        let c = compile(&run).unwrap();
        prop_assert_eq!(compile(&run).unwrap().ir.to_json(), c.ir.to_json());
        let layer_of: BTreeMap<_, _> = c.ir.layers.iter().enumerate()
            .flat_map(|(l, g)| g.iter().filter_map(move |k| match k { VNodeKind::Mapped(v) => Some((*v, l)), _ => None }))
            .collect();
        let cap = run.virt.mapper_config(run.hardware.photon_lifetime_cycles).cap_count();
        // After a layer's last placement, its nodes still waiting for a
        // neighbour are exactly those with neighbours on later layers.
        for l in 0..c.ir.layers.len() {
            let waiting = layer_of.iter()
                .filter(|(v, lv)| **lv == l && c.pattern.graph.neighbors(**v).any(|u| layer_of[&u] > l))
                .count();
            prop_assert!(waiting <= cap, "layer {l}: {waiting} > {cap}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn completed_runs_respect_photon_lifetime(seed in any::<u64>(), p in 0.75f64..1.0, lifetime in 20u64..200) {
        let mut run = RunConfig::benchmark(BenchmarkName::Qaoa, 4);
        run.hardware.rsl_width = 24;
        run.hardware.rsl_height = 24;
        run.hardware.p_fusion = p;
        run.hardware.seed = seed;
        run.hardware.photon_lifetime_cycles = lifetime;
        run.renorm.node_size = 12;
        run.trials = 2;
        let c = compile(&run).unwrap();
        let (s, _) = run_trials(&run, &c).unwrap();
        for t in &s.per_trial {
            if t.report.success {
                prop_assert!(t.report.delay_peak_cycles <= lifetime);
            }
        }
    }
}

/// One-sided check that `hi` successes are not significantly below `lo`
/// (normal approximation, z = 2.33).
fn not_worse(lo: usize, hi: usize, n: usize) -> bool {
    let (a, b) = (lo as f64 / n as f64, hi as f64 / n as f64);
    let pooled = (a + b) / 2.0;
    let se = (2.0 * pooled * (1.0 - pooled) / n as f64).sqrt();
    b >= a - 2.33 * se
}

#[test]
fn success_is_monotone_in_probability_and_node_size() {
    let n = 200;
    let successes = |p: f64, node: u32| {
        (0..n as u64).filter(|s| renormalize_2d(&layer(48, p, *s), &RenormConfig::new(node)).is_some()).count()
    };
    let ps = [0.5, 0.55, 0.6, 0.65, 0.7];
    let by_p: Vec<usize> = ps.iter().map(|p| successes(*p, 8)).collect();
    for w in by_p.windows(2) {
        assert!(not_worse(w[0], w[1], n), "p sweep {by_p:?}");
    }
    let nodes = [4, 6, 8, 12, 16];
    let by_node: Vec<usize> = nodes.iter().map(|k| successes(0.6, *k)).collect();
    for w in by_node.windows(2) {
        assert!(not_worse(w[0], w[1], n), "node sweep {by_node:?}");
    }
    assert!(by_p[0] < by_p[4] && by_node[0] < by_node[4]);
}
