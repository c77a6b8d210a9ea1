//! Benchmark circuit generators, already decomposed into `{J, CZ}`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::circuit::{gates, Circuit};

/// Identifier of the generator used for benchmark instances.
pub const BENCHMARK_RNG: &str = "chacha8";

/// Depth/variant defaults recorded alongside reports.
pub const BENCHMARK_DEFAULTS: &str =
    "qaoa p=1; vqe rotation+full-CZ+rotation; rca cuccaro (carry-out iff n even); qft with swaps";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkName {
    Qaoa,
    Qft,
    Rca,
    Vqe,
}

impl fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchmarkName::Qaoa => "qaoa",
            BenchmarkName::Qft => "qft",
            BenchmarkName::Rca => "rca",
            BenchmarkName::Vqe => "vqe",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchmarkError {
    #[error("unsupported benchmark `{0}` (expected qaoa, qft, rca or vqe)")]
    Unsupported(String),
    #[error("benchmarks need at least {min} qubits, got {n}")]
    TooFewQubits { n: usize, min: usize },
}

impl FromStr for BenchmarkName {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qaoa" => Ok(BenchmarkName::Qaoa),
            "qft" => Ok(BenchmarkName::Qft),
            "rca" => Ok(BenchmarkName::Rca),
            "vqe" => Ok(BenchmarkName::Vqe),
            _ => Err(BenchmarkError::Unsupported(s.to_string())),
        }
    }
}

pub fn build_benchmark(name: BenchmarkName, n: usize, seed: u64) -> Result<Circuit, BenchmarkError> {
    let min = if name == BenchmarkName::Rca { 3 } else { 2 };
    if n < min {
        return Err(BenchmarkError::TooFewQubits { n, min });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = match name {
        BenchmarkName::Qaoa => qaoa(n, &mut rng),
        BenchmarkName::Qft => qft(n),
        BenchmarkName::Rca => rca(n),
        BenchmarkName::Vqe => vqe(n, &mut rng),
    };
    Ok(c)
}

/// The random problem graph behind a QAOA instance: half of all vertex
/// pairs (rounded down), chosen uniformly.
pub fn qaoa_edges(n: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let k = pairs.len() / 2;
    pairs.shuffle(rng);
    let mut chosen: Vec<_> = pairs.into_iter().take(k).collect();
    chosen.sort();
    chosen
}

fn qaoa(n: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let edges = qaoa_edges(n, rng);
    let gamma: f64 = rng.random_range(0.0..PI);
    let beta: f64 = rng.random_range(0.0..PI);
    let mut c = Circuit::new(n);
    for w in 0..n {
        gates::h(&mut c, w).unwrap();
    }
    for &(u, v) in &edges {
        gates::cnot(&mut c, u, v).unwrap();
        gates::phase(&mut c, v, 2.0 * gamma).unwrap();
        gates::cnot(&mut c, u, v).unwrap();
    }
    for w in 0..n {
        gates::rx(&mut c, w, 2.0 * beta).unwrap();
    }
    c
}

/// QFT with qubit 0 as the most significant bit, including final swaps.
fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for j in 0..n {
        gates::h(&mut c, j).unwrap();
        for k in j + 1..n {
            gates::cphase(&mut c, k, j, PI / f64::from(1u32 << (k - j))).unwrap();
        }
    }
    for j in 0..n / 2 {
        gates::swap(&mut c, j, n - 1 - j).unwrap();
    }
    c
}

/// Wire layout of the ripple-carry adder for `n` qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdderLayout {
    pub carry_in: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub carry_out: Option<usize>,
}

pub fn rca_layout(n: usize) -> AdderLayout {
    let bits = if n.is_multiple_of(2) { (n - 2) / 2 } else { (n - 1) / 2 };
    AdderLayout {
        carry_in: 0,
        b: (0..bits).map(|i| 1 + 2 * i).collect(),
        a: (0..bits).map(|i| 2 + 2 * i).collect(),
        carry_out: n.is_multiple_of(2).then_some(n - 1),
    }
}

/// Cuccaro ripple-carry adder: `b ← a + b`, carry into the top wire when `n`
/// is even. Unused for odd leftovers.
fn rca(n: usize) -> Circuit {
    let l = rca_layout(n);
    let mut c = Circuit::new(n);
    let k = l.a.len();
    let carry = |i: usize| if i == 0 { l.carry_in } else { l.a[i - 1] };
    let maj = |c: &mut Circuit, x: usize, y: usize, z: usize| {
        gates::cnot(c, z, y).unwrap();
        gates::cnot(c, z, x).unwrap();
        gates::toffoli(c, x, y, z).unwrap();
    };
    let uma = |c: &mut Circuit, x: usize, y: usize, z: usize| {
        gates::toffoli(c, x, y, z).unwrap();
        gates::cnot(c, z, x).unwrap();
        gates::cnot(c, x, y).unwrap();
    };
    for i in 0..k {
        maj(&mut c, carry(i), l.b[i], l.a[i]);
    }
    if let Some(z) = l.carry_out {
        gates::cnot(&mut c, l.a[k - 1], z).unwrap();
    }
    for i in (0..k).rev() {
        uma(&mut c, carry(i), l.b[i], l.a[i]);
    }
    c
}

fn vqe(n: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new(n);
    let rotations = |c: &mut Circuit, rng: &mut ChaCha8Rng| {
        for w in 0..n {
            c.j(w, rng.random_range(0.0..TAU)).unwrap();
            c.j(w, rng.random_range(0.0..TAU)).unwrap();
        }
    };
    rotations(&mut c, rng);
    for a in 0..n {
        for b in a + 1..n {
            c.cz(a, b).unwrap();
        }
    }
    rotations(&mut c, rng);
    c
}
