//! Small stabilizer-tableau simulator (destabilizer form), used only to
//! validate the graph rewrite rules and basis propagation.

mod check;

use std::collections::BTreeMap;

use rand::Rng;
use thiserror::Error;

use crate::graphstate::{ByproductWord, GraphState, NodeId, Pauli};

pub use check::{
    check_fusion_basis, check_fusion_fail, check_fusion_success, check_local_complement,
    check_measure_z, check_measurement_basis, RewriteRules,
};

pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("oracle supports at most {MAX_QUBITS} qubits, got {0}")]
    TooLarge(usize),
    #[error("qubit {0} is not part of the tableau")]
    UnknownQubit(NodeId),
    #[error("forced outcome contradicts a deterministic measurement")]
    ContradictsDeterministic,
    #[error("tableaux act on different qubits")]
    Mismatch,
    #[error("qubits to discard are still entangled with the rest")]
    NotDecoupled,
    #[error("identity cannot be measured")]
    IdentityMeasurement,
}

/// Signed Pauli row in symplectic form: `(-1)^neg ⊗_q P(x_q, z_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Row {
    x: u32,
    z: u32,
    neg: bool,
}

impl Row {
    fn anticommutes(&self, o: &Row) -> bool {
        ((self.x & o.z).count_ones() + (self.z & o.x).count_ones()) % 2 == 1
    }

    fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// `self * other`. The phase is tracked exactly when the two commute;
    /// otherwise it is meaningless (only used for destabilizer rows).
    fn times(&self, o: &Row) -> Row {
        // Exponent of i accumulated per qubit (Aaronson–Gottesman g-function).
        let mut e: i32 = 0;
        for q in 0..32 {
            let (x1, z1) = ((self.x >> q) & 1, (self.z >> q) & 1);
            let (x2, z2) = ((o.x >> q) & 1, (o.z >> q) & 1);
            let (x2, z2) = (x2 as i32, z2 as i32);
            e += match (x1, z1) {
                (0, 0) => 0,
                (1, 1) => z2 - x2,
                (1, 0) => z2 * (2 * x2 - 1),
                _ => x2 * (1 - 2 * z2),
            };
        }
        let total = 2 * (self.neg as i32) + 2 * (o.neg as i32) + e;
        Row { x: self.x ^ o.x, z: self.z ^ o.z, neg: total.rem_euclid(4) == 2 }
    }
}

/// A signed Pauli product over named qubits, e.g. `+X_1 Z_2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliProduct {
    pub negated: bool,
    pub terms: Vec<(NodeId, Pauli)>,
}

impl PauliProduct {
    pub fn new(negated: bool, terms: Vec<(NodeId, Pauli)>) -> Self {
        Self { negated, terms }
    }

    pub fn single(q: NodeId, p: Pauli) -> Self {
        Self::new(false, vec![(q, p)])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    qubits: Vec<NodeId>,
    /// `destab[i]` pairs with `stab[i]`.
    destab: Vec<Row>,
    stab: Vec<Row>,
}

/// Stabilizer tableau of the graph state of `g` (signs all +).
pub fn tableau_from_graph(g: &GraphState) -> Result<Tableau, OracleError> {
    let qubits: Vec<NodeId> = g.nodes().collect();
    if qubits.len() > MAX_QUBITS {
        return Err(OracleError::TooLarge(qubits.len()));
    }
    let index: BTreeMap<NodeId, usize> = qubits.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let mut stab = Vec::with_capacity(qubits.len());
    let mut destab = Vec::with_capacity(qubits.len());
    for (i, q) in qubits.iter().enumerate() {
        let z = g.neighbors(*q).fold(0u32, |acc, u| acc | 1 << index[&u]);
        stab.push(Row { x: 1 << i, z, neg: false });
        destab.push(Row { x: 0, z: 1 << i, neg: false });
    }
    Ok(Tableau { qubits, destab, stab })
}

impl Tableau {
    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubits(&self) -> &[NodeId] {
        &self.qubits
    }

    fn index(&self, q: NodeId) -> Result<usize, OracleError> {
        self.qubits.iter().position(|v| *v == q).ok_or(OracleError::UnknownQubit(q))
    }

    fn row_of(&self, p: &PauliProduct) -> Result<Row, OracleError> {
        let mut r = Row { x: 0, z: 0, neg: p.negated };
        for &(q, pauli) in &p.terms {
            let i = self.index(q)?;
            // Multiply single-qubit factors so repeated qubits compose correctly.
            let (x, z) = pauli.bits();
            let f = Row { x: (x as u32) << i, z: (z as u32) << i, neg: false };
            r = r.times(&f);
        }
        Ok(r)
    }

    /// Measures `p`. Outcome bit 0 means eigenvalue +1 of `p`. Returns the
    /// post-measurement tableau, the outcome and whether it was determined.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &self,
        p: &PauliProduct,
        forced: Option<bool>,
        rng: &mut R,
    ) -> Result<(Tableau, bool, bool), OracleError> {
        let row = self.row_of(p)?;
        if row.is_identity() {
            return Err(OracleError::IdentityMeasurement);
        }
        let mut t = self.clone();
        match t.stab.iter().position(|s| s.anticommutes(&row)) {
            Some(k) => {
                let outcome = forced.unwrap_or_else(|| rng.random());
                let pivot = t.stab[k];
                for i in 0..t.stab.len() {
                    if i != k && t.stab[i].anticommutes(&row) {
                        t.stab[i] = t.stab[i].times(&pivot);
                    }
                    if i != k && t.destab[i].anticommutes(&row) {
                        t.destab[i] = t.destab[i].times(&pivot);
                    }
                }
                t.destab[k] = pivot;
                t.stab[k] = Row { neg: row.neg ^ outcome, ..row };
                Ok((t, outcome, false))
            }
            None => {
                let mut acc = Row { x: 0, z: 0, neg: false };
                for i in 0..t.stab.len() {
                    if t.destab[i].anticommutes(&row) {
                        acc = acc.times(&t.stab[i]);
                    }
                }
                debug_assert_eq!((acc.x, acc.z), (row.x, row.z));
                let outcome = acc.neg != row.neg;
                if forced.is_some_and(|f| f != outcome) {
                    return Err(OracleError::ContradictsDeterministic);
                }
                Ok((t, outcome, true))
            }
        }
    }

    /// Applies the unitary of `w` (in application order) to qubit `q`.
    pub fn apply_local_clifford(&self, w: &ByproductWord, q: NodeId) -> Result<Tableau, OracleError> {
        let i = self.index(q)?;
        let mut t = self.clone();
        for g in w.gens() {
            for r in t.stab.iter_mut().chain(t.destab.iter_mut()) {
                let p = Pauli::from_bits((r.x >> i) & 1 == 1, (r.z >> i) & 1 == 1);
                let (neg, img) = g.conjugate(p);
                let (x, z) = img.bits();
                r.x = (r.x & !(1 << i)) | ((x as u32) << i);
                r.z = (r.z & !(1 << i)) | ((z as u32) << i);
                r.neg ^= neg;
            }
        }
        Ok(t)
    }

    /// Applies every byproduct word recorded on `g` to the matching qubit.
    pub fn apply_byproducts(&self, g: &GraphState) -> Result<Tableau, OracleError> {
        let mut t = self.clone();
        for (q, w) in g.byproducts() {
            t = t.apply_local_clifford(w, q)?;
        }
        Ok(t)
    }

    /// Traces out `discard`, which must be in a pure state decoupled from
    /// the remaining qubits (as after Pauli measurements on them).
    pub fn reduce(&self, discard: &[NodeId]) -> Result<Tableau, OracleError> {
        let mut mask = 0u32;
        for q in discard {
            mask |= 1 << self.index(*q)?;
        }
        let mut rows = self.stab.clone();
        // Eliminate every discarded column (x and z parts) by row operations.
        let mut used = vec![false; rows.len()];
        for bit in 0..32 {
            if mask >> bit & 1 == 0 {
                continue;
            }
            for part in [true, false] {
                let hit = |r: &Row| if part { r.x >> bit & 1 == 1 } else { r.z >> bit & 1 == 1 };
                let Some(p) = (0..rows.len()).find(|&i| !used[i] && hit(&rows[i])) else {
                    continue;
                };
                used[p] = true;
                let pivot = rows[p];
                for i in 0..rows.len() {
                    if i != p && hit(&rows[i]) {
                        rows[i] = rows[i].times(&pivot);
                    }
                }
            }
        }
        let keep: Vec<usize> = (0..self.qubits.len()).filter(|i| mask >> i & 1 == 0).collect();
        let kept: Vec<Row> = rows
            .iter()
            .zip(&used)
            .filter(|(_, u)| !**u)
            .map(|(r, _)| compress(r, &keep))
            .collect();
        if kept.len() != keep.len() {
            return Err(OracleError::NotDecoupled);
        }
        let qubits: Vec<NodeId> = keep.iter().map(|&i| self.qubits[i]).collect();
        from_stabilizers(qubits, kept)
    }

    fn canonical(&self) -> Vec<Row> {
        let mut rows = self.stab.clone();
        let n = self.qubits.len();
        let mut r = 0;
        for col in 0..2 * n {
            let bit = |row: &Row| if col < n { row.x >> col & 1 } else { row.z >> (col - n) & 1 } == 1;
            let Some(p) = (r..rows.len()).find(|&i| bit(&rows[i])) else {
                continue;
            };
            rows.swap(r, p);
            let pivot = rows[r];
            for i in 0..rows.len() {
                if i != r && bit(&rows[i]) {
                    rows[i] = rows[i].times(&pivot);
                }
            }
            r += 1;
        }
        rows
    }

    fn aligned(&self, other: &Tableau) -> Result<Tableau, OracleError> {
        if self.qubits.len() != other.qubits.len() {
            return Err(OracleError::Mismatch);
        }
        // Reorder `other` onto this tableau's qubit order.
        let perm: Vec<usize> = self
            .qubits
            .iter()
            .map(|q| other.index(*q).map_err(|_| OracleError::Mismatch))
            .collect::<Result<_, _>>()?;
        let map = |r: &Row| {
            let (mut x, mut z) = (0, 0);
            for (i, &j) in perm.iter().enumerate() {
                x |= (r.x >> j & 1) << i;
                z |= (r.z >> j & 1) << i;
            }
            Row { x, z, neg: r.neg }
        };
        Ok(Tableau {
            qubits: self.qubits.clone(),
            destab: other.destab.iter().map(map).collect(),
            stab: other.stab.iter().map(map).collect(),
        })
    }

    /// True iff the signed stabilizer groups coincide.
    pub fn states_equal(&self, other: &Tableau) -> Result<bool, OracleError> {
        let o = self.aligned(other)?;
        Ok(self.canonical() == o.canonical())
    }

    /// True iff the states differ at most by a Pauli operator.
    pub fn states_equal_up_to_pauli(&self, other: &Tableau) -> Result<bool, OracleError> {
        let o = self.aligned(other)?;
        let strip = |v: Vec<Row>| v.into_iter().map(|r| (r.x, r.z)).collect::<Vec<_>>();
        Ok(strip(self.canonical()) == strip(o.canonical()))
    }

    /// Stabilizer generators as `(negated, paulis)` in qubit order (for tests).
    pub fn stabilizers(&self) -> Vec<(bool, Vec<Pauli>)> {
        self.stab
            .iter()
            .map(|r| {
                let ps = (0..self.qubits.len())
                    .map(|i| Pauli::from_bits(r.x >> i & 1 == 1, r.z >> i & 1 == 1))
                    .collect();
                (r.neg, ps)
            })
            .collect()
    }

    #[cfg(test)]
    fn check_invariants(&self) -> bool {
        let n = self.stab.len();
        (0..n).all(|i| {
            (0..n).all(|j| {
                !self.stab[i].anticommutes(&self.stab[j])
                    && !self.destab[i].anticommutes(&self.destab[j])
                    && self.destab[i].anticommutes(&self.stab[j]) == (i == j)
            })
        })
    }
}

pub fn tableau_states_equal(a: &Tableau, b: &Tableau) -> Result<bool, OracleError> {
    a.states_equal(b)
}

fn compress(r: &Row, keep: &[usize]) -> Row {
    let (mut x, mut z) = (0, 0);
    for (i, &j) in keep.iter().enumerate() {
        x |= (r.x >> j & 1) << i;
        z |= (r.z >> j & 1) << i;
    }
    Row { x, z, neg: r.neg }
}

/// Builds a full tableau from independent commuting stabilizers by solving
/// for a matching set of destabilizers over GF(2).
fn from_stabilizers(qubits: Vec<NodeId>, stab: Vec<Row>) -> Result<Tableau, OracleError> {
    let n = qubits.len();
    let mut destab: Vec<Row> = Vec::with_capacity(n);
    for i in 0..n {
        // Unknown d = (dx, dz) as a 2n-bit vector; <d, s> = dx·s.z + dz·s.x.
        let mut eqs: Vec<(u64, bool)> = Vec::new();
        let coeff = |r: &Row| (r.z as u64) | ((r.x as u64) << n);
        for (j, s) in stab.iter().enumerate() {
            eqs.push((coeff(s), i == j));
        }
        for d in &destab {
            eqs.push((coeff(d), false));
        }
        let sol = solve_gf2(eqs, 2 * n).ok_or(OracleError::NotDecoupled)?;
        let mask = (1u64 << n) - 1;
        destab.push(Row { x: (sol & mask) as u32, z: ((sol >> n) & mask) as u32, neg: false });
    }
    Ok(Tableau { qubits, destab, stab })
}

fn solve_gf2(mut eqs: Vec<(u64, bool)>, vars: usize) -> Option<u64> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..vars {
        let Some(p) = (r..eqs.len()).find(|&i| eqs[i].0 >> col & 1 == 1) else {
            continue;
        };
        eqs.swap(r, p);
        let pivot = eqs[r];
        for (i, e) in eqs.iter_mut().enumerate() {
            if i != r && e.0 >> col & 1 == 1 {
                e.0 ^= pivot.0;
                e.1 ^= pivot.1;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if eqs[r..].iter().any(|e| e.1) {
        return None;
    }
    let mut sol = 0u64;
    for (k, &col) in pivots.iter().enumerate() {
        if eqs[k].1 {
            sol |= 1 << col;
        }
    }
    Some(sol)
}
