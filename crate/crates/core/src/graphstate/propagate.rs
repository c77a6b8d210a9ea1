//! Commuting pending local Cliffords past measurements and fusions.
//!
//! `M_b U = U M_{b'}` with `b' = U† b U`. Words are consumed from the most
//! recently applied generator backwards.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::basis::{BasisError, ByproductWord, MeasurementBasis, Pauli};

#[derive(Debug, Error, PartialEq)]
pub enum PropagationError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("fusion basis {0} is not a pair of commuting independent two-qubit products")]
    InvalidFusion(FusionBasis),
}

/// Adjusted basis for measuring a qubit that still carries `word`.
///
/// The word itself is returned untouched: it stays pending until the end of
/// the computation.
pub fn propagate_through_measurement(
    word: &ByproductWord,
    basis: MeasurementBasis,
) -> Result<(MeasurementBasis, ByproductWord), PropagationError> {
    // Every representable basis lies in a Pauli plane, and quarter turns map
    // planes onto planes, so only malformed input can fail here.
    let mut cur = MeasurementBasis::from_bloch(basis.bloch())?;
    for g in word.gens().iter().rev() {
        cur = cur.conjugated_by(*g);
    }
    Ok((cur, word.clone()))
}

/// A signed two-qubit Pauli product `±P1 ⊗ P2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliPair {
    pub negated: bool,
    pub first: Pauli,
    pub second: Pauli,
}

impl PauliPair {
    pub const fn new(negated: bool, first: Pauli, second: Pauli) -> Self {
        Self { negated, first, second }
    }

    fn commutes_with(&self, other: &PauliPair) -> bool {
        let anti = usize::from(self.first.anticommutes(other.first))
            + usize::from(self.second.anticommutes(other.second));
        anti % 2 == 0
    }

    fn is_identity(&self) -> bool {
        self.first == Pauli::I && self.second == Pauli::I
    }
}

impl fmt::Display for PauliPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}1{}2", if self.negated { "-" } else { "+" }, self.first, self.second)
    }
}

/// The two commuting products jointly measured by a fusion.
///
/// Equality ignores the order of the two products.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FusionBasis {
    pub a: PauliPair,
    pub b: PauliPair,
}

impl FusionBasis {
    /// The type-II fusion `(X1 Z2, Z1 X2)`.
    pub const fn standard() -> Self {
        Self {
            a: PauliPair::new(false, Pauli::X, Pauli::Z),
            b: PauliPair::new(false, Pauli::Z, Pauli::X),
        }
    }

    pub fn new(a: PauliPair, b: PauliPair) -> Result<Self, PropagationError> {
        let f = Self { a, b };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), PropagationError> {
        let independent = !self.a.is_identity()
            && !self.b.is_identity()
            && (self.a.first, self.a.second) != (self.b.first, self.b.second);
        if independent && self.a.commutes_with(&self.b) {
            Ok(())
        } else {
            Err(PropagationError::InvalidFusion(*self))
        }
    }
}

impl PartialEq for FusionBasis {
    fn eq(&self, other: &Self) -> bool {
        (self.a == other.a && self.b == other.b) || (self.a == other.b && self.b == other.a)
    }
}

impl fmt::Display for FusionBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

fn conjugate_pair(p: PauliPair, w1: &ByproductWord, w2: &ByproductWord) -> PauliPair {
    let (n1, q1) = w1.heisenberg(p.first);
    let (n2, q2) = w2.heisenberg(p.second);
    PauliPair::new(p.negated ^ n1 ^ n2, q1, q2)
}

/// Adjusted fusion basis when the two fused qubits carry `w1` and `w2`.
pub fn propagate_through_fusion(
    w1: &ByproductWord,
    w2: &ByproductWord,
    f: FusionBasis,
) -> Result<FusionBasis, PropagationError> {
    f.validate()?;
    let out = FusionBasis {
        a: conjugate_pair(f.a, w1, w2),
        b: conjugate_pair(f.b, w1, w2),
    };
    out.validate()?;
    Ok(out)
}
