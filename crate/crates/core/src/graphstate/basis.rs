//! Single-qubit Paulis, local Clifford byproducts and measurement bases.
//!
//! A measurement basis is stored in its Pauli-plane form
//! `sign * (cos(angle) * P1 + sin(angle) * P2)` but always canonicalized
//! through its Bloch vector, so two values denoting the same observable
//! compare equal.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const ANGLE_EPS: f64 = 1e-9;
const SNAP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Symplectic (x, z) bits.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    fn axis(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }

    fn from_axis(axis: usize) -> Self {
        [Pauli::X, Pauli::Y, Pauli::Z][axis]
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// One of the four quarter-turn generators `exp(±iπ/4 Z)`, `exp(±iπ/4 X)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalClifford {
    ZPlus,
    ZMinus,
    XPlus,
    XMinus,
}

impl LocalClifford {
    pub const ALL: [LocalClifford; 4] = [
        LocalClifford::ZPlus,
        LocalClifford::ZMinus,
        LocalClifford::XPlus,
        LocalClifford::XMinus,
    ];

    pub fn inverse(self) -> Self {
        match self {
            LocalClifford::ZPlus => LocalClifford::ZMinus,
            LocalClifford::ZMinus => LocalClifford::ZPlus,
            LocalClifford::XPlus => LocalClifford::XMinus,
            LocalClifford::XMinus => LocalClifford::XPlus,
        }
    }

    /// Heisenberg-picture image `U† P U` of a Pauli, as `(negated, pauli)`.
    ///
    /// For `U = exp(iπ/4 Z)`: X → Y, Y → −X. For `U = exp(iπ/4 X)`:
    /// Z → −Y, Y → Z. The minus generators are the inverses.
    pub fn heisenberg(self, p: Pauli) -> (bool, Pauli) {
        use LocalClifford::*;
        use Pauli::*;
        match (self, p) {
            (_, I) => (false, I),
            (ZPlus, X) => (false, Y),
            (ZPlus, Y) => (true, X),
            (ZMinus, X) => (true, Y),
            (ZMinus, Y) => (false, X),
            (ZPlus | ZMinus, Z) => (false, Z),
            (XPlus, Z) => (true, Y),
            (XPlus, Y) => (false, Z),
            (XMinus, Z) => (false, Y),
            (XMinus, Y) => (true, Z),
            (XPlus | XMinus, X) => (false, X),
        }
    }

    /// Schrödinger-picture image `U P U†` (state conjugation).
    pub fn conjugate(self, p: Pauli) -> (bool, Pauli) {
        self.inverse().heisenberg(p)
    }

    fn rotate_bloch(self, v: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = v;
        match self {
            LocalClifford::ZPlus => [-y, x, z],
            LocalClifford::ZMinus => [y, -x, z],
            LocalClifford::XPlus => [x, -z, y],
            LocalClifford::XMinus => [x, z, -y],
        }
    }
}

impl fmt::Display for LocalClifford {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LocalClifford::ZPlus => "Z+",
            LocalClifford::ZMinus => "Z-",
            LocalClifford::XPlus => "X+",
            LocalClifford::XMinus => "X-",
        };
        f.write_str(s)
    }
}

impl FromStr for LocalClifford {
    type Err = BasisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "Z+" => LocalClifford::ZPlus,
            "Z-" => LocalClifford::ZMinus,
            "X+" => LocalClifford::XPlus,
            "X-" => LocalClifford::XMinus,
            _ => return Err(BasisError::Parse(s.to_string())),
        })
    }
}

/// Pending local Clifford operators on one qubit, in application order:
/// `gens[0]` acted on the state first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ByproductWord {
    gens: Vec<LocalClifford>,
}

impl ByproductWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_gens(gens: Vec<LocalClifford>) -> Self {
        Self { gens }
    }

    pub fn gens(&self) -> &[LocalClifford] {
        &self.gens
    }

    pub fn is_identity(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// Record an operator applied after everything already in the word.
    pub fn push_after(&mut self, g: LocalClifford) {
        self.gens.push(g);
    }

    /// Record an operator that acts on the state before the existing word.
    pub fn push_before(&mut self, g: LocalClifford) {
        self.gens.insert(0, g);
    }

    pub fn inverse(&self) -> Self {
        Self {
            gens: self.gens.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    /// Heisenberg image of a single Pauli under the whole word.
    pub fn heisenberg(&self, p: Pauli) -> (bool, Pauli) {
        let mut neg = false;
        let mut cur = p;
        // U = g_k ... g_1, so U† P U peels g_k first.
        for g in self.gens.iter().rev() {
            let (n, q) = g.heisenberg(cur);
            neg ^= n;
            cur = q;
        }
        (neg, cur)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("basis plane needs two distinct non-identity Paulis, got ({0}, {1})")]
    BadPlane(Pauli, Pauli),
    #[error("basis angle must be finite, got {0}")]
    BadAngle(f64),
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
    #[error("observable {0:?} lies in no Pauli plane; outside the closed rewrite set")]
    OutsideClosedSet([f64; 3]),
    #[error("cannot parse basis `{0}`")]
    Parse(String),
}

/// Canonical Pauli planes; the angle is measured from the first axis
/// towards the second.
const PLANES: [(Pauli, Pauli); 3] = [(Pauli::X, Pauli::Y), (Pauli::Y, Pauli::Z), (Pauli::Z, Pauli::X)];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeasurementBasis {
    plane: (Pauli, Pauli),
    angle: f64,
    sign: i8,
}

impl MeasurementBasis {
    pub fn new(plane: (Pauli, Pauli), angle: f64, sign: i8) -> Result<Self, BasisError> {
        let (p1, p2) = plane;
        if p1 == p2 || p1 == Pauli::I || p2 == Pauli::I {
            return Err(BasisError::BadPlane(p1, p2));
        }
        if !angle.is_finite() {
            return Err(BasisError::BadAngle(angle));
        }
        if sign != 1 && sign != -1 {
            return Err(BasisError::BadSign(sign));
        }
        let s = f64::from(sign);
        let mut v = [0.0; 3];
        v[p1.axis().unwrap()] += s * angle.cos();
        v[p2.axis().unwrap()] += s * angle.sin();
        Self::from_bloch(v)
    }

    pub fn z() -> Self {
        Self { plane: (Pauli::Z, Pauli::X), angle: 0.0, sign: 1 }
    }

    pub fn x() -> Self {
        Self { plane: (Pauli::X, Pauli::Y), angle: 0.0, sign: 1 }
    }

    pub fn y() -> Self {
        Self { plane: (Pauli::X, Pauli::Y), angle: FRAC_PI_2, sign: 1 }
    }

    /// Equatorial measurement `cos(a) X + sin(a) Y`.
    pub fn equatorial(alpha: f64) -> Self {
        Self::new((Pauli::X, Pauli::Y), alpha, 1).expect("equatorial angle must be finite")
    }

    pub fn plane(&self) -> (Pauli, Pauli) {
        self.plane
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Unit Bloch vector of the measured observable.
    pub fn bloch(&self) -> [f64; 3] {
        let s = f64::from(self.sign);
        let mut v = [0.0; 3];
        v[self.plane.0.axis().unwrap()] += s * self.angle.cos();
        v[self.plane.1.axis().unwrap()] += s * self.angle.sin();
        v
    }

    pub fn from_bloch(v: [f64; 3]) -> Result<Self, BasisError> {
        let snapped = v.map(|c| {
            if c.abs() < SNAP_EPS {
                0.0
            } else if (c.abs() - 1.0).abs() < SNAP_EPS {
                c.signum()
            } else {
                c
            }
        });
        let zeros = snapped.iter().filter(|c| **c == 0.0).count();
        match zeros {
            2 => {
                let axis = snapped.iter().position(|c| *c != 0.0).unwrap();
                let neg = snapped[axis] < 0.0;
                let base_angle = match Pauli::from_axis(axis) {
                    Pauli::X => 0.0,
                    Pauli::Y => FRAC_PI_2,
                    _ => 0.0,
                };
                let plane = if axis == 2 { (Pauli::Z, Pauli::X) } else { (Pauli::X, Pauli::Y) };
                let angle = if neg { base_angle + PI } else { base_angle };
                Ok(Self { plane, angle, sign: 1 })
            }
            1 => {
                let zero_axis = snapped.iter().position(|c| *c == 0.0).unwrap();
                // (X,Y) has Z zero, (Y,Z) has X zero, (Z,X) has Y zero.
                let plane = match zero_axis {
                    2 => PLANES[0],
                    0 => PLANES[1],
                    _ => PLANES[2],
                };
                let c = snapped[plane.0.axis().unwrap()];
                let s = snapped[plane.1.axis().unwrap()];
                let angle = s.atan2(c).rem_euclid(TAU);
                Ok(Self { plane, angle, sign: 1 })
            }
            _ => Err(BasisError::OutsideClosedSet(v)),
        }
    }

    /// The Pauli observable (with sign) when this basis is a Pauli axis.
    pub fn as_pauli(&self) -> Option<(bool, Pauli)> {
        let v = self.bloch();
        for (axis, c) in v.iter().enumerate() {
            if (c.abs() - 1.0).abs() < ANGLE_EPS {
                return Some((*c < 0.0, Pauli::from_axis(axis)));
            }
        }
        None
    }

    pub fn is_z(&self) -> bool {
        self.as_pauli() == Some((false, Pauli::Z))
    }

    /// Change of basis `U† B U` under one generator.
    pub fn conjugated_by(&self, g: LocalClifford) -> Self {
        Self::from_bloch(g.rotate_bloch(self.bloch())).expect("quarter turns preserve Pauli planes")
    }
}

impl PartialEq for MeasurementBasis {
    fn eq(&self, other: &Self) -> bool {
        let a = self.bloch();
        let b = other.bloch();
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() < ANGLE_EPS)
    }
}

impl fmt::Display for MeasurementBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((neg, p)) = self.as_pauli() {
            return write!(f, "{}{p}", if neg { "-" } else { "" });
        }
        write!(f, "{}{}:{:.12}", self.plane.0, self.plane.1, self.angle)
    }
}

impl FromStr for MeasurementBasis {
    type Err = BasisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || BasisError::Parse(s.to_string());
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let sign = if neg { -1 } else { 1 };
        let basis = match body {
            "X" => Self::new((Pauli::X, Pauli::Y), 0.0, sign)?,
            "Y" => Self::new((Pauli::X, Pauli::Y), FRAC_PI_2, sign)?,
            "Z" => Self::new((Pauli::Z, Pauli::X), 0.0, sign)?,
            _ => {
                let (plane, angle) = body.split_once(':').ok_or_else(bad)?;
                let mut chars = plane.chars();
                let p1 = parse_pauli(chars.next().ok_or_else(bad)?).ok_or_else(bad)?;
                let p2 = parse_pauli(chars.next().ok_or_else(bad)?).ok_or_else(bad)?;
                if chars.next().is_some() {
                    return Err(bad());
                }
                let angle: f64 = angle.trim().parse().map_err(|_| bad())?;
                Self::new((p1, p2), angle, sign)?
            }
        };
        Ok(basis)
    }
}

fn parse_pauli(c: char) -> Option<Pauli> {
    match c {
        'X' => Some(Pauli::X),
        'Y' => Some(Pauli::Y),
        'Z' => Some(Pauli::Z),
        _ => None,
    }
}
