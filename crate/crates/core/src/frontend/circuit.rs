use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `J(angle) = H · diag(1, e^{i·angle})` on `wire`.
    J { wire: usize, angle: f64 },
    Cz { a: usize, b: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("wire {wire} out of range for {qubits} qubits")]
    WireOutOfRange { wire: usize, qubits: usize },
    #[error("CZ needs two distinct wires, got {0} twice")]
    SameWire(usize),
    #[error("angle {0} is not finite")]
    BadAngle(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Self { qubits, gates: Vec::new() }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn j_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::J { .. })).count()
    }

    pub fn cz_count(&self) -> usize {
        self.gates.len() - self.j_count()
    }

    fn check_wire(&self, w: usize) -> Result<(), CircuitError> {
        if w < self.qubits {
            Ok(())
        } else {
            Err(CircuitError::WireOutOfRange { wire: w, qubits: self.qubits })
        }
    }

    /// Appends `J(angle)`; the angle is normalized into `[0, 2π)`.
    pub fn j(&mut self, wire: usize, angle: f64) -> Result<&mut Self, CircuitError> {
        self.check_wire(wire)?;
        if !angle.is_finite() {
            return Err(CircuitError::BadAngle(angle));
        }
        let mut angle = angle.rem_euclid(TAU);
        if angle >= TAU {
            angle = 0.0;
        }
        self.gates.push(Gate::J { wire, angle });
        Ok(self)
    }

    pub fn cz(&mut self, a: usize, b: usize) -> Result<&mut Self, CircuitError> {
        self.check_wire(a)?;
        self.check_wire(b)?;
        if a == b {
            return Err(CircuitError::SameWire(a));
        }
        self.gates.push(Gate::Cz { a, b });
        Ok(self)
    }

    pub fn push(&mut self, g: Gate) -> Result<&mut Self, CircuitError> {
        match g {
            Gate::J { wire, angle } => self.j(wire, angle),
            Gate::Cz { a, b } => self.cz(a, b),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("qubits {}\n", self.qubits);
        for g in &self.gates {
            match g {
                Gate::J { wire, angle } => writeln!(s, "J {wire} {angle:?}").unwrap(),
                Gate::Cz { a, b } => writeln!(s, "CZ {a} {b}").unwrap(),
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CircuitError> {
        let perr = |line: usize, m: &str| CircuitError::Parse { line, message: m.to_string() };
        let mut circuit: Option<Circuit> = None;
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            let num = |t: &str| t.parse::<usize>().map_err(|_| perr(ln, &format!("bad integer `{t}`")));
            match (toks[0], circuit.as_mut()) {
                ("qubits", None) if toks.len() == 2 => circuit = Some(Circuit::new(num(toks[1])?)),
                ("qubits", _) => return Err(perr(ln, "malformed or repeated `qubits` header")),
                (_, None) => return Err(perr(ln, "missing `qubits <n>` header")),
                ("J", Some(c)) if toks.len() == 3 => {
                    let angle: f64 =
                        toks[2].parse().map_err(|_| perr(ln, &format!("bad angle `{}`", toks[2])))?;
                    c.j(num(toks[1])?, angle).map_err(|e| perr(ln, &e.to_string()))?;
                }
                ("CZ", Some(c)) if toks.len() == 3 => {
                    c.cz(num(toks[1])?, num(toks[2])?).map_err(|e| perr(ln, &e.to_string()))?;
                }
                (other, Some(_)) => return Err(perr(ln, &format!("unrecognized gate line `{other}`"))),
            }
        }
        circuit.ok_or_else(|| perr(1, "missing `qubits <n>` header"))
    }

    /// Splits long runs of CZs on one wire segment by inserting `J(0) J(0)`
    /// (identity) so that no pattern node has more than `max_cz` CZ edges.
    /// Needed because a node on the lattice has bounded degree.
    pub fn limit_cz_fanout(&self, max_cz: usize) -> Circuit {
        let max_cz = max_cz.max(1);
        let mut out = Circuit::new(self.qubits);
        let mut load = vec![0usize; self.qubits];
        for g in &self.gates {
            match *g {
                Gate::J { wire, .. } => {
                    load[wire] = 0;
                    out.gates.push(*g);
                }
                Gate::Cz { a, b } => {
                    for w in [a, b] {
                        if load[w] >= max_cz {
                            out.gates.push(Gate::J { wire: w, angle: 0.0 });
                            out.gates.push(Gate::J { wire: w, angle: 0.0 });
                            load[w] = 0;
                        }
                        load[w] += 1;
                    }
                    out.gates.push(*g);
                }
            }
        }
        out
    }
}

/// Standard gates expressed in `{J, CZ}`. All identities hold up to a
/// global phase.
pub mod gates {
    use super::{Circuit, CircuitError};
    use std::f64::consts::FRAC_PI_4;

    type R = Result<(), CircuitError>;

    pub fn h(c: &mut Circuit, w: usize) -> R {
        c.j(w, 0.0).map(|_| ())
    }

    /// `diag(1, e^{iθ})` (also `Rz(θ)` up to phase).
    pub fn phase(c: &mut Circuit, w: usize, theta: f64) -> R {
        c.j(w, theta)?.j(w, 0.0).map(|_| ())
    }

    /// `Rx(θ) = H Rz(θ) H`.
    pub fn rx(c: &mut Circuit, w: usize, theta: f64) -> R {
        c.j(w, 0.0)?.j(w, theta).map(|_| ())
    }

    pub fn x(c: &mut Circuit, w: usize) -> R {
        rx(c, w, std::f64::consts::PI)
    }

    pub fn cnot(c: &mut Circuit, ctrl: usize, tgt: usize) -> R {
        c.j(tgt, 0.0)?.cz(ctrl, tgt)?.j(tgt, 0.0).map(|_| ())
    }

    /// Controlled `diag(1, e^{iθ})`.
    pub fn cphase(c: &mut Circuit, ctrl: usize, tgt: usize, theta: f64) -> R {
        phase(c, ctrl, theta / 2.0)?;
        cnot(c, ctrl, tgt)?;
        phase(c, tgt, -theta / 2.0)?;
        cnot(c, ctrl, tgt)?;
        phase(c, tgt, theta / 2.0)
    }

    pub fn swap(c: &mut Circuit, a: usize, b: usize) -> R {
        cnot(c, a, b)?;
        cnot(c, b, a)?;
        cnot(c, a, b)
    }

    /// Toffoli via the standard seven-T decomposition.
    pub fn toffoli(c: &mut Circuit, a: usize, b: usize, t: usize) -> R {
        let tg = |c: &mut Circuit, w: usize| phase(c, w, FRAC_PI_4);
        let tdg = |c: &mut Circuit, w: usize| phase(c, w, -FRAC_PI_4);
        h(c, t)?;
        cnot(c, b, t)?;
        tdg(c, t)?;
        cnot(c, a, t)?;
        tg(c, t)?;
        cnot(c, b, t)?;
        tdg(c, t)?;
        cnot(c, a, t)?;
        tg(c, b)?;
        tg(c, t)?;
        h(c, t)?;
        cnot(c, a, b)?;
        tg(c, a)?;
        tdg(c, b)?;
        cnot(c, a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut c = Circuit::new(2);
        c.j(0, 0.25).unwrap().cz(0, 1).unwrap().j(1, -1.0).unwrap();
        let back = Circuit::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert!(matches!(back.gates()[2], Gate::J { angle, .. } if (angle - (TAU - 1.0)).abs() < 1e-15));
    }

    #[test]
    fn parse_errors() {
        assert!(Circuit::parse("J 0 1.0\n").is_err());
        assert!(matches!(
            Circuit::parse("qubits 1\nCZ 0 0\n"),
            Err(CircuitError::Parse { line: 2, .. })
        ));
        assert!(Circuit::parse("qubits 2\nJ 2 0.0\n").is_err());
        assert_eq!(Circuit::parse("qubits 0\n").unwrap().qubits(), 0);
    }

    #[test]
    fn fanout_limit() {
        let mut c = Circuit::new(4);
        for t in 1..4 {
            c.cz(0, t).unwrap();
        }
        let d = c.limit_cz_fanout(2);
        assert_eq!(d.cz_count(), 3);
        assert_eq!(d.j_count(), 2);
    }
}
