//! Time-ordered circuits over named qubits.
//!
//! A [`Circuit`] is the exchange format between the code builders, the
//! simulation engines, the noise compiler and the fault enumerator. Each
//! instruction carries the index of the time slot it occupies. Gate, idle and
//! measurement instructions occupy their qubits for the slot; `NOISE`
//! annotations attach to the instruction that precedes them and are exempt
//! from the occupancy rule.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Qubit = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    /// The diagonal axis (X+Y)/√2 of the random-circuit gate pool.
    XY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Angle {
    HalfPi,
    MinusHalfPi,
    Pi,
}

impl Angle {
    pub fn radians(self) -> f64 {
        match self {
            Angle::HalfPi => std::f64::consts::FRAC_PI_2,
            Angle::MinusHalfPi => -std::f64::consts::FRAC_PI_2,
            Angle::Pi => std::f64::consts::PI,
        }
    }
}

/// Two-qubit gate layer of the surface-code cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    A,
    B,
    C,
    D,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Pattern::A, Pattern::B, Pattern::C, Pattern::D];

    pub fn as_char(self) -> char {
        match self {
            Pattern::A => 'A',
            Pattern::B => 'B',
            Pattern::C => 'C',
            Pattern::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Pattern> {
        match c.to_ascii_uppercase() {
            'A' => Some(Pattern::A),
            'B' => Some(Pattern::B),
            'C' => Some(Pattern::C),
            'D' => Some(Pattern::D),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Rot { qubit: Qubit, axis: Axis, angle: Angle },
    Cz { a: Qubit, b: Qubit, pattern: Option<Pattern> },
    Idle { qubit: Qubit, duration_ns: f64 },
    MeasureZ { qubit: Qubit, slot: usize },
    Noise { channel: usize, qubits: Vec<Qubit> },
}

impl Instruction {
    pub fn qubits(&self) -> Vec<Qubit> {
        match self {
            Instruction::Rot { qubit, .. }
            | Instruction::Idle { qubit, .. }
            | Instruction::MeasureZ { qubit, .. } => vec![*qubit],
            Instruction::Cz { a, b, .. } => vec![*a, *b],
            Instruction::Noise { qubits, .. } => qubits.clone(),
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, Instruction::Rot { axis: Axis::XY, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timed {
    pub t: u32,
    pub op: Instruction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    names: Vec<String>,
    ops: Vec<Timed>,
    n_measurements: usize,
}

impl Circuit {
    pub fn new(names: Vec<String>) -> Self {
        Circuit { names, ops: Vec::new(), n_measurements: 0 }
    }

    /// Circuit over `n` qubits named `q0..q{n-1}`.
    pub fn anonymous(n: usize) -> Self {
        Circuit::new((0..n).map(|i| format!("q{i}")).collect())
    }

    pub fn n_qubits(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, q: Qubit) -> &str {
        &self.names[q]
    }

    pub fn ops(&self) -> &[Timed] {
        &self.ops
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    /// Last occupied time slot, or `None` for an empty circuit.
    pub fn depth(&self) -> Option<u32> {
        self.ops.iter().map(|o| o.t).max()
    }

    pub fn rot(&mut self, t: u32, qubit: Qubit, axis: Axis, angle: Angle) {
        self.ops.push(Timed { t, op: Instruction::Rot { qubit, axis, angle } });
    }

    pub fn cz(&mut self, t: u32, a: Qubit, b: Qubit, pattern: Option<Pattern>) {
        self.ops.push(Timed { t, op: Instruction::Cz { a, b, pattern } });
    }

    pub fn idle(&mut self, t: u32, qubit: Qubit, duration_ns: f64) {
        self.ops.push(Timed { t, op: Instruction::Idle { qubit, duration_ns } });
    }

    /// Appends a Z measurement and returns its record slot.
    pub fn measure(&mut self, t: u32, qubit: Qubit) -> usize {
        let slot = self.n_measurements;
        self.n_measurements += 1;
        self.ops.push(Timed { t, op: Instruction::MeasureZ { qubit, slot } });
        slot
    }

    pub fn noise(&mut self, t: u32, channel: usize, qubits: Vec<Qubit>) {
        self.ops.push(Timed { t, op: Instruction::Noise { channel, qubits } });
    }

    /// Appends an already-built instruction, keeping measurement slots dense.
    pub fn push(&mut self, timed: Timed) -> Result<()> {
        if let Instruction::MeasureZ { slot, .. } = timed.op {
            if slot != self.n_measurements {
                return Err(Error::invalid(format!(
                    "measurement slot {slot} out of order (expected {})",
                    self.n_measurements
                )));
            }
            self.n_measurements += 1;
        }
        self.ops.push(timed);
        Ok(())
    }

    /// Copy of this circuit with all `NOISE` annotations removed.
    pub fn without_noise(&self) -> Circuit {
        Circuit {
            names: self.names.clone(),
            ops: self
                .ops
                .iter()
                .filter(|o| !matches!(o.op, Instruction::Noise { .. }))
                .cloned()
                .collect(),
            n_measurements: self.n_measurements,
        }
    }

    pub fn count_cz(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o.op, Instruction::Cz { .. })).count()
    }

    pub fn count_rotations(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o.op, Instruction::Rot { .. })).count()
    }

    /// Checks qubit bounds, slot occupancy and record-slot density.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits();
        let mut busy: HashMap<(u32, Qubit), usize> = HashMap::new();
        let mut seen_slots = vec![false; self.n_measurements];
        for (i, timed) in self.ops.iter().enumerate() {
            let qubits = timed.op.qubits();
            for &q in &qubits {
                if q >= n {
                    return Err(Error::invalid(format!("instruction {i}: qubit {q} out of range")));
                }
            }
            if let Instruction::Cz { a, b, .. } = timed.op {
                if a == b {
                    return Err(Error::invalid(format!("instruction {i}: CZ on a single qubit")));
                }
            }
            if let Instruction::MeasureZ { slot, .. } = timed.op {
                if slot >= seen_slots.len() || seen_slots[slot] {
                    return Err(Error::invalid(format!("instruction {i}: bad record slot {slot}")));
                }
                seen_slots[slot] = true;
            }
            if matches!(timed.op, Instruction::Noise { .. }) {
                continue;
            }
            for q in qubits {
                if let Some(prev) = busy.insert((timed.t, q), i) {
                    return Err(Error::invalid(format!(
                        "instructions {prev} and {i} both use {} in slot {}",
                        self.names[q], timed.t
                    )));
                }
            }
        }
        if seen_slots.iter().any(|s| !s) {
            return Err(Error::invalid("record slots are not dense"));
        }
        Ok(())
    }

    /// One instruction per line: `t=<slot> <GATE> <qubit names...>`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for timed in &self.ops {
            let (gate, qubits) = match &timed.op {
                Instruction::Rot { qubit, axis, angle } => (rotation_token(*axis, *angle), vec![*qubit]),
                Instruction::Cz { a, b, pattern } => {
                    let tok = match pattern {
                        Some(p) => format!("CZ/{}", p.as_char()),
                        None => "CZ".to_string(),
                    };
                    (tok, vec![*a, *b])
                }
                Instruction::Idle { qubit, duration_ns } => (format!("IDLE({duration_ns}ns)"), vec![*qubit]),
                Instruction::MeasureZ { qubit, slot } => (format!("MZ[{slot}]"), vec![*qubit]),
                Instruction::Noise { channel, qubits } => (format!("NOISE[{channel}]"), qubits.clone()),
            };
            out.push_str(&format!("t={} {}", timed.t, gate));
            for q in qubits {
                out.push(' ');
                out.push_str(&self.names[q]);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format back, given the qubit register.
    pub fn from_text(names: Vec<String>, text: &str) -> Result<Circuit> {
        let index: HashMap<&str, Qubit> =
            names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut ops = Vec::new();
        let mut n_measurements = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Format(format!("line {}: {msg}", lineno + 1));
            let mut parts = line.split_whitespace();
            let t = parts
                .next()
                .and_then(|tok| tok.strip_prefix("t="))
                .and_then(|v| v.parse::<u32>().ok())
                .ok_or_else(|| bad("missing t=<slot>"))?;
            let gate = parts.next().ok_or_else(|| bad("missing gate"))?;
            let qubits = parts
                .map(|name| index.get(name).copied().ok_or_else(|| bad(&format!("unknown qubit {name}"))))
                .collect::<Result<Vec<_>>>()?;
            let one = |qs: &[Qubit]| {
                if qs.len() == 1 {
                    Ok(qs[0])
                } else {
                    Err(bad("expected one qubit"))
                }
            };
            let op = if let Some((axis, angle)) = parse_rotation(gate) {
                Instruction::Rot { qubit: one(&qubits)?, axis, angle }
            } else if gate == "CZ" || gate.starts_with("CZ/") {
                if qubits.len() != 2 {
                    return Err(bad("CZ needs two qubits"));
                }
                let pattern = match gate.strip_prefix("CZ/") {
                    Some(p) => Some(
                        p.chars().next().and_then(Pattern::from_char).ok_or_else(|| bad("bad pattern"))?,
                    ),
                    None => None,
                };
                Instruction::Cz { a: qubits[0], b: qubits[1], pattern }
            } else if let Some(rest) = gate.strip_prefix("IDLE(") {
                let dur = rest
                    .strip_suffix("ns)")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| bad("bad idle duration"))?;
                Instruction::Idle { qubit: one(&qubits)?, duration_ns: dur }
            } else if let Some(rest) = gate.strip_prefix("MZ[") {
                let slot = rest
                    .strip_suffix(']')
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| bad("bad record slot"))?;
                n_measurements = n_measurements.max(slot + 1);
                Instruction::MeasureZ { qubit: one(&qubits)?, slot }
            } else if let Some(rest) = gate.strip_prefix("NOISE[") {
                let channel = rest
                    .strip_suffix(']')
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| bad("bad channel id"))?;
                Instruction::Noise { channel, qubits }
            } else {
                return Err(bad(&format!("unknown gate {gate}")));
            };
            ops.push(Timed { t, op });
        }
        let circuit = Circuit { names, ops, n_measurements };
        circuit.validate()?;
        Ok(circuit)
    }
}

fn rotation_token(axis: Axis, angle: Angle) -> String {
    let axis = match axis {
        Axis::X => "X",
        Axis::Y => "Y",
        Axis::Z => "Z",
        Axis::XY => "XY",
    };
    let angle = match angle {
        Angle::HalfPi => "+pi/2",
        Angle::MinusHalfPi => "-pi/2",
        Angle::Pi => "pi",
    };
    format!("R{axis}({angle})")
}

fn parse_rotation(tok: &str) -> Option<(Axis, Angle)> {
    let rest = tok.strip_prefix('R')?;
    let open = rest.find('(')?;
    let axis = match &rest[..open] {
        "X" => Axis::X,
        "Y" => Axis::Y,
        "Z" => Axis::Z,
        "XY" => Axis::XY,
        _ => return None,
    };
    let angle = match &rest[open..] {
        "(+pi/2)" => Angle::HalfPi,
        "(-pi/2)" => Angle::MinusHalfPi,
        "(pi)" => Angle::Pi,
        _ => return None,
    };
    Some((axis, angle))
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Circuit {
        let mut c = Circuit::anonymous(3);
        c.rot(0, 0, Axis::Y, Angle::HalfPi);
        c.rot(0, 1, Axis::XY, Angle::HalfPi);
        c.idle(0, 2, 25.0);
        c.cz(1, 0, 1, Some(Pattern::B));
        c.noise(1, 4, vec![0, 1]);
        c.measure(2, 0);
        c.measure(2, 2);
        c
    }

    #[test]
    fn text_round_trip() {
        let c = sample();
        let text = c.to_text();
        assert!(text.starts_with("t=0 RY(+pi/2) q0\n"));
        assert!(text.contains("t=1 CZ/B q0 q1"));
        assert!(text.contains("t=2 MZ[1] q2"));
        let back = Circuit::from_text(c.names().to_vec(), &text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn slot_conflicts_are_rejected() {
        let mut c = Circuit::anonymous(2);
        c.rot(0, 0, Axis::X, Angle::Pi);
        c.cz(0, 0, 1, None);
        assert!(c.validate().is_err());
    }

    #[test]
    fn noise_annotations_do_not_occupy_slots() {
        assert!(sample().validate().is_ok());
    }

    #[test]
    fn unknown_gate_is_a_format_error() {
        let err = Circuit::from_text(vec!["a".into()], "t=0 H a").unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }
}
