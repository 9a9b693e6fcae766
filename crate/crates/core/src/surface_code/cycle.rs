//! Syndrome-extraction cycle and memory-experiment circuits.
//!
//! One cycle has nine gate steps:
//!
//! ```text
//! step 0  ancillas RY(+pi/2); data entering the X frame RY(-pi/2)
//! step 1  CZ layer A
//! step 2  data frame changes
//! step 3  CZ layer B
//! step 4  idle (one single-qubit gate duration)
//! step 5  CZ layer C
//! step 6  data frame changes
//! step 7  CZ layer D
//! step 8  ancillas RY(-pi/2); data leaving the X frame RY(+pi/2)
//! ```
//!
//! A data qubit is in the X frame exactly while it talks to X ancillas, so a
//! CZ with the ancilla acts as a controlled X on the data. The Y rotations
//! stand in for Hadamards. Ancillas are measured without reset. During their
//! readout and depletion the data qubits run a decoupling block of six Y gates
//! between seven equal idles.

use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Axis, Circuit, Pattern};
use crate::error::{Error, Result};
use crate::noise::calibration::Durations;
use crate::surface_code::layout::{Basis, CodeLayout, StabKind};

pub const GATE_STEPS: u32 = 9;
pub const DD_GATES: usize = 6;

/// Default durations used when no calibration table is supplied.
pub const DEFAULT_DURATIONS: Durations = Durations { oneq: 25.0, twoq: 32.0, measure: 1500.0, depletion: 2400.0 };

/// Per-data-qubit frame in each CZ layer: `true` means X frame.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CyclePlan {
    /// `frames[q] = [A, B, C, D]`.
    pub frames: Vec<[bool; 4]>,
}

impl CyclePlan {
    pub fn new(layout: &CodeLayout) -> Result<Self> {
        let mut frames = Vec::with_capacity(layout.n_data());
        for q in 0..layout.n_data() {
            let kind = |p: Pattern| layout.data_partner(q, p).map(|a| layout.ancillas[a].kind == StabKind::X);
            let [ka, kb, kc, kd] = Pattern::ALL.map(kind);
            let bc = match (kb, kc) {
                (Some(b), Some(c)) if b != c => {
                    return Err(Error::invalid(format!(
                        "{} meets different stabilizer types in layers B and C",
                        layout.data[q].name
                    )))
                }
                (Some(b), _) => b,
                (None, Some(c)) => c,
                (None, None) => ka.or(kd).unwrap_or(false),
            };
            frames.push([ka.unwrap_or(bc), bc, bc, kd.unwrap_or(bc)]);
        }
        Ok(CyclePlan { frames })
    }
}

/// Record-slot bookkeeping for a memory circuit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordMap {
    pub n_cycles: usize,
    pub n_ancillas: usize,
    pub n_data: usize,
}

impl RecordMap {
    /// Slot of ancilla `a` in round `round` (1-based).
    pub fn ancilla_slot(&self, round: usize, a: usize) -> usize {
        (round - 1) * self.n_ancillas + a
    }

    pub fn data_slot(&self, q: usize) -> usize {
        self.n_cycles * self.n_ancillas + q
    }

    pub fn n_measurements(&self) -> usize {
        self.n_cycles * self.n_ancillas + self.n_data
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryCircuit {
    pub circuit: Circuit,
    pub records: RecordMap,
    pub basis: Basis,
    pub n_cycles: usize,
}

fn toggle(circuit: &mut Circuit, t: u32, q: usize, from_x: bool, to_x: bool, oneq: f64) {
    match (from_x, to_x) {
        (false, true) => circuit.rot(t, q, Axis::Y, Angle::MinusHalfPi),
        (true, false) => circuit.rot(t, q, Axis::Y, Angle::HalfPi),
        _ => circuit.idle(t, q, oneq),
    }
}

/// Appends one cycle starting at slot `t0` and returns the first free slot.
///
/// With `final_basis` set the cycle ends with the data readout in that basis
/// instead of the decoupling block.
fn emit_cycle(
    circuit: &mut Circuit,
    layout: &CodeLayout,
    plan: &CyclePlan,
    dur: &Durations,
    t0: u32,
    final_basis: Option<Basis>,
) -> u32 {
    let nd = layout.n_data();
    let na = layout.n_ancillas();
    let anc = |a: usize| nd + a;
    for a in 0..na {
        circuit.rot(t0, anc(a), Axis::Y, Angle::HalfPi);
    }
    for q in 0..nd {
        toggle(circuit, t0, q, false, plan.frames[q][0], dur.oneq);
    }
    for (i, pattern) in Pattern::ALL.into_iter().enumerate() {
        let t = t0 + 1 + 2 * i as u32;
        let mut busy = vec![false; layout.n_qubits()];
        for c in layout.couplings.iter().filter(|c| c.pattern == pattern) {
            circuit.cz(t, c.data, anc(c.ancilla), Some(pattern));
            busy[c.data] = true;
            busy[anc(c.ancilla)] = true;
        }
        for (q, _) in busy.iter().enumerate().filter(|(_, b)| !**b) {
            circuit.idle(t, q, dur.twoq);
        }
        if i == 3 {
            break;
        }
        let t = t + 1;
        for a in 0..na {
            circuit.idle(t, anc(a), dur.oneq);
        }
        for q in 0..nd {
            toggle(circuit, t, q, plan.frames[q][i], plan.frames[q][i + 1], dur.oneq);
        }
    }
    let t = t0 + GATE_STEPS - 1;
    for a in 0..na {
        circuit.rot(t, anc(a), Axis::Y, Angle::MinusHalfPi);
    }
    for q in 0..nd {
        toggle(circuit, t, q, plan.frames[q][3], false, dur.oneq);
    }
    let t = t0 + GATE_STEPS;
    for a in 0..na {
        circuit.measure(t, anc(a));
    }
    match final_basis {
        Some(Basis::Z) => {
            for q in 0..nd {
                circuit.measure(t, q);
            }
            t + 1
        }
        Some(Basis::X) => {
            for q in 0..nd {
                circuit.rot(t, q, Axis::Y, Angle::MinusHalfPi);
            }
            for q in 0..nd {
                circuit.measure(t + 1, q);
            }
            t + 2
        }
        None => {
            let segment = dur.measure_window_ns() / (DD_GATES + 1) as f64;
            for k in 0..=2 * DD_GATES as u32 {
                for q in 0..nd {
                    if k % 2 == 0 {
                        circuit.idle(t + k, q, segment);
                    } else {
                        circuit.rot(t + k, q, Axis::Y, Angle::Pi);
                    }
                }
            }
            for a in 0..na {
                circuit.idle(t + 1, anc(a), dur.depletion);
            }
            t + 2 * DD_GATES as u32 + 1
        }
    }
}

/// One cycle (gates, ancilla measurement and decoupling block) on a fresh register.
pub fn build_cycle_circuit(layout: &CodeLayout) -> Result<Circuit> {
    build_cycle_circuit_with(layout, &DEFAULT_DURATIONS)
}

pub fn build_cycle_circuit_with(layout: &CodeLayout, dur: &Durations) -> Result<Circuit> {
    let plan = CyclePlan::new(layout)?;
    let mut c = Circuit::new(layout.qubit_names());
    emit_cycle(&mut c, layout, &plan, dur, 0, None);
    c.validate()?;
    Ok(c)
}

pub fn build_memory_circuit(layout: &CodeLayout, basis: Basis, n_cycles: usize) -> Result<MemoryCircuit> {
    build_memory_circuit_with(layout, basis, n_cycles, &DEFAULT_DURATIONS)
}

pub fn build_memory_circuit_with(
    layout: &CodeLayout,
    basis: Basis,
    n_cycles: usize,
    dur: &Durations,
) -> Result<MemoryCircuit> {
    if n_cycles == 0 {
        return Err(Error::invalid("a memory experiment needs at least one cycle"));
    }
    let plan = CyclePlan::new(layout)?;
    let mut c = Circuit::new(layout.qubit_names());
    let mut t = 0;
    if basis == Basis::X {
        for q in 0..layout.n_data() {
            c.rot(0, q, Axis::Y, Angle::MinusHalfPi);
        }
        for a in 0..layout.n_ancillas() {
            c.idle(0, layout.ancilla_qubit(a), dur.oneq);
        }
        t = 1;
    }
    for k in 0..n_cycles {
        let last = (k + 1 == n_cycles).then_some(basis);
        t = emit_cycle(&mut c, layout, &plan, dur, t, last);
    }
    c.validate()?;
    let records = RecordMap { n_cycles, n_ancillas: layout.n_ancillas(), n_data: layout.n_data() };
    debug_assert_eq!(records.n_measurements(), c.n_measurements());
    Ok(MemoryCircuit { circuit: c, records, basis, n_cycles })
}

/// Wall-clock length of one cycle in microseconds: five single-qubit steps,
/// four CZ steps and the measurement-plus-depletion window.
pub fn cycle_duration(dur: &Durations) -> f64 {
    (5.0 * dur.oneq + 4.0 * dur.twoq + dur.measure + dur.depletion) / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction;

    #[test]
    fn duration_values() {
        assert!((cycle_duration(&DEFAULT_DURATIONS) - 4.153).abs() < 1e-12);
        let zero = Durations { oneq: 0.0, twoq: 0.0, measure: 0.0, depletion: 0.0 };
        assert_eq!(cycle_duration(&zero), 0.0);
        let other = Durations { oneq: 30.0, twoq: 40.0, measure: 1500.0, depletion: 2500.0 };
        assert!((cycle_duration(&other) - 4.31).abs() < 1e-12);
    }

    #[test]
    fn one_cz_per_coupling() {
        let l = CodeLayout::new(3).unwrap();
        let c = build_cycle_circuit(&l).unwrap();
        assert_eq!(c.count_cz(), 24);
        assert_eq!(c.n_measurements(), 8);
        let dd = c
            .ops()
            .iter()
            .filter(|o| matches!(o.op, Instruction::Rot { qubit: 4, angle: Angle::Pi, .. }))
            .count();
        assert_eq!(dd, 6);
    }

    #[test]
    fn nine_gate_steps_before_measurement() {
        let l = CodeLayout::new(3).unwrap();
        let c = build_cycle_circuit(&l).unwrap();
        let first_measure = c
            .ops()
            .iter()
            .find(|o| matches!(o.op, Instruction::MeasureZ { .. }))
            .map(|o| o.t)
            .unwrap();
        assert_eq!(first_measure, GATE_STEPS);
    }

    #[test]
    fn memory_record_count() {
        let l = CodeLayout::new(3).unwrap();
        let m = build_memory_circuit(&l, Basis::Z, 11).unwrap();
        assert_eq!(m.circuit.n_measurements(), 8 * 11 + 9);
        assert_eq!(m.records.data_slot(0), 88);
        assert_eq!(m.records.ancilla_slot(2, 3), 11);
        assert!(build_memory_circuit(&l, Basis::Z, 0).is_err());
    }

    #[test]
    fn plan_for_bulk_data() {
        let l = CodeLayout::new(3).unwrap();
        let plan = CyclePlan::new(&l).unwrap();
        // D5 meets Z3, X3, X2, Z2 in layers A..D.
        assert_eq!(plan.frames[4], [false, true, true, false]);
        assert!(CyclePlan::new(&CodeLayout::new(5).unwrap()).is_ok());
    }
}
