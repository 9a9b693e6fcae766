//! Pauli-frame sampler for Clifford circuits with Pauli noise.
//!
//! One noiseless reference sample is taken with the tableau. Each shot then
//! only tracks the Pauli frame separating it from the reference: a measurement
//! reports the reference bit XOR the frame's X component. Random Z components
//! are mixed in at the start and after every measurement, which reproduces the
//! randomness of non-deterministic measurements without touching the tableau.

use rand::{Rng, RngCore};

use crate::circuit::{Angle, Axis, Circuit, Instruction, Qubit};
use crate::error::{Error, Result};
use crate::noise::channels::{Channel, NoiseModel};
use crate::sim::pauli::{words_for, Pauli};

#[derive(Clone, Copy, Debug)]
enum Op {
    Nop,
    SwapXZ(Qubit),
    XorZIntoX(Qubit),
    XorXIntoZ(Qubit),
    Cz(Qubit, Qubit),
    Measure { qubit: Qubit, slot: usize },
    Pauli { channel: usize, site: usize },
    Readout { channel: usize, qubit: Qubit },
}

/// One channel term with an integer threshold for 64-bit uniform draws.
#[derive(Clone, Debug)]
struct Term {
    upper: u64,
    flips: Vec<(usize, bool, bool)>,
}

#[derive(Clone, Debug)]
struct CompiledPauli {
    terms: Vec<Term>,
}

#[derive(Clone, Copy, Debug)]
struct CompiledReadout {
    t01: u64,
    t10: u64,
}

fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Frame-propagation program for one circuit, optionally with noise.
#[derive(Clone, Debug)]
pub struct FrameProgram {
    n_qubits: usize,
    n_measurements: usize,
    words: usize,
    ops: Vec<Op>,
    sites: Vec<Vec<Qubit>>,
    paulis: Vec<Option<CompiledPauli>>,
    readouts: Vec<Option<CompiledReadout>>,
}

impl FrameProgram {
    /// Compiles `circuit`. With `noise` absent, `NOISE` instructions are skipped.
    pub fn compile(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<Self> {
        let mut ops = Vec::with_capacity(circuit.ops().len());
        let mut sites = Vec::new();
        let mut paulis = Vec::new();
        let mut readouts = Vec::new();
        if let Some(model) = noise {
            for entry in model.entries() {
                match &entry.channel {
                    Channel::Pauli(ch) => {
                        let mut cum = 0.0;
                        let terms = ch
                            .terms()
                            .iter()
                            .map(|t| {
                                cum += t.p;
                                Term {
                                    upper: threshold(cum),
                                    flips: t
                                        .paulis
                                        .iter()
                                        .enumerate()
                                        .filter(|(_, p)| **p != Pauli::I)
                                        .map(|(k, p)| {
                                            let (x, z) = p.bits();
                                            (k, x, z)
                                        })
                                        .collect(),
                                }
                            })
                            .collect();
                        paulis.push(Some(CompiledPauli { terms }));
                        readouts.push(None);
                    }
                    Channel::Readout(r) => {
                        paulis.push(None);
                        readouts.push(Some(CompiledReadout { t01: threshold(r.p01), t10: threshold(r.p10) }));
                    }
                }
            }
        }
        for timed in circuit.ops() {
            let op = match &timed.op {
                Instruction::Rot { qubit, axis, angle } => match (axis, angle) {
                    (Axis::XY, _) => {
                        return Err(Error::Unsupported("R_{X+Y} rotation in a frame-sampled circuit".into()))
                    }
                    (_, Angle::Pi) => Op::Nop,
                    (Axis::Y, _) => Op::SwapXZ(*qubit),
                    (Axis::X, _) => Op::XorZIntoX(*qubit),
                    (Axis::Z, _) => Op::XorXIntoZ(*qubit),
                },
                Instruction::Cz { a, b, .. } => Op::Cz(*a, *b),
                Instruction::Idle { .. } => Op::Nop,
                Instruction::MeasureZ { qubit, slot } => Op::Measure { qubit: *qubit, slot: *slot },
                Instruction::Noise { channel, qubits } => match noise {
                    None => Op::Nop,
                    Some(model) => match model.channel(*channel)? {
                        Channel::Pauli(ch) => {
                            if ch.arity() != qubits.len() {
                                return Err(Error::invalid(format!(
                                    "channel {channel} has arity {} but is attached to {} qubits",
                                    ch.arity(),
                                    qubits.len()
                                )));
                            }
                            sites.push(qubits.clone());
                            Op::Pauli { channel: *channel, site: sites.len() - 1 }
                        }
                        Channel::Readout(_) => {
                            if qubits.len() != 1 {
                                return Err(Error::invalid("readout channel needs exactly one qubit"));
                            }
                            Op::Readout { channel: *channel, qubit: qubits[0] }
                        }
                    },
                },
            };
            ops.push(op);
        }
        Ok(FrameProgram {
            n_qubits: circuit.n_qubits(),
            n_measurements: circuit.n_measurements(),
            words: words_for(circuit.n_qubits()),
            ops,
            sites,
            paulis,
            readouts,
        })
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    #[inline]
    fn flip(frame: &mut [u64], q: Qubit, x: bool, z: bool, words: usize) {
        frame[q / 64] ^= u64::from(x) << (q % 64);
        frame[words + q / 64] ^= u64::from(z) << (q % 64);
    }

    #[inline]
    fn get(frame: &[u64], offset: usize, q: Qubit) -> bool {
        frame[offset + q / 64] >> (q % 64) & 1 == 1
    }

    /// Runs one noisy shot and writes its measurement bits, LSB-first, into `row`.
    ///
    /// `reference` holds the noiseless reference bits in record-slot order.
    pub fn sample_shot<R: RngCore>(&self, reference: &[bool], rng: &mut R, row: &mut [u8]) -> Result<()> {
        let w = self.words;
        let mut frame = vec![0u64; 2 * w];
        for q in 0..self.n_qubits {
            if rng.random::<bool>() {
                Self::flip(&mut frame, q, false, true, w);
            }
        }
        let mut last_slot = vec![usize::MAX; self.n_qubits];
        row.fill(0);
        for op in &self.ops {
            match *op {
                Op::Nop => {}
                Op::SwapXZ(q) => {
                    let x = Self::get(&frame, 0, q);
                    let z = Self::get(&frame, w, q);
                    if x != z {
                        Self::flip(&mut frame, q, true, true, w);
                    }
                }
                Op::XorZIntoX(q) => {
                    if Self::get(&frame, w, q) {
                        Self::flip(&mut frame, q, true, false, w);
                    }
                }
                Op::XorXIntoZ(q) => {
                    if Self::get(&frame, 0, q) {
                        Self::flip(&mut frame, q, false, true, w);
                    }
                }
                Op::Cz(a, b) => {
                    let xa = Self::get(&frame, 0, a);
                    let xb = Self::get(&frame, 0, b);
                    Self::flip(&mut frame, a, false, xb, w);
                    Self::flip(&mut frame, b, false, xa, w);
                }
                Op::Measure { qubit, slot } => {
                    let bit = reference[slot] ^ Self::get(&frame, 0, qubit);
                    row[slot / 8] |= u8::from(bit) << (slot % 8);
                    last_slot[qubit] = slot;
                    if rng.random::<bool>() {
                        Self::flip(&mut frame, qubit, false, true, w);
                    }
                }
                Op::Pauli { channel, site } => {
                    let ch = self.paulis[channel].as_ref().expect("compiled Pauli channel");
                    if ch.terms.is_empty() {
                        continue;
                    }
                    let u = rng.next_u64();
                    if let Some(term) = ch.terms.iter().find(|t| u < t.upper) {
                        let qubits = &self.sites[site];
                        for &(k, x, z) in &term.flips {
                            Self::flip(&mut frame, qubits[k], x, z, w);
                        }
                    }
                }
                Op::Readout { channel, qubit } => {
                    let r = self.readouts[channel].expect("compiled readout channel");
                    let slot = last_slot[qubit];
                    if slot == usize::MAX {
                        return Err(Error::invalid("readout noise on a qubit that was never measured"));
                    }
                    let bit = row[slot / 8] >> (slot % 8) & 1 == 1;
                    let t = if bit { r.t10 } else { r.t01 };
                    if t != 0 && rng.next_u64() < t {
                        row[slot / 8] ^= 1 << (slot % 8);
                    }
                }
            }
        }
        Ok(())
    }

    /// Record slots whose value flips when the Pauli `fault` is applied right
    /// after instruction `index`, with no other noise and no measurement
    /// randomization.
    pub fn propagate_fault(&self, index: usize, fault: &[(Qubit, Pauli)]) -> Vec<usize> {
        let w = self.words;
        let mut frame = vec![0u64; 2 * w];
        for &(q, p) in fault {
            let (x, z) = p.bits();
            Self::flip(&mut frame, q, x, z, w);
        }
        let mut flipped = Vec::new();
        for op in &self.ops[index + 1..] {
            match *op {
                Op::SwapXZ(q) => {
                    if Self::get(&frame, 0, q) != Self::get(&frame, w, q) {
                        Self::flip(&mut frame, q, true, true, w);
                    }
                }
                Op::XorZIntoX(q) => {
                    if Self::get(&frame, w, q) {
                        Self::flip(&mut frame, q, true, false, w);
                    }
                }
                Op::XorXIntoZ(q) => {
                    if Self::get(&frame, 0, q) {
                        Self::flip(&mut frame, q, false, true, w);
                    }
                }
                Op::Cz(a, b) => {
                    let xa = Self::get(&frame, 0, a);
                    let xb = Self::get(&frame, 0, b);
                    Self::flip(&mut frame, a, false, xb, w);
                    Self::flip(&mut frame, b, false, xa, w);
                }
                Op::Measure { qubit, slot } => {
                    if Self::get(&frame, 0, qubit) {
                        flipped.push(slot);
                    }
                }
                Op::Nop | Op::Pauli { .. } | Op::Readout { .. } => {}
            }
        }
        flipped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::noise::channels::{LocationClass, PauliChannel, ReadoutFlip};
    use crate::rng::stream_rng;

    #[test]
    fn x_fault_flips_later_measurement() {
        let mut c = Circuit::anonymous(2);
        c.rot(0, 0, Axis::Y, Angle::HalfPi);
        c.cz(1, 0, 1, None);
        c.rot(2, 0, Axis::Y, Angle::MinusHalfPi);
        c.measure(3, 0);
        c.measure(3, 1);
        let prog = FrameProgram::compile(&c, None).unwrap();
        // X on qubit 1 before the CZ becomes Z on qubit 0, then X after the closing rotation.
        assert_eq!(prog.propagate_fault(0, &[(1, Pauli::X)]), vec![0, 1]);
        assert_eq!(prog.propagate_fault(0, &[(1, Pauli::Z)]), Vec::<usize>::new());
    }

    #[test]
    fn readout_flip_certain() {
        let mut c = Circuit::anonymous(1);
        c.measure(0, 0);
        c.noise(0, 0, vec![0]);
        let mut model = NoiseModel::new();
        model.add(LocationClass::Readout { qubit: 0 }, Channel::Readout(ReadoutFlip { p01: 1.0, p10: 0.0 }));
        let prog = FrameProgram::compile(&c, Some(&model)).unwrap();
        let mut row = [0u8];
        prog.sample_shot(&[false], &mut stream_rng(0, 0), &mut row).unwrap();
        assert_eq!(row[0], 1);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let mut c = Circuit::anonymous(2);
        c.noise(0, 0, vec![0, 1]);
        let mut model = NoiseModel::new();
        model.add(
            LocationClass::AfterOneQubitGate { qubit: 0 },
            Channel::Pauli(PauliChannel::depolarizing(1, 0.1).unwrap()),
        );
        assert!(FrameProgram::compile(&c, Some(&model)).is_err());
    }
}
