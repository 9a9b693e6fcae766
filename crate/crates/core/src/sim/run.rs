use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction};
use crate::error::{Error, Result};
use crate::noise::channels::{Channel, NoiseModel, PauliChannel};
use crate::rng::{derive_seed, stream_rng, ShotRng};
use crate::sim::frame::FrameProgram;
use crate::sim::statevector::StateVector;
use crate::sim::tableau::StabilizerTableau;

/// Shots per parallel work unit. Fixed so output never depends on the worker count.
const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Fresh stabilizer tableau per shot.
    Tableau,
    /// Dense statevector per shot.
    #[serde(rename = "statevector")]
    StateVector,
    /// Pauli-frame propagation against one tableau reference sample.
    Frame,
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tableau" => Ok(Engine::Tableau),
            "statevector" | "sv" => Ok(Engine::StateVector),
            "frame" => Ok(Engine::Frame),
            other => Err(Error::invalid(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub shot: u64,
    pub bits: Vec<bool>,
    /// Master seed; the shot's stream is `(seed, shot)`.
    pub seed: u64,
}

/// Packed measurement records, one LSB-first byte row per shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotBatch {
    n_qubits: usize,
    n_measurements: usize,
    seed: u64,
    shots: usize,
    rows: Vec<u8>,
}

impl ShotBatch {
    pub fn from_rows(n_qubits: usize, n_measurements: usize, seed: u64, shots: usize, rows: Vec<u8>) -> Result<Self> {
        let rb = n_measurements.div_ceil(8);
        if rows.len() != rb * shots {
            return Err(Error::data(format!(
                "expected {} bytes for {shots} shots of {n_measurements} bits, got {}",
                rb * shots,
                rows.len()
            )));
        }
        Ok(ShotBatch { n_qubits, n_measurements, seed, shots, rows })
    }

    pub fn from_bits(n_qubits: usize, seed: u64, shots: &[Vec<bool>]) -> Result<Self> {
        let m = shots.first().map_or(0, |s| s.len());
        let rb = m.div_ceil(8);
        let mut rows = vec![0u8; rb * shots.len()];
        for (i, s) in shots.iter().enumerate() {
            if s.len() != m {
                return Err(Error::data("shots of unequal length"));
            }
            for (j, &b) in s.iter().enumerate() {
                rows[i * rb + j / 8] |= u8::from(b) << (j % 8);
            }
        }
        ShotBatch::from_rows(n_qubits, m, seed, shots.len(), rows)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn row_bytes(&self) -> usize {
        self.n_measurements.div_ceil(8)
    }

    pub fn rows(&self) -> &[u8] {
        &self.rows
    }

    pub fn row(&self, shot: usize) -> &[u8] {
        let rb = self.row_bytes();
        &self.rows[shot * rb..(shot + 1) * rb]
    }

    #[inline]
    pub fn bit(&self, shot: usize, slot: usize) -> bool {
        self.rows[shot * self.row_bytes() + slot / 8] >> (slot % 8) & 1 == 1
    }

    pub fn record(&self, shot: usize) -> ShotRecord {
        ShotRecord {
            shot: shot as u64,
            bits: (0..self.n_measurements).map(|s| self.bit(shot, s)).collect(),
            seed: self.seed,
        }
    }
}

fn check_supported(circuit: &Circuit, engine: Engine, noise: Option<&NoiseModel>) -> Result<()> {
    for timed in circuit.ops() {
        match &timed.op {
            op @ Instruction::Rot { .. } if engine != Engine::StateVector && !op.is_clifford() => {
                return Err(Error::Unsupported(format!(
                    "{engine:?} engine cannot apply the non-Clifford rotation at slot {}",
                    timed.t
                )));
            }
            Instruction::Noise { channel, .. } => {
                if let Some(model) = noise {
                    model.channel(*channel)?;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

/// Noiseless reference bits for the frame sampler.
pub fn reference_sample(circuit: &Circuit, seed: u64) -> Result<Vec<bool>> {
    let mut rng = stream_rng(derive_seed(seed, "reference"), 0);
    let mut t = StabilizerTableau::new(circuit.n_qubits())?;
    let mut bits = vec![false; circuit.n_measurements()];
    for timed in circuit.ops() {
        match timed.op {
            Instruction::MeasureZ { qubit, slot } => bits[slot] = t.measure_z(qubit, &mut rng)?,
            ref op => t.apply(op)?,
        }
    }
    Ok(bits)
}

trait ShotState {
    fn apply_op(&mut self, op: &Instruction) -> Result<()>;
    fn measure(&mut self, q: usize, rng: &mut ShotRng) -> Result<bool>;
    fn apply_pauli_term(&mut self, ch: &PauliChannel, qubits: &[usize], rng: &mut ShotRng, n: usize) -> Result<()>;
}

impl ShotState for StabilizerTableau {
    fn apply_op(&mut self, op: &Instruction) -> Result<()> {
        self.apply(op)
    }
    fn measure(&mut self, q: usize, rng: &mut ShotRng) -> Result<bool> {
        self.measure_z(q, rng)
    }
    fn apply_pauli_term(&mut self, ch: &PauliChannel, qubits: &[usize], rng: &mut ShotRng, n: usize) -> Result<()> {
        if let Some(term) = ch.sample(rng) {
            self.inject_pauli(&PauliChannel::embed(term, qubits, n))?;
        }
        Ok(())
    }
}

impl ShotState for StateVector {
    fn apply_op(&mut self, op: &Instruction) -> Result<()> {
        self.apply(op)
    }
    fn measure(&mut self, q: usize, rng: &mut ShotRng) -> Result<bool> {
        self.measure_z(q, rng)
    }
    fn apply_pauli_term(&mut self, ch: &PauliChannel, qubits: &[usize], rng: &mut ShotRng, n: usize) -> Result<()> {
        if let Some(term) = ch.sample(rng) {
            self.inject_pauli(&PauliChannel::embed(term, qubits, n))?;
        }
        Ok(())
    }
}

fn run_one<S: ShotState>(
    state: &mut S,
    circuit: &Circuit,
    noise: Option<&NoiseModel>,
    rng: &mut ShotRng,
    row: &mut [u8],
) -> Result<()> {
    let n = circuit.n_qubits();
    let mut last_slot = vec![None; n];
    for timed in circuit.ops() {
        match &timed.op {
            Instruction::MeasureZ { qubit, slot } => {
                let bit = state.measure(*qubit, rng)?;
                row[slot / 8] |= u8::from(bit) << (slot % 8);
                last_slot[*qubit] = Some(*slot);
            }
            Instruction::Noise { channel, qubits } => {
                let Some(model) = noise else { continue };
                match model.channel(*channel)? {
                    Channel::Pauli(ch) => state.apply_pauli_term(ch, qubits, rng, n)?,
                    Channel::Readout(r) => {
                        let q = *qubits.first().ok_or_else(|| Error::invalid("readout channel without qubit"))?;
                        let slot = last_slot[q]
                            .ok_or_else(|| Error::invalid("readout noise on a qubit that was never measured"))?;
                        let bit = row[slot / 8] >> (slot % 8) & 1 == 1;
                        if rng.random::<f64>() < r.flip_probability(bit) {
                            row[slot / 8] ^= 1 << (slot % 8);
                        }
                    }
                }
            }
            op => state.apply_op(op)?,
        }
    }
    Ok(())
}

/// Runs `shots` independent shots. Shot `i` draws from stream `(seed, i)`.
pub fn run_circuit(
    circuit: &Circuit,
    engine: Engine,
    noise: Option<&NoiseModel>,
    shots: usize,
    seed: u64,
) -> Result<ShotBatch> {
    check_supported(circuit, engine, noise)?;
    let n = circuit.n_qubits();
    let m = circuit.n_measurements();
    let rb = m.div_ceil(8);
    let frame = match engine {
        Engine::Frame => Some((FrameProgram::compile(circuit, noise)?, reference_sample(circuit, seed)?)),
        _ => None,
    };
    if engine == Engine::StateVector {
        // Surface the resource error once rather than per shot.
        StateVector::new(n)?;
    }
    let chunks: Vec<usize> = (0..shots.div_ceil(CHUNK)).collect();
    let parts: Vec<Result<Vec<u8>>> = chunks
        .par_iter()
        .map(|&c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(shots);
            let mut out = vec![0u8; (hi - lo) * rb];
            for (k, shot) in (lo..hi).enumerate() {
                let mut rng = stream_rng(seed, shot as u64);
                let row = &mut out[k * rb..(k + 1) * rb];
                match engine {
                    Engine::Frame => {
                        let (prog, reference) = frame.as_ref().expect("frame program");
                        prog.sample_shot(reference, &mut rng, row)?;
                    }
                    Engine::Tableau => {
                        let mut t = StabilizerTableau::new(n)?;
                        run_one(&mut t, circuit, noise, &mut rng, row)?;
                    }
                    Engine::StateVector => {
                        let mut s = StateVector::new(n)?;
                        run_one(&mut s, circuit, noise, &mut rng, row)?;
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut rows = Vec::with_capacity(shots * rb);
    for part in parts {
        rows.extend(part?);
    }
    ShotBatch::from_rows(n, m, seed, shots, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Axis};

    fn bell() -> Circuit {
        let mut c = Circuit::anonymous(2);
        c.rot(0, 0, Axis::Y, Angle::HalfPi);
        c.rot(0, 1, Axis::Y, Angle::HalfPi);
        c.cz(1, 0, 1, None);
        c.rot(2, 1, Axis::Y, Angle::MinusHalfPi);
        c.measure(3, 0);
        c.measure(3, 1);
        c
    }

    #[test]
    fn engines_agree_on_bell_statistics() {
        for engine in [Engine::Tableau, Engine::StateVector, Engine::Frame] {
            let batch = run_circuit(&bell(), engine, None, 2000, 11).unwrap();
            let mut ones = 0;
            for s in 0..batch.shots() {
                assert_eq!(batch.bit(s, 0), batch.bit(s, 1), "{engine:?}");
                ones += usize::from(batch.bit(s, 0));
            }
            assert!((800..1200).contains(&ones), "{engine:?}: {ones}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = run_circuit(&bell(), Engine::Frame, None, 5000, 3).unwrap();
        let b = run_circuit(&bell(), Engine::Frame, None, 5000, 3).unwrap();
        assert_eq!(a, b);
        let c = run_circuit(&bell(), Engine::Frame, None, 5000, 4).unwrap();
        assert_ne!(a.rows(), c.rows());
    }

    #[test]
    fn tableau_rejects_diagonal_rotation() {
        let mut c = Circuit::anonymous(1);
        c.rot(0, 0, Axis::XY, Angle::HalfPi);
        assert!(matches!(run_circuit(&c, Engine::Tableau, None, 1, 0), Err(Error::Unsupported(_))));
        assert!(run_circuit(&c, Engine::StateVector, None, 1, 0).is_ok());
    }

    #[test]
    fn unresolved_channel_rejected() {
        let mut c = Circuit::anonymous(1);
        c.noise(0, 9, vec![0]);
        let model = NoiseModel::new();
        assert!(matches!(
            run_circuit(&c, Engine::Tableau, Some(&model), 1, 0),
            Err(Error::MissingChannel(9))
        ));
    }

    #[test]
    fn record_round_trip() {
        let batch = ShotBatch::from_bits(3, 9, &[vec![true, false, true], vec![false, false, true]]).unwrap();
        assert_eq!(batch.record(0).bits, vec![true, false, true]);
        assert_eq!(batch.record(1).shot, 1);
        assert_eq!(batch.row(1), &[0b100]);
    }
}
