//! Random circuits on the surface-code device and linear cross-entropy benchmarking.
//!
//! A circuit is 21 single-qubit layers interleaved with 20 CZ layers. The CZ
//! layers walk through patterns A, B, C, D like the surface-code cycle. Every
//! qubit gets one of `RX(π/2)`, `RY(π/2)`, `R_{X+Y}(π/2)` per single-qubit
//! layer, never the same gate twice in a row.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Axis, Circuit, Instruction, Pattern};
use crate::error::{Error, Result};
use crate::noise::{
    attach_noise, depolarizing_from_avg_error, idle_channel, CalibrationTable, Channel, ErrorConvention, NoiseModel,
    NoiseOptions, PauliChannel,
};
use crate::rng::{derive_seed, stream_rng};
use crate::sim::StateVector;
use crate::surface_code::CodeLayout;

pub const SINGLE_QUBIT_LAYERS: usize = 21;
pub const CZ_LAYERS: usize = 20;
const GATES: [Axis; 3] = [Axis::X, Axis::Y, Axis::XY];

/// Random circuit with a final measurement of every qubit in slot 41.
pub fn generate_random_circuit(layout: &CodeLayout, seed: u64, twoq_ns: f64) -> Result<Circuit> {
    let n = layout.n_qubits();
    let mut rng = stream_rng(derive_seed(seed, "xeb/circuit"), 0);
    let mut c = Circuit::new(layout.qubit_names());
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut t = 0u32;
    for layer in 0..SINGLE_QUBIT_LAYERS {
        for (q, prev) in last.iter_mut().enumerate() {
            let g = match *prev {
                None => rng.random_range(0..3),
                Some(p) => (p + 1 + rng.random_range(0..2)) % 3,
            };
            *prev = Some(g);
            c.rot(t, q, GATES[g], Angle::HalfPi);
        }
        t += 1;
        if layer == CZ_LAYERS {
            break;
        }
        let pattern = Pattern::ALL[layer % 4];
        let mut busy = vec![false; n];
        for cp in layout.couplings.iter().filter(|cp| cp.pattern == pattern) {
            let a = layout.ancilla_qubit(cp.ancilla);
            c.cz(t, cp.data, a, Some(pattern));
            busy[cp.data] = true;
            busy[a] = true;
        }
        for q in (0..n).filter(|&q| !busy[q]) {
            c.idle(t, q, twoq_ns);
        }
        t += 1;
    }
    for q in 0..n {
        c.measure(t, q);
    }
    c.validate()?;
    Ok(c)
}

/// Output distribution of the noiseless circuit, indexed with qubit `q` at bit `q`.
pub fn ideal_probabilities(circuit: &Circuit) -> Result<Vec<f64>> {
    let mut sv = StateVector::new(circuit.n_qubits())?;
    for timed in circuit.ops() {
        match &timed.op {
            Instruction::MeasureZ { .. } | Instruction::Noise { .. } => {}
            op => sv.apply(op)?,
        }
    }
    Ok(sv.probabilities())
}

/// Draws `count` outcomes from `probs` by inverse-CDF lookup.
pub fn sample_distribution<R: Rng + ?Sized>(probs: &[f64], count: usize, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(probs.len() - 1) as u64
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebResult {
    pub fidelity: f64,
    pub samples: usize,
    pub stderr: f64,
    pub predicted: Option<f64>,
}

/// `F = 2^n ⟨P(x_i)⟩ - 1`.
pub fn xeb_fidelity(samples: &[u64], ideal: &[f64], n: usize) -> Result<XebResult> {
    if samples.is_empty() {
        return Err(Error::data("XEB needs at least one sample"));
    }
    if ideal.len() != 1 << n {
        return Err(Error::data(format!("probability table has {} entries for {n} qubits", ideal.len())));
    }
    let total: f64 = ideal.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::data(format!("probability table sums to {total}")));
    }
    let mut mean = 0.0;
    for &x in samples {
        mean += *ideal.get(x as usize).ok_or_else(|| Error::data(format!("sample {x} out of range")))?;
    }
    mean /= samples.len() as f64;
    Ok(XebResult {
        fidelity: (1u64 << n) as f64 * mean - 1.0,
        samples: samples.len(),
        stderr: 1.0 / (samples.len() as f64).sqrt(),
        predicted: None,
    })
}

/// Product of `1 - p` over every gate, idle and readout of `circuit`, where `p`
/// is the total error probability of the channel the noise model would attach.
pub fn predicted_fidelity(cal: &CalibrationTable, circuit: &Circuit, convention: ErrorConvention) -> Result<f64> {
    let qubit = |q: usize| {
        let name = circuit.name(q);
        cal.qubit(name).ok_or_else(|| Error::calibration(format!("qubit {name}"), "not in calibration table"))
    };
    let mut f = 1.0;
    for timed in circuit.ops() {
        let p = match &timed.op {
            Instruction::Rot { qubit: q, .. } => depolarizing_from_avg_error(qubit(*q)?.e1, 1, convention)?.total(),
            Instruction::Cz { a, b, pattern } => {
                let (na, nb) = (circuit.name(*a), circuit.name(*b));
                let e = match cal.cz_entry(na, nb) {
                    Some(entry) => entry.e2,
                    None => pattern
                        .and_then(|p| cal.pattern_average(p))
                        .ok_or_else(|| Error::UnknownPair(na.to_string(), nb.to_string()))?,
                };
                depolarizing_from_avg_error(e, 2, convention)?.total()
            }
            Instruction::Idle { qubit: q, duration_ns } => {
                let params = qubit(*q)?;
                idle_channel(duration_ns / 1000.0, params.t1_us, params.t2_echo_us)?.total()
            }
            Instruction::MeasureZ { qubit: q, .. } => {
                let params = qubit(*q)?;
                ((1.0 - params.f00) + (1.0 - params.f11)) / 2.0
            }
            Instruction::Noise { .. } => 0.0,
        };
        f *= 1.0 - p;
    }
    Ok(f)
}

/// Per-qubit readout flip probabilities `(p01, p10)` attached by the noise model.
fn readout_flips(noisy: &Circuit, model: &NoiseModel) -> Result<Vec<(f64, f64)>> {
    let mut flips = vec![(0.0, 0.0); noisy.n_qubits()];
    for timed in noisy.ops() {
        if let Instruction::Noise { channel, qubits } = &timed.op {
            if let Channel::Readout(r) = model.channel(*channel)? {
                flips[qubits[0]] = (r.p01, r.p10);
            }
        }
    }
    Ok(flips)
}

fn apply_readout<R: Rng + ?Sized>(samples: &mut [u64], flips: &[(f64, f64)], rng: &mut R) {
    for x in samples.iter_mut() {
        for (q, &(p01, p10)) in flips.iter().enumerate() {
            let p = if *x >> q & 1 == 1 { p10 } else { p01 };
            if p > 0.0 && rng.random::<f64>() < p {
                *x ^= 1 << q;
            }
        }
    }
}

/// Probability that no Pauli channel of the circuit fires.
pub fn no_error_probability(noisy: &Circuit, model: &NoiseModel) -> Result<f64> {
    let mut p0 = 1.0;
    for timed in noisy.ops() {
        if let Instruction::Noise { channel, .. } = &timed.op {
            if let Channel::Pauli(ch) = model.channel(*channel)? {
                p0 *= 1.0 - ch.total();
            }
        }
    }
    Ok(p0)
}

/// One noisy trajectory with at least one Pauli error, then `count` readouts
/// sampled from the resulting state with readout flips.
fn error_trajectory(
    noisy: &Circuit,
    model: &NoiseModel,
    flips: &[(f64, f64)],
    seed: u64,
    index: u64,
    count: usize,
) -> Result<Vec<u64>> {
    let n = noisy.n_qubits();
    let mut rng = stream_rng(seed, index);
    let events = loop {
        let mut events = Vec::new();
        for (i, timed) in noisy.ops().iter().enumerate() {
            if let Instruction::Noise { channel, .. } = &timed.op {
                if let Channel::Pauli(ch) = model.channel(*channel)? {
                    if let Some(term) = ch.sample(&mut rng) {
                        events.push((i, term.to_vec()));
                    }
                }
            }
        }
        if !events.is_empty() {
            break events;
        }
    };
    let mut sv = StateVector::new(n)?;
    let mut next = events.iter().peekable();
    for (i, timed) in noisy.ops().iter().enumerate() {
        match &timed.op {
            Instruction::MeasureZ { .. } => {}
            Instruction::Noise { qubits, .. } => {
                if let Some((_, term)) = next.next_if(|(j, _)| *j == i) {
                    sv.inject_pauli(&PauliChannel::embed(term, qubits, n))?;
                }
            }
            op => sv.apply(op)?,
        }
    }
    let mut out = sample_distribution(&sv.probabilities(), count, &mut rng);
    apply_readout(&mut out, flips, &mut rng);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebConfig {
    pub samples: usize,
    /// Independent noise realizations per circuit; samples are split evenly.
    pub trajectories: usize,
    pub noise: Option<NoiseOptions>,
}

impl Default for XebConfig {
    fn default() -> Self {
        XebConfig { samples: 100_000, trajectories: 100, noise: Some(NoiseOptions::default()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebSeedResult {
    pub seed: u64,
    pub result: XebResult,
}

/// Generates the circuit for `seed`, samples it (noisy or not) and scores the samples.
pub fn run_xeb(layout: &CodeLayout, cal: &CalibrationTable, seed: u64, cfg: &XebConfig) -> Result<XebSeedResult> {
    if cfg.samples == 0 || cfg.trajectories == 0 {
        return Err(Error::invalid("XEB needs a positive sample and trajectory count"));
    }
    let circuit = generate_random_circuit(layout, seed, cal.durations_ns.twoq)?;
    let ideal = ideal_probabilities(&circuit)?;
    let sample_seed = derive_seed(seed, "xeb/samples");
    let (samples, predicted) = match &cfg.noise {
        None => {
            let mut rng = stream_rng(sample_seed, 0);
            (sample_distribution(&ideal, cfg.samples, &mut rng), None)
        }
        Some(opts) => {
            let (noisy, model) = attach_noise(&circuit, cal, opts)?;
            let flips = readout_flips(&noisy, &model)?;
            // Proportional allocation: the error-free share of the samples comes
            // straight from the ideal distribution, the rest from trajectories
            // that contain at least one Pauli error.
            let p0 = no_error_probability(&noisy, &model)?;
            let clean = ((cfg.samples as f64) * p0).round() as usize;
            let rest = cfg.samples - clean;
            let mut rng = stream_rng(derive_seed(seed, "xeb/clean"), 0);
            let mut samples = sample_distribution(&ideal, clean, &mut rng);
            apply_readout(&mut samples, &flips, &mut rng);
            let t = cfg.trajectories.min(rest.max(1));
            let parts: Vec<Result<Vec<u64>>> = (0..t)
                .into_par_iter()
                .map(|i| {
                    let count = rest / t + usize::from(i < rest % t);
                    if count == 0 {
                        return Ok(Vec::new());
                    }
                    error_trajectory(&noisy, &model, &flips, sample_seed, i as u64, count)
                })
                .collect();
            for p in parts {
                samples.extend(p?);
            }
            (samples, Some(predicted_fidelity(cal, &circuit, opts.convention)?))
        }
    };
    let mut result = xeb_fidelity(&samples, &ideal, circuit.n_qubits())?;
    result.predicted = predicted;
    Ok(XebSeedResult { seed, result })
}

pub fn xeb_csv(results: &[XebSeedResult]) -> String {
    let mut out = String::from("seed,fidelity,stderr,samples,predicted\n");
    for r in results {
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{}\n",
            r.seed,
            r.result.fidelity,
            r.result.stderr,
            r.result.samples,
            r.result.predicted.map_or(String::new(), |p| format!("{p:.6}"))
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure() {
        let layout = CodeLayout::new(3).unwrap();
        let c = generate_random_circuit(&layout, 5, 32.0).unwrap();
        assert_eq!(c.count_cz(), 120);
        assert_eq!(c.count_rotations(), 17 * 21);
        assert_eq!(c.depth(), Some(41));
        let mut per_qubit: Vec<Vec<Axis>> = vec![Vec::new(); 17];
        let mut patterns = Vec::new();
        for op in c.ops() {
            match op.op {
                Instruction::Rot { qubit, axis, .. } => per_qubit[qubit].push(axis),
                Instruction::Cz { pattern, .. } if op.t % 2 == 1 => {
                    if patterns.last() != Some(&(op.t, pattern)) {
                        patterns.push((op.t, pattern));
                    }
                }
                _ => {}
            }
        }
        for seq in &per_qubit {
            assert_eq!(seq.len(), 21);
            assert!(seq.windows(2).all(|w| w[0] != w[1]));
        }
        for (i, (_, p)) in patterns.iter().enumerate() {
            assert_eq!(*p, Some(Pattern::ALL[i % 4]));
        }
        assert_ne!(c, generate_random_circuit(&layout, 6, 32.0).unwrap());
        assert_eq!(c, generate_random_circuit(&layout, 5, 32.0).unwrap());
    }

    #[test]
    fn uniform_samples_score_zero() {
        let n = 10;
        let probs = vec![1.0 / 1024.0; 1024];
        let samples: Vec<u64> = (0..5000).map(|i| (i * 37 % 1024) as u64).collect();
        let r = xeb_fidelity(&samples, &probs, n).unwrap();
        assert!(r.fidelity.abs() < 1e-12);
        assert!(xeb_fidelity(&[], &probs, n).is_err());
        assert!(xeb_fidelity(&[0], &[0.5, 0.4], 1).is_err());
    }

    #[test]
    fn single_gate_prediction() {
        let mut cal = CalibrationTable::default_table().scaled(0.0).unwrap();
        assert!(cal.qubits.iter().all(|q| q.e1 == 0.0));
        cal.qubits[0].e1 = 0.001;
        let mut c = Circuit::new(vec![cal.qubits[0].name.clone()]);
        c.rot(0, 0, Axis::X, Angle::HalfPi);
        let f = predicted_fidelity(&cal, &c, ErrorConvention::AverageInfidelity).unwrap();
        assert!((f - 0.9985).abs() < 1e-12);
    }
}
