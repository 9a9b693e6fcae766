//! Stabilizer values, detection events, detection-event fractions and the
//! pairwise detection correlation matrix.
//!
//! Ancillas are never reset, so reading `m_r` of an ancilla is the running
//! XOR of its stabilizer outcomes. The stabilizer value of round `r` is
//! therefore `m_r ⊕ m_{r-1}` (with `m_0 = 0`), and after the last round the
//! plaquette parity of the final data readout provides one more value. A
//! detection event marks a change between consecutive values; the first
//! round is compared against an expected value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::run::ShotBatch;
use crate::surface_code::cycle::MemoryCircuit;
use crate::surface_code::layout::{Basis, CodeLayout};

const CHUNK: usize = 4096;

/// Stabilizer values of one ancilla: rounds `1..=n` from readings, then the data-parity value.
pub fn stabilizer_values(readings: &[bool], final_parity: bool) -> Vec<bool> {
    let mut out = Vec::with_capacity(readings.len() + 1);
    let mut prev = false;
    for &m in readings {
        out.push(m ^ prev);
        prev = m;
    }
    out.push(final_parity);
    out
}

/// Inverse of the XOR chain over the measured rounds (the data value is dropped).
pub fn reconstruct_readings(values: &[bool]) -> Vec<bool> {
    let n = values.len().saturating_sub(1);
    let mut out = Vec::with_capacity(n);
    let mut acc = false;
    for &v in &values[..n] {
        acc ^= v;
        out.push(acc);
    }
    out
}

pub fn detection_events(values: &[bool], expected_first: bool) -> Vec<bool> {
    let mut prev = expected_first;
    values
        .iter()
        .map(|&v| {
            let e = v ^ prev;
            prev = v;
            e
        })
        .collect()
}

/// Which ancillas contribute detectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Only the stabilizer type that is deterministic in the experiment basis.
    Consistent,
    All,
}

/// Detector indexing for one memory experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub basis: Basis,
    pub n_cycles: usize,
    /// Layout indices of the selected ancillas.
    pub ancillas: Vec<usize>,
    pub names: Vec<String>,
    supports: Vec<Vec<usize>>,
    ancilla_slots: Vec<Vec<usize>>,
    data_slots: Vec<usize>,
    logical_slots: Vec<usize>,
    pub expected_first: Vec<bool>,
    n_measurements: usize,
}

impl DetectorSpec {
    pub fn new(layout: &CodeLayout, memory: &MemoryCircuit, selection: Selection) -> Self {
        let ancillas: Vec<usize> = match selection {
            Selection::Consistent => layout.ancillas_of(memory.basis.consistent_kind()),
            Selection::All => (0..layout.n_ancillas()).collect(),
        };
        let r = &memory.records;
        DetectorSpec {
            basis: memory.basis,
            n_cycles: memory.n_cycles,
            names: ancillas.iter().map(|&a| layout.ancillas[a].name.clone()).collect(),
            supports: ancillas.iter().map(|&a| layout.ancillas[a].support.clone()).collect(),
            ancilla_slots: ancillas
                .iter()
                .map(|&a| (1..=memory.n_cycles).map(|round| r.ancilla_slot(round, a)).collect())
                .collect(),
            data_slots: (0..layout.n_data()).map(|q| r.data_slot(q)).collect(),
            logical_slots: layout.logical_support(memory.basis).iter().map(|&q| r.data_slot(q)).collect(),
            expected_first: vec![false; ancillas.len()],
            ancillas,
            n_measurements: r.n_measurements(),
        }
    }

    pub fn n_rounds(&self) -> usize {
        self.n_cycles + 1
    }

    pub fn n_selected(&self) -> usize {
        self.ancillas.len()
    }

    pub fn n_detectors(&self) -> usize {
        self.n_rounds() * self.n_selected()
    }

    /// Round-major detector index; `round` is 1-based and `k` indexes the selection.
    pub fn detector(&self, k: usize, round: usize) -> usize {
        (round - 1) * self.n_selected() + k
    }

    /// `(selection index, 1-based round)` of a detector.
    pub fn coords(&self, det: usize) -> (usize, usize) {
        (det % self.n_selected(), det / self.n_selected() + 1)
    }

    pub fn label(&self, det: usize) -> String {
        let (k, round) = self.coords(det);
        format!("{}@{}", self.names[k], round)
    }

    pub fn n_measurements(&self) -> usize {
        self.n_measurements
    }

    /// Stabilizer values (rounds × selection) of one shot given a bit accessor.
    pub fn values_of(&self, bit: impl Fn(usize) -> bool) -> Vec<Vec<bool>> {
        self.ancilla_slots
            .iter()
            .zip(&self.supports)
            .map(|(slots, support)| {
                let readings: Vec<bool> = slots.iter().map(|&s| bit(s)).collect();
                let parity = support.iter().fold(false, |acc, &q| acc ^ bit(self.data_slots[q]));
                stabilizer_values(&readings, parity)
            })
            .collect()
    }

    /// Detection events of one shot, round-major.
    pub fn events_of(&self, bit: impl Fn(usize) -> bool) -> Vec<bool> {
        self.events_against(bit, &self.expected_first)
    }

    fn events_against(&self, bit: impl Fn(usize) -> bool, expected_first: &[bool]) -> Vec<bool> {
        let per_anc: Vec<Vec<bool>> = self
            .values_of(bit)
            .iter()
            .zip(expected_first)
            .map(|(v, &e)| detection_events(v, e))
            .collect();
        let mut out = vec![false; self.n_detectors()];
        for (k, ev) in per_anc.iter().enumerate() {
            for (r, &e) in ev.iter().enumerate() {
                out[self.detector(k, r + 1)] = e;
            }
        }
        out
    }

    /// Parity of the final data readout over the logical support.
    pub fn raw_logical(&self, bit: impl Fn(usize) -> bool) -> bool {
        self.logical_slots.iter().fold(false, |acc, &s| acc ^ bit(s))
    }

    /// Detectors flipped by a set of flipped record slots (linear part of `events_of`).
    pub fn detectors_for_flips(&self, flipped: &[usize]) -> Vec<usize> {
        let mut mask = vec![false; self.n_measurements];
        for &s in flipped {
            mask[s] ^= true;
        }
        let zeros = vec![false; self.n_selected()];
        self.events_against(|s| mask[s], &zeros)
            .iter().enumerate().filter(|(_, e)| **e).map(|(i, _)| i).collect()
    }

    pub fn logical_for_flips(&self, flipped: &[usize]) -> bool {
        flipped.iter().filter(|s| self.logical_slots.contains(s)).count() % 2 == 1
    }
}

/// Detection events of many shots, packed one row of 64-bit words per shot.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionMatrix {
    spec: DetectorSpec,
    shots: usize,
    words: usize,
    rows: Vec<u64>,
    raw_logical: Vec<bool>,
}

impl DetectionMatrix {
    pub fn extract(batch: &ShotBatch, spec: &DetectorSpec) -> Result<Self> {
        if batch.n_measurements() != spec.n_measurements() {
            return Err(Error::data(format!(
                "shot length {} does not match the {} records of the memory circuit",
                batch.n_measurements(),
                spec.n_measurements()
            )));
        }
        let words = spec.n_detectors().div_ceil(64).max(1);
        let chunks: Vec<usize> = (0..batch.shots().div_ceil(CHUNK)).collect();
        let parts: Vec<(Vec<u64>, Vec<bool>)> = chunks
            .par_iter()
            .map(|&c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(batch.shots());
                let mut rows = vec![0u64; (hi - lo) * words];
                let mut logical = Vec::with_capacity(hi - lo);
                for (k, shot) in (lo..hi).enumerate() {
                    let bit = |s: usize| batch.bit(shot, s);
                    for (d, e) in spec.events_of(bit).into_iter().enumerate() {
                        rows[k * words + d / 64] |= u64::from(e) << (d % 64);
                    }
                    logical.push(spec.raw_logical(bit));
                }
                (rows, logical)
            })
            .collect();
        let mut rows = Vec::with_capacity(batch.shots() * words);
        let mut raw_logical = Vec::with_capacity(batch.shots());
        for (r, l) in parts {
            rows.extend(r);
            raw_logical.extend(l);
        }
        Ok(DetectionMatrix { spec: spec.clone(), shots: batch.shots(), words, rows, raw_logical })
    }

    pub fn spec(&self) -> &DetectorSpec {
        &self.spec
    }

    pub fn shots(&self) -> usize {
        self.shots
    }

    pub fn row(&self, shot: usize) -> &[u64] {
        &self.rows[shot * self.words..(shot + 1) * self.words]
    }

    pub fn event(&self, shot: usize, det: usize) -> bool {
        self.row(shot)[det / 64] >> (det % 64) & 1 == 1
    }

    pub fn fired(&self, shot: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.row(shot).iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn raw_logical(&self, shot: usize) -> bool {
        self.raw_logical[shot]
    }

    pub fn any_in_rounds(&self, shot: usize, rounds: std::ops::RangeInclusive<usize>) -> bool {
        let n = self.spec.n_selected();
        rounds.into_iter().any(|r| (0..n).any(|k| self.event(shot, self.spec.detector(k, r))))
    }
}

/// Fraction of shots with an event, per (selected ancilla, round).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefSeries {
    pub names: Vec<String>,
    pub n_rounds: usize,
    pub shots: usize,
    /// `fractions[k][r-1]`.
    pub fractions: Vec<Vec<f64>>,
}

impl DefSeries {
    pub fn get(&self, k: usize, round: usize) -> f64 {
        self.fractions[k][round - 1]
    }

    /// Mean over ancillas and the rounds strictly between the first and last.
    pub fn mid_round_mean(&self) -> f64 {
        let mids: Vec<f64> = self
            .fractions
            .iter()
            .flat_map(|f| f[1..self.n_rounds.saturating_sub(1)].iter().copied())
            .collect();
        if mids.is_empty() {
            f64::NAN
        } else {
            mids.iter().sum::<f64>() / mids.len() as f64
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ancilla,round,def,shots\n");
        for (k, name) in self.names.iter().enumerate() {
            for r in 1..=self.n_rounds {
                out.push_str(&format!("{name},{r},{:.6},{}\n", self.get(k, r), self.shots));
            }
        }
        out
    }
}

pub fn def_curve(m: &DetectionMatrix) -> Result<DefSeries> {
    if m.shots() == 0 {
        return Err(Error::data("detection-event fractions need at least one shot"));
    }
    let acc = CorrelationAccumulator::from_matrix(m);
    let spec = m.spec();
    let fractions = (0..spec.n_selected())
        .map(|k| {
            (1..=spec.n_rounds())
                .map(|r| acc.counts[spec.detector(k, r)] as f64 / m.shots() as f64)
                .collect()
        })
        .collect();
    Ok(DefSeries { names: spec.names.clone(), n_rounds: spec.n_rounds(), shots: m.shots(), fractions })
}

/// Event counts and pairwise coincidence counts. Merging is plain addition,
/// so shards can be combined in any grouping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorrelationAccumulator {
    pub n_detectors: usize,
    pub shots: u64,
    pub counts: Vec<u64>,
    /// Upper triangle including the diagonal, row-major.
    pub pairs: Vec<u64>,
}

impl CorrelationAccumulator {
    pub fn new(n_detectors: usize) -> Self {
        CorrelationAccumulator {
            n_detectors,
            shots: 0,
            counts: vec![0; n_detectors],
            pairs: vec![0; n_detectors * n_detectors],
        }
    }

    pub fn add(&mut self, fired: &[usize]) {
        self.shots += 1;
        for (i, &a) in fired.iter().enumerate() {
            self.counts[a] += 1;
            for &b in &fired[i + 1..] {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                self.pairs[lo * self.n_detectors + hi] += 1;
            }
        }
    }

    pub fn merge(mut self, other: &CorrelationAccumulator) -> Self {
        assert_eq!(self.n_detectors, other.n_detectors, "merging accumulators of different size");
        self.shots += other.shots;
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.pairs.iter_mut().zip(&other.pairs) {
            *a += b;
        }
        self
    }

    pub fn from_matrix(m: &DetectionMatrix) -> Self {
        let n = m.spec().n_detectors();
        let chunks: Vec<usize> = (0..m.shots().div_ceil(CHUNK)).collect();
        chunks
            .par_iter()
            .map(|&c| {
                let mut acc = CorrelationAccumulator::new(n);
                for shot in c * CHUNK..((c + 1) * CHUNK).min(m.shots()) {
                    acc.add(&m.fired(shot));
                }
                acc
            })
            .collect::<Vec<_>>()
            .iter()
            .fold(CorrelationAccumulator::new(n), |a, b| a.merge(b))
    }

    /// Pearson correlation of the event indicators with the diagonal removed.
    pub fn correlation(&self) -> Result<CorrelationMatrix> {
        if self.shots < 2 {
            return Err(Error::data("correlation needs at least two shots"));
        }
        let n = self.n_detectors;
        let s = self.shots as f64;
        let mean: Vec<f64> = self.counts.iter().map(|&c| c as f64 / s).collect();
        let var: Vec<f64> = mean.iter().map(|m| m - m * m).collect();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let denom = (var[i] * var[j]).sqrt();
                if denom <= 0.0 {
                    continue;
                }
                let cov = self.pairs[i * n + j] as f64 / s - mean[i] * mean[j];
                let r = (cov / denom).clamp(-1.0, 1.0);
                values[i * n + j] = r;
                values[j * n + i] = r;
            }
        }
        Ok(CorrelationMatrix { n, values, labels: Vec::new() })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub n: usize,
    /// Row-major.
    pub values: Vec<f64>,
    pub labels: Vec<String>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Copy with negative entries set to zero, for display.
    pub fn clamped(&self) -> Self {
        CorrelationMatrix { values: self.values.iter().map(|v| v.max(0.0)).collect(), ..self.clone() }
    }

    pub fn to_csv(&self) -> String {
        let label = |i: usize| self.labels.get(i).cloned().unwrap_or_else(|| i.to_string());
        let mut out = String::from("detector");
        for j in 0..self.n {
            out.push(',');
            out.push_str(&label(j));
        }
        out.push('\n');
        for i in 0..self.n {
            out.push_str(&label(i));
            for j in 0..self.n {
                out.push_str(&format!(",{:.6}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

pub fn correlation_matrix(m: &DetectionMatrix) -> Result<CorrelationMatrix> {
    let mut c = CorrelationAccumulator::from_matrix(m).correlation()?;
    c.labels = (0..m.spec().n_detectors()).map(|d| m.spec().label(d)).collect();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn xor_chain() {
        assert_eq!(stabilizer_values(&bits("11001"), false), bits("101010"));
        assert_eq!(&stabilizer_values(&bits("11001"), true)[..5], &bits("10101")[..]);
    }

    #[test]
    fn chain_inverts() {
        let readings = bits("0110100111");
        assert_eq!(reconstruct_readings(&stabilizer_values(&readings, true)), readings);
    }

    #[test]
    fn events_examples() {
        assert_eq!(detection_events(&bits("00000"), false), bits("00000"));
        assert_eq!(detection_events(&bits("00110"), false), bits("00101"));
        assert_eq!(detection_events(&bits("10"), true), bits("01"));
    }

    #[test]
    fn readout_flip_signature() {
        // A flipped reading at round k changes values k and k+1, so events fire at k and k+2.
        let n = 5;
        for k in 0..n {
            let mut readings = vec![false; n];
            readings[k] = true;
            let ev = detection_events(&stabilizer_values(&readings, false), false);
            let fired: Vec<usize> = ev.iter().enumerate().filter(|(_, e)| **e).map(|(i, _)| i + 1).collect();
            let expect = if k + 1 == n { vec![n, n + 1] } else { vec![k + 1, k + 3] };
            assert_eq!(fired, expect, "flip at round {}", k + 1);
        }
    }

    #[test]
    fn accumulator_identical_columns() {
        let mut acc = CorrelationAccumulator::new(3);
        for s in 0..100 {
            if s % 3 == 0 {
                acc.add(&[0, 1]);
            } else {
                acc.add(&[]);
            }
        }
        let c = acc.correlation().unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-12);
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(2, 0), 0.0);
        assert!(CorrelationAccumulator::new(2).correlation().is_err());
    }

    #[test]
    fn accumulator_merge_is_associative() {
        let mut a = CorrelationAccumulator::new(4);
        let mut b = CorrelationAccumulator::new(4);
        let mut c = CorrelationAccumulator::new(4);
        a.add(&[0, 2]);
        b.add(&[1, 2, 3]);
        c.add(&[3]);
        let left = a.clone().merge(&b).merge(&c);
        let right = a.merge(&b.merge(&c));
        assert_eq!(left, right);
    }
}
