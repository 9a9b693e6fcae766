use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Pattern, Qubit};
use crate::error::{Error, Result};
use crate::sim::pauli::{Pauli, PauliString};

/// Probability tolerance when checking that a channel sums to at most one.
const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub paulis: Vec<Pauli>,
    pub p: f64,
}

/// Stochastic Pauli channel on `arity` qubits. The identity takes the remaining probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    arity: usize,
    terms: Vec<PauliTerm>,
}

impl PauliChannel {
    pub fn identity(arity: usize) -> Self {
        PauliChannel { arity, terms: Vec::new() }
    }

    pub fn new(arity: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("channel arity must be positive"));
        }
        let mut total = 0.0;
        for t in &terms {
            if t.paulis.len() != arity {
                return Err(Error::invalid("Pauli term length does not match channel arity"));
            }
            if t.paulis.iter().all(|&p| p == Pauli::I) {
                return Err(Error::invalid("identity term in channel table"));
            }
            if !(t.p >= 0.0 && t.p.is_finite()) {
                return Err(Error::invalid(format!("bad term probability {}", t.p)));
            }
            total += t.p;
        }
        if total > 1.0 + SUM_TOL {
            return Err(Error::invalid(format!("channel probabilities sum to {total} > 1")));
        }
        let terms = terms.into_iter().filter(|t| t.p > 0.0).collect();
        Ok(PauliChannel { arity, terms })
    }

    /// Uniform depolarizing channel with total non-identity probability `p`.
    pub fn depolarizing(arity: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("depolarizing probability {p} outside [0, 1]")));
        }
        let count = 4usize.pow(arity as u32) - 1;
        let mut terms = Vec::with_capacity(count);
        for code in 1..=count {
            let paulis = (0..arity)
                .map(|k| match (code >> (2 * k)) & 3 {
                    0 => Pauli::I,
                    1 => Pauli::X,
                    2 => Pauli::Y,
                    _ => Pauli::Z,
                })
                .collect();
            terms.push(PauliTerm { paulis, p: p / count as f64 });
        }
        PauliChannel::new(arity, terms)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn total(&self) -> f64 {
        self.terms.iter().map(|t| t.p).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    /// Probability of the given single-qubit component, zero if absent.
    pub fn prob_of(&self, paulis: &[Pauli]) -> f64 {
        self.terms.iter().filter(|t| t.paulis == paulis).map(|t| t.p).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&[Pauli]> {
        let mut u: f64 = rng.random();
        for t in &self.terms {
            if u < t.p {
                return Some(&t.paulis);
            }
            u -= t.p;
        }
        None
    }

    /// The sampled term placed on `qubits` of an `n`-qubit register.
    pub fn embed(paulis: &[Pauli], qubits: &[Qubit], n: usize) -> PauliString {
        let mut s = PauliString::identity(n);
        for (&q, &p) in qubits.iter().zip(paulis) {
            s.set(q, p);
        }
        s
    }
}

/// Classical assignment error applied to the reported bit only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutFlip {
    /// Probability of reporting 1 when the qubit is in 0.
    pub p01: f64,
    /// Probability of reporting 0 when the qubit is in 1.
    pub p10: f64,
}

impl ReadoutFlip {
    pub fn none() -> Self {
        ReadoutFlip { p01: 0.0, p10: 0.0 }
    }

    pub fn flip_probability(&self, true_bit: bool) -> f64 {
        if true_bit {
            self.p10
        } else {
            self.p01
        }
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.p01 + self.p10)
    }

    pub fn is_identity(&self) -> bool {
        self.p01 == 0.0 && self.p10 == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Channel {
    Pauli(PauliChannel),
    Readout(ReadoutFlip),
}

/// Where in the circuit a channel was attached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LocationClass {
    AfterOneQubitGate { qubit: Qubit },
    AfterCz { pattern: Option<Pattern>, a: Qubit, b: Qubit },
    Idle { qubit: Qubit, duration_ns: f64 },
    Readout { qubit: Qubit },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub class: LocationClass,
    pub channel: Channel,
}

/// Channel table referenced by the `NOISE[id]` instructions of a compiled circuit.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    entries: Vec<ChannelEntry>,
}

impl NoiseModel {
    pub fn new() -> Self {
        NoiseModel::default()
    }

    pub fn add(&mut self, class: LocationClass, channel: Channel) -> usize {
        self.entries.push(ChannelEntry { class, channel });
        self.entries.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ChannelEntry] {
        &self.entries
    }

    pub fn channel(&self, id: usize) -> Result<&Channel> {
        self.entries.get(id).map(|e| &e.channel).ok_or(Error::MissingChannel(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn depolarizing_splits_evenly() {
        let ch = PauliChannel::depolarizing(2, 0.15).unwrap();
        assert_eq!(ch.terms().len(), 15);
        assert!(ch.terms().iter().all(|t| (t.p - 0.01).abs() < 1e-15));
        assert!((ch.total() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_gives_identity() {
        assert!(PauliChannel::depolarizing(1, 0.0).unwrap().is_identity());
    }

    #[test]
    fn oversubscribed_channel_rejected() {
        let terms = vec![
            PauliTerm { paulis: vec![Pauli::X], p: 0.6 },
            PauliTerm { paulis: vec![Pauli::Z], p: 0.6 },
        ];
        assert!(PauliChannel::new(1, terms).is_err());
    }

    #[test]
    fn sampling_frequency() {
        let ch = PauliChannel::depolarizing(1, 0.3).unwrap();
        let mut rng = stream_rng(5, 0);
        let hits = (0..100_000).filter(|_| ch.sample(&mut rng).is_some()).count();
        assert!((hits as f64 / 1e5 - 0.3).abs() < 0.01);
    }

    #[test]
    fn missing_channel_id() {
        assert!(matches!(NoiseModel::new().channel(3), Err(Error::MissingChannel(3))));
    }
}
