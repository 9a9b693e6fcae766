//! Conversion of calibration numbers into channels and their placement in a circuit.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Instruction, Timed};
use crate::error::{Error, Result};
use crate::noise::calibration::CalibrationTable;
use crate::noise::channels::{Channel, LocationClass, NoiseModel, PauliChannel, PauliTerm, ReadoutFlip};
use crate::sim::pauli::Pauli;

/// How a benchmarked average gate error becomes a depolarizing probability.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorConvention {
    /// `e` is an average gate infidelity: `p = e·(d+1)/d` with `d = 2^k`.
    #[default]
    AverageInfidelity,
    /// `e` is already the total Pauli error probability.
    PauliError,
}

pub fn depolarizing_from_avg_error(e: f64, k: usize, convention: ErrorConvention) -> Result<PauliChannel> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::invalid(format!("average error {e} outside [0, 1)")));
    }
    if !(k == 1 || k == 2) {
        return Err(Error::invalid(format!("depolarizing conversion supports 1 or 2 qubits, got {k}")));
    }
    let p = match convention {
        ErrorConvention::AverageInfidelity => {
            let d = (1usize << k) as f64;
            e * (d + 1.0) / d
        }
        ErrorConvention::PauliError => e,
    };
    PauliChannel::depolarizing(k, p.min(1.0))
}

/// Pauli twirl of amplitude and phase damping over `t_us` microseconds.
pub fn idle_channel(t_us: f64, t1_us: f64, t2_us: f64) -> Result<PauliChannel> {
    if !(t_us >= 0.0) {
        return Err(Error::invalid(format!("idle duration {t_us} must be non-negative")));
    }
    if !(t1_us > 0.0 && t2_us > 0.0) {
        return Err(Error::invalid("coherence times must be positive"));
    }
    let px = (1.0 - (-t_us / t1_us).exp()) / 4.0;
    let raw_z = (1.0 - (-t_us / t2_us).exp()) / 2.0 - px;
    if raw_z < 0.0 {
        log::debug!("idle p_Z clamped from {raw_z:.3e} to 0 (t={t_us} us, T1={t1_us}, T2={t2_us})");
    }
    let pz = raw_z.max(0.0);
    PauliChannel::new(
        1,
        vec![
            PauliTerm { paulis: vec![Pauli::X], p: px },
            PauliTerm { paulis: vec![Pauli::Y], p: px },
            PauliTerm { paulis: vec![Pauli::Z], p: pz },
        ],
    )
}

pub fn readout_flip(f00: f64, f11: f64) -> Result<ReadoutFlip> {
    for (name, f) in [("F00", f00), ("F11", f11)] {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(format!("{name} = {f} outside (0, 1]")));
        }
    }
    Ok(ReadoutFlip { p01: 1.0 - f00, p10: 1.0 - f11 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseOptions {
    pub convention: ErrorConvention,
    pub gates: bool,
    pub idle: bool,
    pub readout: bool,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        NoiseOptions { convention: ErrorConvention::default(), gates: true, idle: true, readout: true }
    }
}

/// Inserts a `NOISE` instruction after every gate, idle and measurement of
/// `circuit` and returns the annotated circuit with its channel table.
///
/// Channels with identical parameters share one table entry.
pub fn attach_noise(circuit: &Circuit, cal: &CalibrationTable, opts: &NoiseOptions) -> Result<(Circuit, NoiseModel)> {
    let lookup = |q: usize| {
        let name = circuit.name(q);
        cal.qubit(name).ok_or_else(|| Error::calibration(format!("qubit {name}"), "not in calibration table"))
    };
    let mut model = NoiseModel::new();
    let mut cache: HashMap<String, usize> = HashMap::new();
    let mut intern = |key: String, class: LocationClass, channel: Channel| -> usize {
        *cache.entry(key).or_insert_with(|| model.add(class, channel))
    };
    let mut out = Circuit::new(circuit.names().to_vec());
    for timed in circuit.ops() {
        out.push(timed.clone())?;
        let t = timed.t;
        let noise = match &timed.op {
            Instruction::Rot { qubit, .. } if opts.gates => {
                let e = lookup(*qubit)?.e1;
                let ch = depolarizing_from_avg_error(e, 1, opts.convention)?;
                let id = intern(
                    format!("1q:{e}:{:?}", opts.convention),
                    LocationClass::AfterOneQubitGate { qubit: *qubit },
                    Channel::Pauli(ch),
                );
                Some((id, vec![*qubit]))
            }
            Instruction::Cz { a, b, pattern } if opts.gates => {
                let (na, nb) = (circuit.name(*a), circuit.name(*b));
                let e = match cal.cz_entry(na, nb) {
                    Some(entry) => entry.e2,
                    None => pattern
                        .and_then(|p| cal.pattern_average(p))
                        .ok_or_else(|| Error::UnknownPair(na.to_string(), nb.to_string()))?,
                };
                let ch = depolarizing_from_avg_error(e, 2, opts.convention)?;
                let id = intern(
                    format!("cz:{e}:{:?}", opts.convention),
                    LocationClass::AfterCz { pattern: *pattern, a: *a, b: *b },
                    Channel::Pauli(ch),
                );
                Some((id, vec![*a, *b]))
            }
            Instruction::Idle { qubit, duration_ns } if opts.idle => {
                let p = lookup(*qubit)?;
                let ch = idle_channel(duration_ns / 1000.0, p.t1_us, p.t2_echo_us)?;
                let id = intern(
                    format!("idle:{duration_ns}:{}:{}", p.t1_us, p.t2_echo_us),
                    LocationClass::Idle { qubit: *qubit, duration_ns: *duration_ns },
                    Channel::Pauli(ch),
                );
                Some((id, vec![*qubit]))
            }
            Instruction::MeasureZ { qubit, .. } if opts.readout => {
                let p = lookup(*qubit)?;
                let flip = readout_flip(p.f00, p.f11)?;
                let id = intern(
                    format!("ro:{}:{}", p.f00, p.f11),
                    LocationClass::Readout { qubit: *qubit },
                    Channel::Readout(flip),
                );
                Some((id, vec![*qubit]))
            }
            _ => None,
        };
        if let Some((channel, qubits)) = noise {
            out.push(Timed { t, op: Instruction::Noise { channel, qubits } })?;
        }
    }
    Ok((out, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Angle, Axis, Pattern};

    #[test]
    fn conversion_values() {
        let one = depolarizing_from_avg_error(0.00098, 1, ErrorConvention::AverageInfidelity).unwrap();
        assert!((one.total() - 0.00147).abs() < 1e-12);
        assert!((one.prob_of(&[Pauli::Y]) - 0.00049).abs() < 1e-12);
        let two = depolarizing_from_avg_error(0.01035, 2, ErrorConvention::AverageInfidelity).unwrap();
        assert!((two.total() - 0.0129375).abs() < 1e-12);
        assert_eq!(two.terms().len(), 15);
        let raw = depolarizing_from_avg_error(0.01, 1, ErrorConvention::PauliError).unwrap();
        assert!((raw.total() - 0.01).abs() < 1e-15);
        assert!(depolarizing_from_avg_error(0.0, 1, ErrorConvention::AverageInfidelity).unwrap().is_identity());
        assert!(depolarizing_from_avg_error(1.0, 1, ErrorConvention::AverageInfidelity).is_err());
    }

    #[test]
    fn idle_values() {
        let ch = idle_channel(3.9, 28.4, 5.3).unwrap();
        assert!((ch.prob_of(&[Pauli::X]) - 0.0321).abs() < 5e-4);
        assert!((ch.prob_of(&[Pauli::Z]) - 0.228).abs() < 1e-3);
        assert!(idle_channel(0.0, 28.4, 5.3).unwrap().is_identity());
        let inf = idle_channel(1e9, 10.0, 5.0).unwrap();
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            assert!((inf.prob_of(&[p]) - 0.25).abs() < 1e-12);
        }
        assert!(idle_channel(-1.0, 1.0, 1.0).is_err());
        // T2 > 2 T1 is unphysical and makes the raw p_Z negative.
        assert_eq!(idle_channel(1.0, 10.0, 30.0).unwrap().prob_of(&[Pauli::Z]), 0.0);
    }

    #[test]
    fn readout_values() {
        let r = readout_flip(0.977, 0.928).unwrap();
        assert!((r.p01 - 0.023).abs() < 1e-12 && (r.p10 - 0.072).abs() < 1e-12);
        assert!(readout_flip(1.0, 1.0).unwrap().is_identity());
        assert!(readout_flip(0.0, 1.0).is_err());
    }

    #[test]
    fn every_measurement_gets_one_flip() {
        let cal = CalibrationTable::default_table();
        let mut c = Circuit::new(vec!["D1".into(), "Z1".into()]);
        c.rot(0, 1, Axis::Y, Angle::HalfPi);
        c.idle(0, 0, 25.0);
        c.cz(1, 0, 1, Some(Pattern::A));
        c.measure(2, 1);
        let (noisy, model) = attach_noise(&c, &cal, &NoiseOptions::default()).unwrap();
        assert_eq!(noisy.ops().len(), 8);
        let readouts = model.entries().iter().filter(|e| matches!(e.channel, Channel::Readout(_))).count();
        assert_eq!(readouts, 1);
        noisy.validate().unwrap();
    }

    #[test]
    fn unknown_pair_without_pattern() {
        let cal = CalibrationTable::default_table();
        let mut c = Circuit::new(vec!["D1".into(), "D9".into()]);
        c.cz(0, 0, 1, None);
        assert!(matches!(attach_noise(&c, &cal, &NoiseOptions::default()), Err(Error::UnknownPair(..))));
        let mut c = Circuit::new(vec!["D1".into(), "D9".into()]);
        c.cz(0, 0, 1, Some(Pattern::C));
        assert!(attach_noise(&c, &cal, &NoiseOptions::default()).is_ok());
    }
}
