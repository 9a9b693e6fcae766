#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use surface_lab::circuit::{Angle, Axis, Circuit};
use surface_lab::sim::ShotBatch;

/// Random Clifford circuit on 1..=4 qubits with at most 20 instructions, at
/// most four of them measurements, at least one measurement overall.
///
/// Capping the record at four bits keeps the two-sample total-variation noise
/// at 10,000 shots near 0.02, well clear of the 0.05 tolerance.
pub fn random_clifford_circuit<R: Rng>(rng: &mut R) -> Circuit {
    let n = rng.random_range(1..=4usize);
    let len = rng.random_range(1..=20usize);
    let mut c = Circuit::anonymous(n);
    let mut measured = 0;
    for t in 0..len as u32 {
        let last = t as usize == len - 1;
        let roll = rng.random_range(0..10);
        if (roll < 2 || (last && measured == 0)) && measured < 4 {
            c.measure(t, rng.random_range(0..n));
            measured += 1;
        } else if roll < 5 && n > 1 {
            let a = rng.random_range(0..n);
            let b = (a + rng.random_range(1..n)) % n;
            c.cz(t, a, b, None);
        } else {
            let axis = [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)];
            let angle = match axis {
                Axis::Z => Angle::Pi,
                _ => [Angle::HalfPi, Angle::MinusHalfPi, Angle::Pi][rng.random_range(0..3)],
            };
            c.rot(t, rng.random_range(0..n), axis, angle);
        }
    }
    c
}

pub fn histogram(batch: &ShotBatch) -> HashMap<Vec<u8>, usize> {
    let mut h = HashMap::new();
    for s in 0..batch.shots() {
        *h.entry(batch.row(s).to_vec()).or_insert(0) += 1;
    }
    h
}

/// Total-variation distance between the empirical record distributions.
pub fn tv_distance(a: &ShotBatch, b: &ShotBatch) -> f64 {
    let (ha, hb) = (histogram(a), histogram(b));
    let (na, nb) = (a.shots() as f64, b.shots() as f64);
    let mut keys: Vec<&Vec<u8>> = ha.keys().chain(hb.keys()).collect();
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = *ha.get(k).unwrap_or(&0) as f64 / na;
            let pb = *hb.get(k).unwrap_or(&0) as f64 / nb;
            (pa - pb).abs()
        })
        .sum::<f64>()
}
