//! Dense statevector engine.
//!
//! Amplitude index bit `q` is the computational value of qubit `q`.

use num_complex::Complex64;
use rand::Rng;

use crate::circuit::{Angle, Axis, Instruction, Qubit};
use crate::error::{Error, Result};
use crate::sim::pauli::{Pauli, PauliString};

pub const DEFAULT_QUBIT_CAP: usize = 24;

type Mat2 = [[Complex64; 2]; 2];

#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

/// `exp(-i θ/2 n·σ)` for the rotation axis `n`.
pub fn rotation_matrix(axis: Axis, angle: Angle) -> Mat2 {
    let theta = angle.radians();
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    let (nx, ny, nz) = match axis {
        Axis::X => (1.0, 0.0, 0.0),
        Axis::Y => (0.0, 1.0, 0.0),
        Axis::Z => (0.0, 0.0, 1.0),
        Axis::XY => (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0),
    };
    let mi = Complex64::new(0.0, -s);
    // n·σ = [[nz, nx - i ny], [nx + i ny, -nz]]
    [
        [c + mi * nz, mi * Complex64::new(nx, -ny)],
        [mi * Complex64::new(nx, ny), c - mi * nz],
    ]
}

fn pauli_matrix(p: Pauli) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

impl StateVector {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("statevector needs at least one qubit"));
        }
        if n > cap {
            return Err(Error::Resource(format!("{n} qubits exceeds the statevector cap of {cap}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, q: Qubit) -> Result<()> {
        if q >= self.n {
            Err(Error::invalid(format!("qubit {q} out of range for {}-qubit statevector", self.n)))
        } else {
            Ok(())
        }
    }

    pub fn apply_1q(&mut self, q: Qubit, m: &Mat2) -> Result<()> {
        self.check(q)?;
        let bit = 1usize << q;
        let [[m00, m01], [m10, m11]] = *m;
        for block in self.amps.chunks_exact_mut(bit << 1) {
            let (lo, hi) = block.split_at_mut(bit);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a0, *a1);
                *a0 = m00 * x + m01 * y;
                *a1 = m10 * x + m11 * y;
            }
        }
        Ok(())
    }

    pub fn rotate(&mut self, q: Qubit, axis: Axis, angle: Angle) -> Result<()> {
        self.apply_1q(q, &rotation_matrix(axis, angle))
    }

    pub fn cz(&mut self, a: Qubit, b: Qubit) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::invalid("CZ needs two distinct qubits"));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (lo_bit, hi_bit) = (1usize << lo, 1usize << hi);
        // Blocks of the higher qubit set, then runs of the lower one inside them.
        for outer in self.amps.chunks_exact_mut(hi_bit << 1) {
            for inner in outer[hi_bit..].chunks_exact_mut(lo_bit << 1) {
                for amp in &mut inner[lo_bit..] {
                    *amp = -*amp;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, op: &Instruction) -> Result<()> {
        match *op {
            Instruction::Rot { qubit, axis, angle } => self.rotate(qubit, axis, angle),
            Instruction::Cz { a, b, .. } => self.cz(a, b),
            Instruction::Idle { qubit, .. } => self.check(qubit),
            Instruction::Noise { .. } => Ok(()),
            Instruction::MeasureZ { .. } => Err(Error::invalid("measurements go through measure_z")),
        }
    }

    pub fn inject_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::invalid("Pauli length does not match statevector"));
        }
        for q in 0..self.n {
            let f = p.get(q);
            if f != Pauli::I {
                self.apply_1q(q, &pauli_matrix(f))?;
            }
        }
        Ok(())
    }

    pub fn prob_one(&self, q: Qubit) -> Result<f64> {
        self.check(q)?;
        let bit = 1usize << q;
        Ok(self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum())
    }

    /// Projective Z measurement with collapse and renormalization.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: Qubit, rng: &mut R) -> Result<bool> {
        let p1 = self.prob_one(q)?;
        let outcome = rng.random::<f64>() < p1;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / keep.sqrt();
        let bit = 1usize << q;
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(StateVector::with_cap(5, 4), Err(Error::Resource(_))));
        assert!(StateVector::new(0).is_err());
    }

    #[test]
    fn two_half_x_rotations_flip() {
        let mut s = StateVector::new(1).unwrap();
        s.rotate(0, Axis::X, Angle::HalfPi).unwrap();
        s.rotate(0, Axis::X, Angle::HalfPi).unwrap();
        assert!((s.prob_one(0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_rotation_entries() {
        let m = rotation_matrix(Axis::XY, Angle::HalfPi);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[0][0] - Complex64::new(h, 0.0)).norm() < 1e-12);
        assert!((m[0][1] - Complex64::new(-0.5, -0.5)).norm() < 1e-12);
        assert!((m[1][0] - Complex64::new(0.5, -0.5)).norm() < 1e-12);
        assert!((m[1][1] - Complex64::new(h, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn norm_is_preserved() {
        let mut s = StateVector::new(3).unwrap();
        for (q, axis) in [(0, Axis::XY), (1, Axis::X), (2, Axis::Y), (0, Axis::Y)] {
            s.rotate(q, axis, Angle::HalfPi).unwrap();
            s.cz(q, (q + 1) % 3).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn y_minus_half_then_measure() {
        // R_Y(-π/2) twice maps |0⟩ to |1⟩ up to phase.
        let mut s = StateVector::new(1).unwrap();
        s.rotate(0, Axis::Y, Angle::MinusHalfPi).unwrap();
        s.rotate(0, Axis::Y, Angle::MinusHalfPi).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(s.measure_z(0, &mut rng).unwrap());
    }

    #[test]
    fn measurement_collapses() {
        let mut s = StateVector::new(2).unwrap();
        s.rotate(0, Axis::Y, Angle::HalfPi).unwrap();
        let mut rng = stream_rng(3, 1);
        let first = s.measure_z(0, &mut rng).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(s.measure_z(0, &mut rng).unwrap(), first);
    }
}
