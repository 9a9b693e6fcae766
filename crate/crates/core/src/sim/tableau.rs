//! Stabilizer tableau with destabilizer bookkeeping.
//!
//! Rows `0..n` hold destabilizers and rows `n..2n` stabilizers. The
//! destabilizers let a deterministic Z measurement be evaluated by summing the
//! stabilizers paired with the destabilizers that anticommute with `Z_q`, which
//! costs O(n²) and needs no Gaussian elimination.
//!
//! Global phase is not tracked. Only the measurement statistics are meaningful.

use rand::Rng;

use crate::circuit::{Angle, Axis, Instruction, Qubit};
use crate::error::{Error, Result};
use crate::sim::pauli::{product_phase, words_for, Pauli, PauliString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl StabilizerTableau {
    /// The state |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("tableau needs at least one qubit"));
        }
        let words = words_for(n);
        let rows = 2 * n;
        let mut t = StabilizerTableau {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
        };
        for q in 0..n {
            t.xs[q * words + q / 64] |= 1 << (q % 64);
            t.zs[(n + q) * words + q / 64] |= 1 << (q % 64);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_count(&self) -> usize {
        2 * self.n
    }

    pub fn row(&self, r: usize) -> PauliString {
        let mut p = PauliString::identity(self.n);
        for q in 0..self.n {
            p.set(q, Pauli::from_bits(self.x_bit(r, q), self.z_bit(r, q)));
        }
        p.set_negative(self.signs[r]);
        p
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        (self.n..2 * self.n).map(|r| self.row(r)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliString> {
        (0..self.n).map(|r| self.row(r)).collect()
    }

    #[inline]
    fn x_bit(&self, r: usize, q: Qubit) -> bool {
        self.xs[r * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn z_bit(&self, r: usize, q: Qubit) -> bool {
        self.zs[r * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    fn check(&self, q: Qubit) -> Result<()> {
        if q >= self.n {
            Err(Error::invalid(format!("qubit {q} out of range for {}-qubit tableau", self.n)))
        } else {
            Ok(())
        }
    }

    /// Applies `f(x, z, sign) -> (x, z, sign)` to the column of qubit `q` in every row.
    #[inline]
    fn map_column(&mut self, q: Qubit, f: impl Fn(bool, bool) -> (bool, bool, bool)) {
        let (w, b) = (q / 64, q % 64);
        for r in 0..2 * self.n {
            let i = r * self.words + w;
            let x = self.xs[i] >> b & 1 == 1;
            let z = self.zs[i] >> b & 1 == 1;
            let (nx, nz, flip) = f(x, z);
            self.xs[i] = (self.xs[i] & !(1 << b)) | (u64::from(nx) << b);
            self.zs[i] = (self.zs[i] & !(1 << b)) | (u64::from(nz) << b);
            self.signs[r] ^= flip;
        }
    }

    pub fn rotate(&mut self, q: Qubit, axis: Axis, angle: Angle) -> Result<()> {
        self.check(q)?;
        match (axis, angle) {
            (Axis::XY, _) => {
                return Err(Error::Unsupported("R_{X+Y} rotation is not Clifford".into()));
            }
            (Axis::X, Angle::Pi) => self.map_column(q, |x, z| (x, z, z)),
            (Axis::Y, Angle::Pi) => self.map_column(q, |x, z| (x, z, x ^ z)),
            (Axis::Z, Angle::Pi) => self.map_column(q, |x, z| (x, z, x)),
            // X → -Z, Z → X
            (Axis::Y, Angle::HalfPi) => self.map_column(q, |x, z| (z, x, x && !z)),
            // X → Z, Z → -X
            (Axis::Y, Angle::MinusHalfPi) => self.map_column(q, |x, z| (z, x, z && !x)),
            // Y → Z, Z → -Y
            (Axis::X, Angle::HalfPi) => self.map_column(q, |x, z| (x ^ z, z, z && !x)),
            // Y → -Z, Z → Y
            (Axis::X, Angle::MinusHalfPi) => self.map_column(q, |x, z| (x ^ z, z, x && z)),
            // X → Y, Y → -X
            (Axis::Z, Angle::HalfPi) => self.map_column(q, |x, z| (x, z ^ x, x && z)),
            // X → -Y, Y → X
            (Axis::Z, Angle::MinusHalfPi) => self.map_column(q, |x, z| (x, z ^ x, x && !z)),
        }
        Ok(())
    }

    pub fn cz(&mut self, a: Qubit, b: Qubit) -> Result<()> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::invalid("CZ needs two distinct qubits"));
        }
        let (wa, ba) = (a / 64, a % 64);
        let (wb, bb) = (b / 64, b % 64);
        for r in 0..2 * self.n {
            let base = r * self.words;
            let xa = self.xs[base + wa] >> ba & 1;
            let za = self.zs[base + wa] >> ba & 1;
            let xb = self.xs[base + wb] >> bb & 1;
            let zb = self.zs[base + wb] >> bb & 1;
            self.signs[r] ^= xa & xb & (za ^ zb) == 1;
            self.zs[base + wa] ^= xb << ba;
            self.zs[base + wb] ^= xa << bb;
        }
        Ok(())
    }

    /// Applies a Clifford gate instruction. Idle and noise annotations are no-ops here.
    pub fn apply(&mut self, op: &Instruction) -> Result<()> {
        match *op {
            Instruction::Rot { qubit, axis, angle } => self.rotate(qubit, axis, angle),
            Instruction::Cz { a, b, .. } => self.cz(a, b),
            Instruction::Idle { qubit, .. } => self.check(qubit),
            Instruction::Noise { .. } => Ok(()),
            Instruction::MeasureZ { .. } => {
                Err(Error::invalid("measurements go through measure_z"))
            }
        }
    }

    /// Conjugates the state by `p`: rows anticommuting with `p` change sign.
    pub fn inject_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::invalid("Pauli length does not match tableau"));
        }
        for r in 0..2 * self.n {
            let base = r * self.words;
            let mut parity = 0;
            for w in 0..self.words {
                parity ^= ((self.xs[base + w] & p.zs()[w]) ^ (self.zs[base + w] & p.xs()[w])).count_ones();
            }
            self.signs[r] ^= parity & 1 == 1;
        }
        Ok(())
    }

    /// Row `h ← row_i · row_h` with sign tracking.
    fn rowsum(&mut self, h: usize, i: usize) {
        let (bh, bi) = (h * self.words, i * self.words);
        let mut phase = 2 * i32::from(self.signs[h]) + 2 * i32::from(self.signs[i]);
        for w in 0..self.words {
            phase += product_phase(self.xs[bi + w], self.zs[bi + w], self.xs[bh + w], self.zs[bh + w]);
            self.xs[bh + w] ^= self.xs[bi + w];
            self.zs[bh + w] ^= self.zs[bi + w];
        }
        self.signs[h] = phase.rem_euclid(4) == 2;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            self.xs[dst * self.words + w] = self.xs[src * self.words + w];
            self.zs[dst * self.words + w] = self.zs[src * self.words + w];
        }
        self.signs[dst] = self.signs[src];
    }

    /// Outcome of measuring `Z_q` if it is determined by the state.
    pub fn peek_z(&self, q: Qubit) -> Result<Option<bool>> {
        self.check(q)?;
        if (self.n..2 * self.n).any(|r| self.x_bit(r, q)) {
            return Ok(None);
        }
        let mut acc = PauliString::identity(self.n);
        for d in 0..self.n {
            if self.x_bit(d, q) {
                acc.mul_assign(&self.row(self.n + d))?;
            }
        }
        Ok(Some(acc.is_negative()))
    }

    /// Projective Z measurement. The post-measurement state is kept; there is no reset.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: Qubit, rng: &mut R) -> Result<bool> {
        self.check(q)?;
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&r| self.x_bit(r, q)) {
            for r in 0..2 * n {
                if r != p && self.x_bit(r, q) {
                    self.rowsum(r, p);
                }
            }
            self.copy_row(p - n, p);
            let base = p * self.words;
            for w in 0..self.words {
                self.xs[base + w] = 0;
                self.zs[base + w] = 0;
            }
            self.zs[base + q / 64] = 1 << (q % 64);
            let outcome: bool = rng.random();
            self.signs[p] = outcome;
            Ok(outcome)
        } else {
            // Deterministic: accumulate into a scratch row appended past the tableau.
            let words = self.words;
            self.xs.extend(std::iter::repeat_n(0, words));
            self.zs.extend(std::iter::repeat_n(0, words));
            self.signs.push(false);
            let scratch = 2 * n;
            for d in 0..n {
                if self.x_bit(d, q) {
                    self.rowsum(scratch, n + d);
                }
            }
            let outcome = self.signs[scratch];
            self.xs.truncate(2 * n * words);
            self.zs.truncate(2 * n * words);
            self.signs.truncate(2 * n);
            Ok(outcome)
        }
    }

    /// `Some(negative)` if ±`p` belongs to the stabilizer group, `None` if the
    /// observable is not determined by the state.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Option<bool>> {
        if p.n() != self.n {
            return Err(Error::invalid("Pauli length does not match tableau"));
        }
        let mut probe = p.clone();
        probe.set_negative(false);
        if (self.n..2 * self.n).any(|r| !self.row(r).commutes_with(&probe)) {
            return Ok(None);
        }
        let mut acc = PauliString::identity(self.n);
        for d in 0..self.n {
            if !self.row(d).commutes_with(&probe) {
                acc.mul_assign(&self.row(self.n + d))?;
            }
        }
        let mut cmp = acc.clone();
        cmp.set_negative(false);
        if cmp != probe {
            return Err(Error::data("stabilizer decomposition failed; tableau is corrupt"));
        }
        Ok(Some(acc.is_negative() ^ p.is_negative()))
    }

    /// Checks the symplectic pattern: destabilizer i anticommutes only with
    /// stabilizer i, and every other pair of rows commutes.
    pub fn validate(&self) -> bool {
        let rows: Vec<PauliString> = (0..2 * self.n).map(|r| self.row(r)).collect();
        for i in 0..2 * self.n {
            for j in (i + 1)..2 * self.n {
                let should_anticommute = j == i + self.n && i < self.n;
                if rows[i].commutes_with(&rows[j]) == should_anticommute {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn zero_qubits_rejected() {
        assert!(StabilizerTableau::new(0).is_err());
    }

    #[test]
    fn ground_state_measures_zero() {
        let mut t = StabilizerTableau::new(1).unwrap();
        let mut rng = stream_rng(0, 0);
        assert_eq!(t.peek_z(0).unwrap(), Some(false));
        assert!(!t.measure_z(0, &mut rng).unwrap());
    }

    #[test]
    fn seventeen_qubits_have_34_rows() {
        let t = StabilizerTableau::new(17).unwrap();
        assert_eq!(t.row_count(), 34);
        assert!(t.validate());
    }

    #[test]
    fn z_parities_of_ground_state_are_positive() {
        let t = StabilizerTableau::new(9).unwrap();
        for mask in 1u32..(1 << 9) {
            let factors: Vec<_> = (0..9).filter(|q| mask >> q & 1 == 1).map(|q| (q, Pauli::Z)).collect();
            let p = PauliString::from_factors(9, &factors).unwrap();
            assert_eq!(t.pauli_expectation(&p).unwrap(), Some(false));
        }
    }

    #[test]
    fn x_flip_is_deterministic_one() {
        let mut t = StabilizerTableau::new(2).unwrap();
        t.rotate(1, Axis::X, Angle::Pi).unwrap();
        let mut rng = stream_rng(0, 0);
        assert!(t.measure_z(1, &mut rng).unwrap());
        assert!(!t.measure_z(0, &mut rng).unwrap());
    }

    #[test]
    fn equator_state_is_random_then_repeatable() {
        let mut ones = 0;
        for s in 0..400 {
            let mut t = StabilizerTableau::new(1).unwrap();
            t.rotate(0, Axis::Y, Angle::HalfPi).unwrap();
            assert_eq!(t.peek_z(0).unwrap(), None);
            let mut rng = stream_rng(1, s);
            let first = t.measure_z(0, &mut rng).unwrap();
            for _ in 0..3 {
                assert_eq!(t.measure_z(0, &mut rng).unwrap(), first);
            }
            assert!(t.validate());
            ones += usize::from(first);
        }
        assert!((150..250).contains(&ones), "ones = {ones}");
    }

    #[test]
    fn cz_leaves_z_stabilizers_alone() {
        let mut t = StabilizerTableau::new(2).unwrap();
        let before = t.stabilizers();
        t.cz(0, 1).unwrap();
        assert_eq!(t.stabilizers(), before);
    }

    #[test]
    fn bell_pair_outcomes_agree() {
        for s in 0..50 {
            let mut t = StabilizerTableau::new(2).unwrap();
            t.rotate(0, Axis::Y, Angle::HalfPi).unwrap();
            t.rotate(1, Axis::Y, Angle::HalfPi).unwrap();
            t.cz(0, 1).unwrap();
            t.rotate(1, Axis::Y, Angle::MinusHalfPi).unwrap();
            let mut rng = stream_rng(2, s);
            let a = t.measure_z(0, &mut rng).unwrap();
            let b = t.measure_z(1, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn injected_pauli_flips_outcome() {
        let mut t = StabilizerTableau::new(3).unwrap();
        t.inject_pauli(&PauliString::parse("_X_").unwrap()).unwrap();
        assert_eq!(t.peek_z(1).unwrap(), Some(true));
        let before = t.clone();
        t.inject_pauli(&PauliString::identity(3)).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn non_clifford_rotation_rejected() {
        let mut t = StabilizerTableau::new(1).unwrap();
        assert!(matches!(t.rotate(0, Axis::XY, Angle::HalfPi), Err(Error::Unsupported(_))));
    }
}
