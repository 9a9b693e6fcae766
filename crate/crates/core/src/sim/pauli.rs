use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::Qubit;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => '_',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Phase exponent (in units of i, may be negative) picked up by the product
/// `P1 · P2` of the single-word slices, ignoring the signs of the operands.
pub(crate) fn product_phase(x1: u64, z1: u64, x2: u64, z2: u64) -> i32 {
    let y1 = x1 & z1;
    let only_x1 = x1 & !z1;
    let only_z1 = !x1 & z1;
    let plus = (y1 & z2 & !x2) | (only_x1 & x2 & z2) | (only_z1 & x2 & !z2);
    let minus = (y1 & x2 & !z2) | (only_x1 & z2 & !x2) | (only_z1 & x2 & z2);
    plus.count_ones() as i32 - minus.count_ones() as i32
}

/// A Hermitian Pauli operator `±P_1 ⊗ … ⊗ P_n` in symplectic form.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString { n, xs: vec![0; w], zs: vec![0; w], negative: false }
    }

    pub fn single(n: usize, q: Qubit, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// Builds from a list of `(qubit, pauli)` factors.
    pub fn from_factors(n: usize, factors: &[(Qubit, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n);
        for &(q, p) in factors {
            if q >= n {
                return Err(Error::invalid(format!("qubit {q} out of range for {n}-qubit Pauli")));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    /// Parses strings such as `+XZ_Y` or `-ZZ` (`_` or `I` for identity).
    pub fn parse(s: &str) -> Result<Self> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut out = Self::identity(body.len());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                '_' | 'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::Format(format!("bad Pauli character {c:?}"))),
            };
            out.set(q, p);
        }
        out.negative = negative;
        Ok(out)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn set_negative(&mut self, negative: bool) {
        self.negative = negative;
    }

    pub fn xs(&self) -> &[u64] {
        &self.xs
    }

    pub fn zs(&self) -> &[u64] {
        &self.zs
    }

    pub fn get(&self, q: Qubit) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits(self.xs[w] >> b & 1 == 1, self.zs[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, q: Qubit, p: Pauli) {
        let (w, b) = (q / 64, 1u64 << (q % 64));
        let (x, z) = p.bits();
        self.xs[w] = if x { self.xs[w] | b } else { self.xs[w] & !b };
        self.zs[w] = if z { self.zs[w] | b } else { self.zs[w] & !b };
    }

    pub fn is_identity(&self) -> bool {
        !self.negative && self.xs.iter().chain(&self.zs).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.xs.iter().zip(&self.zs).map(|(x, z)| (x | z).count_ones() as usize).sum()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for w in 0..self.xs.len() {
            parity ^= ((self.xs[w] & other.zs[w]) ^ (self.zs[w] & other.xs[w])).count_ones();
        }
        parity & 1 == 0
    }

    /// In-place product `self ← self · other`.
    ///
    /// Fails if the operands anticommute, since the product is then not Hermitian.
    pub fn mul_assign(&mut self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::invalid("Pauli strings of different length"));
        }
        let mut phase = 0i32;
        for w in 0..self.xs.len() {
            phase += product_phase(self.xs[w], self.zs[w], other.xs[w], other.zs[w]);
            self.xs[w] ^= other.xs[w];
            self.zs[w] ^= other.zs[w];
        }
        let phase = phase.rem_euclid(4);
        if phase % 2 == 1 {
            return Err(Error::invalid("product of anticommuting Paulis is not Hermitian"));
        }
        self.negative ^= other.negative ^ (phase == 2);
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_zero_masks() {
        let id = PauliString::identity(70);
        assert!(id.is_identity());
        assert_eq!(id.xs().len(), 2);
        assert_eq!(id.weight(), 0);
    }

    #[test]
    fn parse_and_display() {
        let p = PauliString::parse("-XZ_Y").unwrap();
        assert_eq!(p.to_string(), "-XZ_Y");
        assert_eq!(p.get(3), Pauli::Y);
        assert_eq!(p.weight(), 3);
    }

    #[test]
    fn products_track_sign() {
        // X·Z = -iY is not Hermitian, but (XX)·(ZZ) = -YY.
        let mut xx = PauliString::parse("XX").unwrap();
        xx.mul_assign(&PauliString::parse("ZZ").unwrap()).unwrap();
        assert_eq!(xx.to_string(), "-YY");
        let mut x = PauliString::parse("X").unwrap();
        assert!(x.mul_assign(&PauliString::parse("Z").unwrap()).is_err());
        // Y·Y = I with no sign.
        let mut yy = PauliString::parse("YZ").unwrap();
        yy.mul_assign(&PauliString::parse("YZ").unwrap()).unwrap();
        assert!(yy.is_identity());
    }

    #[test]
    fn commutation() {
        let a = PauliString::parse("XXXX").unwrap();
        let b = PauliString::parse("ZZ__").unwrap();
        let c = PauliString::parse("Z___").unwrap();
        assert!(a.commutes_with(&b));
        assert!(!a.commutes_with(&c));
    }
}
