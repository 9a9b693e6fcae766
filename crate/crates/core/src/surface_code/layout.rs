//! Rotated surface-code layout for odd distance `d`.
//!
//! Data qubit `D(r·d + c + 1)` sits at grid point `(2r+1, 2c+1)` (row, column;
//! rows grow southwards). Plaquettes sit at the even corners `(2r, 2c)`. A
//! bulk corner hosts an X check when `r + c` is even and a Z check otherwise.
//! The top and bottom edges carry weight-two X checks, the left and right
//! edges weight-two Z checks. Ancillas are numbered row-major within each type.

use serde::{Deserialize, Serialize};

use crate::circuit::Pattern;
use crate::error::{Error, Result};
use crate::sim::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabKind {
    Z,
    X,
}

impl StabKind {
    pub fn pauli(self) -> Pauli {
        match self {
            StabKind::Z => Pauli::Z,
            StabKind::X => Pauli::X,
        }
    }

    pub fn prefix(self) -> char {
        match self {
            StabKind::Z => 'Z',
            StabKind::X => 'X',
        }
    }
}

/// Memory-experiment basis: |0_L⟩ (Z) or |−_L⟩ (X).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Stabilizer type whose outcomes are deterministic in this basis.
    pub fn consistent_kind(self) -> StabKind {
        match self {
            Basis::Z => StabKind::Z,
            Basis::X => StabKind::X,
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "0" => Ok(Basis::Z),
            "x" | "-" | "minus" => Ok(Basis::X),
            other => Err(Error::invalid(format!("unknown basis {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataQubit {
    pub name: String,
    pub coord: (i32, i32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ancilla {
    pub name: String,
    pub kind: StabKind,
    pub coord: (i32, i32),
    /// Data-qubit indices of the plaquette.
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub data: usize,
    pub ancilla: usize,
    pub pattern: Pattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeLayout {
    pub distance: usize,
    pub data: Vec<DataQubit>,
    /// Z ancillas first, then X ancillas.
    pub ancillas: Vec<Ancilla>,
    pub couplings: Vec<Coupling>,
    pub logical_z: Vec<usize>,
    pub logical_x: Vec<usize>,
}

/// Position of the data partner relative to the ancilla in layers A..D.
fn layer_offsets(kind: StabKind) -> [(i32, i32); 4] {
    const NE: (i32, i32) = (-1, 1);
    const NW: (i32, i32) = (-1, -1);
    const SE: (i32, i32) = (1, 1);
    const SW: (i32, i32) = (1, -1);
    match kind {
        StabKind::Z => [NE, SE, NW, SW],
        StabKind::X => [NE, NW, SE, SW],
    }
}

impl CodeLayout {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 || d.is_multiple_of(2) {
            return Err(Error::invalid(format!("distance must be odd and at least 3, got {d}")));
        }
        let di = d as i32;
        let data: Vec<DataQubit> = (0..d * d)
            .map(|i| DataQubit {
                name: format!("D{}", i + 1),
                coord: (2 * (i / d) as i32 + 1, 2 * (i % d) as i32 + 1),
            })
            .collect();
        let data_at = |(r, c): (i32, i32)| -> Option<usize> {
            if r < 0 || c < 0 || r > 2 * di || c > 2 * di || r % 2 == 0 || c % 2 == 0 {
                return None;
            }
            Some(((r / 2) * di + c / 2) as usize)
        };
        let mut by_kind: [Vec<Ancilla>; 2] = Default::default();
        for r in 0..=di {
            for c in 0..=di {
                let corner_row = r == 0 || r == di;
                let corner_col = c == 0 || c == di;
                let kind = if (r + c) % 2 == 0 { StabKind::X } else { StabKind::Z };
                let keep = match (corner_row, corner_col) {
                    (false, false) => true,
                    (true, true) => false,
                    (true, false) => kind == StabKind::X,
                    (false, true) => kind == StabKind::Z,
                };
                if !keep {
                    continue;
                }
                let coord = (2 * r, 2 * c);
                let mut support: Vec<usize> = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
                    .iter()
                    .filter_map(|(dr, dc)| data_at((coord.0 + dr, coord.1 + dc)))
                    .collect();
                support.sort_unstable();
                let list = &mut by_kind[kind as usize];
                list.push(Ancilla { name: format!("{}{}", kind.prefix(), list.len() + 1), kind, coord, support });
            }
        }
        let [zs, xs] = by_kind;
        let ancillas: Vec<Ancilla> = zs.into_iter().chain(xs).collect();
        let mut couplings = Vec::new();
        for (a, anc) in ancillas.iter().enumerate() {
            for (pattern, (dr, dc)) in Pattern::ALL.iter().zip(layer_offsets(anc.kind)) {
                if let Some(q) = data_at((anc.coord.0 + dr, anc.coord.1 + dc)) {
                    couplings.push(Coupling { data: q, ancilla: a, pattern: *pattern });
                }
            }
        }
        couplings.sort_by_key(|c| (c.pattern, c.ancilla));
        let layout = CodeLayout {
            distance: d,
            data,
            ancillas,
            couplings,
            logical_z: (0..d).collect(),
            logical_x: (0..d).map(|r| r * d).collect(),
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn n_data(&self) -> usize {
        self.data.len()
    }

    pub fn n_ancillas(&self) -> usize {
        self.ancillas.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_data() + self.n_ancillas()
    }

    /// Circuit qubit index of ancilla `a`.
    pub fn ancilla_qubit(&self, a: usize) -> usize {
        self.n_data() + a
    }

    pub fn qubit_names(&self) -> Vec<String> {
        self.data.iter().map(|q| q.name.clone()).chain(self.ancillas.iter().map(|a| a.name.clone())).collect()
    }

    pub fn ancillas_of(&self, kind: StabKind) -> Vec<usize> {
        (0..self.ancillas.len()).filter(|&a| self.ancillas[a].kind == kind).collect()
    }

    pub fn ancilla_index(&self, name: &str) -> Option<usize> {
        self.ancillas.iter().position(|a| a.name == name)
    }

    /// Data partner of ancilla `a` in `pattern`, if any.
    pub fn partner(&self, a: usize, pattern: Pattern) -> Option<usize> {
        self.couplings.iter().find(|c| c.ancilla == a && c.pattern == pattern).map(|c| c.data)
    }

    /// Ancilla partner of data qubit `q` in `pattern`, if any.
    pub fn data_partner(&self, q: usize, pattern: Pattern) -> Option<usize> {
        self.couplings.iter().find(|c| c.data == q && c.pattern == pattern).map(|c| c.ancilla)
    }

    /// Stabilizer of ancilla `a` as a Pauli string over the data qubits.
    pub fn stabilizer(&self, a: usize) -> PauliString {
        let anc = &self.ancillas[a];
        let mut p = PauliString::identity(self.n_data());
        for &q in &anc.support {
            p.set(q, anc.kind.pauli());
        }
        p
    }

    pub fn logical(&self, kind: StabKind) -> PauliString {
        let support = match kind {
            StabKind::Z => &self.logical_z,
            StabKind::X => &self.logical_x,
        };
        let mut p = PauliString::identity(self.n_data());
        for &q in support {
            p.set(q, kind.pauli());
        }
        p
    }

    /// Data support of the logical operator measured in `basis`.
    pub fn logical_support(&self, basis: Basis) -> &[usize] {
        match basis {
            Basis::Z => &self.logical_z,
            Basis::X => &self.logical_x,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.distance;
        if self.n_data() != d * d || self.n_ancillas() != d * d - 1 {
            return Err(Error::invalid("qubit counts do not match the distance"));
        }
        let stabs: Vec<PauliString> = (0..self.n_ancillas()).map(|a| self.stabilizer(a)).collect();
        for (a, anc) in self.ancillas.iter().enumerate() {
            let w = anc.support.len();
            if w != 2 && w != 4 {
                return Err(Error::invalid(format!("{} has weight {w}", anc.name)));
            }
            for &q in &anc.support {
                let (r, c) = self.data[q].coord;
                if (r - anc.coord.0).abs() != 1 || (c - anc.coord.1).abs() != 1 {
                    return Err(Error::invalid(format!("{} support is not adjacent", anc.name)));
                }
            }
            for b in a + 1..self.n_ancillas() {
                if !stabs[a].commutes_with(&stabs[b]) {
                    return Err(Error::invalid(format!("{} and {} anticommute", anc.name, self.ancillas[b].name)));
                }
            }
            let coupled = self.couplings.iter().filter(|c| c.ancilla == a).count();
            if coupled != w {
                return Err(Error::invalid(format!("{} has {coupled} couplings for weight {w}", anc.name)));
            }
        }
        let (lz, lx) = (self.logical(StabKind::Z), self.logical(StabKind::X));
        if stabs.iter().any(|s| !s.commutes_with(&lz) || !s.commutes_with(&lx)) || lz.commutes_with(&lx) {
            return Err(Error::invalid("logical operators are inconsistent with the stabilizers"));
        }
        for pattern in Pattern::ALL {
            let mut used = vec![false; self.n_qubits()];
            for c in self.couplings.iter().filter(|c| c.pattern == pattern) {
                for q in [c.data, self.ancilla_qubit(c.ancilla)] {
                    if std::mem::replace(&mut used[q], true) {
                        return Err(Error::invalid(format!("qubit {q} used twice in layer {pattern:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(l: &CodeLayout, qs: &[usize]) -> Vec<String> {
        qs.iter().map(|&q| l.data[q].name.clone()).collect()
    }

    #[test]
    fn distance_three_counts() {
        let l = CodeLayout::new(3).unwrap();
        assert_eq!(l.n_data(), 9);
        assert_eq!(l.ancillas_of(StabKind::Z).len(), 4);
        assert_eq!(l.ancillas_of(StabKind::X).len(), 4);
        assert_eq!(l.couplings.len(), 24);
    }

    #[test]
    fn distance_three_supports() {
        let l = CodeLayout::new(3).unwrap();
        let expect = [
            ("Z1", vec!["D1", "D4"]),
            ("Z2", vec!["D2", "D3", "D5", "D6"]),
            ("Z3", vec!["D4", "D5", "D7", "D8"]),
            ("Z4", vec!["D6", "D9"]),
            ("X1", vec!["D2", "D3"]),
            ("X2", vec!["D1", "D2", "D4", "D5"]),
            ("X3", vec!["D5", "D6", "D8", "D9"]),
            ("X4", vec!["D7", "D8"]),
        ];
        for (name, support) in expect {
            let a = l.ancilla_index(name).unwrap();
            assert_eq!(names(&l, &l.ancillas[a].support), support, "{name}");
        }
    }

    #[test]
    fn distance_three_patterns() {
        let l = CodeLayout::new(3).unwrap();
        let expect = [
            (Pattern::A, ["D1-Z1", "D2-X2", "D3-Z2", "D5-Z3", "D6-X3", "D8-X4"]),
            (Pattern::B, ["D1-X2", "D4-Z1", "D6-Z2", "D5-X3", "D8-Z3", "D7-X4"]),
            (Pattern::C, ["D3-X1", "D2-Z2", "D5-X2", "D4-Z3", "D6-Z4", "D9-X3"]),
            (Pattern::D, ["D2-X1", "D4-X2", "D5-Z2", "D7-Z3", "D8-X3", "D9-Z4"]),
        ];
        for (pattern, pairs) in expect {
            let mut got: Vec<String> = l
                .couplings
                .iter()
                .filter(|c| c.pattern == pattern)
                .map(|c| format!("{}-{}", l.data[c.data].name, l.ancillas[c.ancilla].name))
                .collect();
            let mut want: Vec<String> = pairs.iter().map(|s| s.to_string()).collect();
            got.sort();
            want.sort();
            assert_eq!(got, want, "{pattern:?}");
        }
    }

    #[test]
    fn boundary_weights() {
        let l = CodeLayout::new(3).unwrap();
        for anc in &l.ancillas {
            let on_edge = anc.coord.0 == 0 || anc.coord.0 == 6 || anc.coord.1 == 0 || anc.coord.1 == 6;
            assert_eq!(anc.support.len(), if on_edge { 2 } else { 4 }, "{}", anc.name);
        }
    }

    #[test]
    fn larger_and_invalid_distances() {
        let l = CodeLayout::new(5).unwrap();
        assert_eq!((l.n_data(), l.n_ancillas()), (25, 24));
        assert!(CodeLayout::new(7).is_ok());
        assert!(CodeLayout::new(4).is_err());
        assert!(CodeLayout::new(1).is_err());
    }

    #[test]
    fn logicals() {
        let l = CodeLayout::new(3).unwrap();
        assert_eq!(names(&l, &l.logical_z), ["D1", "D2", "D3"]);
        assert_eq!(names(&l, &l.logical_x), ["D1", "D4", "D7"]);
    }

    #[test]
    fn json_export() {
        let json = CodeLayout::new(3).unwrap().to_json().unwrap();
        assert!(json.contains("\"pattern\": \"B\""));
        assert!(json.contains("\"coord\""));
    }
}
