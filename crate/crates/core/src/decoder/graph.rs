//! Detector error model by single-fault enumeration, and the matching graph built from it.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::circuit::{Circuit, Instruction, Qubit};
use crate::detection::{CorrelationMatrix, DetectorSpec};
use crate::error::{Error, Result};
use crate::noise::channels::{Channel, NoiseModel};
use crate::sim::frame::FrameProgram;
use crate::sim::pauli::Pauli;

#[derive(Clone, Debug, PartialEq)]
pub enum FaultKind {
    Pauli(Vec<(Qubit, Pauli)>),
    Readout { qubit: Qubit, slot: usize },
}

impl FaultKind {
    pub fn describe(&self) -> String {
        match self {
            FaultKind::Pauli(f) => f.iter().map(|(q, p)| format!("{}{q}", p.as_char())).collect::<Vec<_>>().join(" "),
            FaultKind::Readout { qubit, slot } => format!("readout q{qubit} slot {slot}"),
        }
    }
}

/// One fault mechanism: where it happens, how likely it is and what it flips.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSignature {
    /// Index of the `NOISE` instruction in the circuit.
    pub index: usize,
    pub kind: FaultKind,
    pub p: f64,
    pub detectors: Vec<usize>,
    pub logical: bool,
}

/// Injects every Pauli component (and every readout flip) of every noise
/// location alone and records the detectors it fires.
///
/// Readout flips get the mean of the two assignment errors, since the
/// direction of the flip depends on the ideal bit.
pub fn enumerate_faults(circuit: &Circuit, model: &NoiseModel, spec: &DetectorSpec) -> Result<Vec<FaultSignature>> {
    let program = FrameProgram::compile(circuit, None)?;
    let mut last_slot: Vec<Option<usize>> = vec![None; circuit.n_qubits()];
    let mut out = Vec::new();
    for (index, timed) in circuit.ops().iter().enumerate() {
        match &timed.op {
            Instruction::MeasureZ { qubit, slot } => last_slot[*qubit] = Some(*slot),
            Instruction::Noise { channel, qubits } => match model.channel(*channel)? {
                Channel::Pauli(ch) => {
                    for term in ch.terms() {
                        let fault: Vec<(Qubit, Pauli)> = qubits
                            .iter()
                            .copied()
                            .zip(term.paulis.iter().copied())
                            .filter(|(_, p)| *p != Pauli::I)
                            .collect();
                        let flipped = program.propagate_fault(index, &fault);
                        out.push(FaultSignature {
                            index,
                            kind: FaultKind::Pauli(fault),
                            p: term.p,
                            detectors: spec.detectors_for_flips(&flipped),
                            logical: spec.logical_for_flips(&flipped),
                        });
                    }
                }
                Channel::Readout(r) => {
                    let qubit = qubits[0];
                    let slot = last_slot[qubit].ok_or_else(|| {
                        Error::invalid(format!("readout noise at instruction {index} precedes any measurement"))
                    })?;
                    if r.mean() > 0.0 {
                        out.push(FaultSignature {
                            index,
                            kind: FaultKind::Readout { qubit, slot },
                            p: r.mean(),
                            detectors: spec.detectors_for_flips(&[slot]),
                            logical: spec.logical_for_flips(&[slot]),
                        });
                    }
                }
            },
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub u: usize,
    /// `None` is the boundary.
    pub v: Option<usize>,
    pub p: f64,
    pub weight: f64,
    pub logical_flip: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorGraph {
    pub n_detectors: usize,
    /// `(ancilla name, round)` per detector.
    pub nodes: Vec<(String, usize)>,
    pub edges: Vec<GraphEdge>,
    pub warnings: Vec<String>,
    /// Total probability of faults that flip the logical without firing anything.
    pub undetectable: f64,
}

pub fn edge_weight(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

fn xor_merge(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}

type Key = (usize, Option<usize>);

fn key_of(dets: &[usize]) -> Option<Key> {
    match *dets {
        [u] => Some((u, None)),
        [u, v] => Some((u.min(v), Some(u.max(v)))),
        _ => None,
    }
}

/// Ways to cover a detector set of size 3 or 4 with two edges.
fn splits(dets: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let n = dets.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        if mask & 1 == 0 {
            continue;
        }
        let a: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| dets[i]).collect();
        let b: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| dets[i]).collect();
        if a.len() <= 2 && b.len() <= 2 {
            out.push((a, b));
        }
    }
    out
}

pub fn build_detector_graph(signatures: &[FaultSignature], spec: &DetectorSpec) -> Result<DetectorGraph> {
    if signatures.is_empty() {
        return Err(Error::invalid("no fault signatures to build a graph from"));
    }
    let mut warnings = Vec::new();
    let mut undetectable = 0.0;
    // Edge key -> merged probability per logical flag.
    let mut merged: BTreeMap<Key, [f64; 2]> = BTreeMap::new();
    for s in signatures {
        if let Some(k) = key_of(&s.detectors) {
            let slot = &mut merged.entry(k).or_insert([0.0; 2])[usize::from(s.logical)];
            *slot = xor_merge(*slot, s.p);
        } else if s.detectors.is_empty() && s.logical && s.p > 0.0 {
            undetectable = xor_merge(undetectable, s.p);
            warnings.push(format!(
                "fault {} at instruction {} flips the logical without firing a detector",
                s.kind.describe(),
                s.index
            ));
        }
    }
    let primitive = merged.clone();
    let has = |k: Key, l: bool| primitive.get(&k).is_some_and(|ps| ps[usize::from(l)] > 0.0);
    let mut dropped = 0usize;
    for s in signatures.iter().filter(|s| s.detectors.len() > 2) {
        let mut placed = false;
        if s.detectors.len() <= 4 {
            'outer: for (a, b) in splits(&s.detectors) {
                let (ka, kb) = (key_of(&a).unwrap(), key_of(&b).unwrap());
                for la in [false, true] {
                    let lb = la ^ s.logical;
                    if has(ka, la) && has(kb, lb) {
                        for (k, l) in [(ka, la), (kb, lb)] {
                            let slot = &mut merged.get_mut(&k).unwrap()[usize::from(l)];
                            *slot = xor_merge(*slot, s.p);
                        }
                        placed = true;
                        break 'outer;
                    }
                }
            }
        }
        if !placed {
            dropped += 1;
            log::warn!("could not decompose fault {} firing {:?}", s.kind.describe(), s.detectors);
        }
    }
    if dropped > 0 {
        warnings.push(format!("{dropped} faults firing more than two detectors could not be decomposed"));
    }
    let mut edges = Vec::new();
    for ((u, v), ps) in merged {
        let logical_flip = if ps[0] > 0.0 && ps[1] > 0.0 {
            warnings.push(format!(
                "edge {u}-{} has parallel mechanisms with different logical effect (p={:.3e} vs {:.3e})",
                v.map_or("boundary".into(), |v| v.to_string()),
                ps[0],
                ps[1]
            ));
            ps[1] > ps[0]
        } else {
            ps[1] > 0.0
        };
        let p = ps[usize::from(logical_flip)];
        if p <= 0.0 {
            continue;
        }
        if p >= 0.5 {
            warnings.push(format!("edge {u}-{v:?} dropped: p = {p} is not below 1/2"));
            continue;
        }
        edges.push(GraphEdge { u, v, p, weight: edge_weight(p), logical_flip });
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    let nodes = (0..spec.n_detectors())
        .map(|d| {
            let (k, round) = spec.coords(d);
            (spec.names[k].clone(), round)
        })
        .collect();
    Ok(DetectorGraph { n_detectors: spec.n_detectors(), nodes, edges, warnings, undetectable })
}

impl DetectorGraph {
    /// Copy whose detector-detector edges take their probability from measured correlations.
    pub fn with_correlation_weights(&self, corr: &CorrelationMatrix) -> Result<DetectorGraph> {
        if corr.n != self.n_detectors {
            return Err(Error::data(format!(
                "correlation matrix has {} detectors, graph has {}",
                corr.n, self.n_detectors
            )));
        }
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            if let Some(v) = e.v {
                e.p = corr.get(e.u, v).clamp(1e-6, 0.5 - 1e-9);
                e.weight = edge_weight(e.p);
            }
        }
        Ok(g)
    }

    /// Copy with every edge at unit weight, for checking circuit distance.
    pub fn with_uniform_weights(&self) -> DetectorGraph {
        let p = 1.0 / (1.0 + std::f64::consts::E);
        let mut g = self.clone();
        for e in g.edges.iter_mut() {
            e.p = p;
            e.weight = 1.0;
        }
        g
    }

    pub fn to_json(&self) -> Result<String> {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, (a, r))| json!({"index": i, "ancilla": a, "round": r}))
            .collect();
        let edges: Vec<Value> = self
            .edges
            .iter()
            .map(|e| {
                json!({
                    "u": e.u,
                    "v": e.v.map_or(json!("boundary"), |v| json!(v)),
                    "p": e.p,
                    "weight": e.weight,
                    "logical_flip": e.logical_flip,
                })
            })
            .collect();
        Ok(serde_json::to_string_pretty(&json!({"nodes": nodes, "edges": edges}))?)
    }

    pub fn from_json(text: &str) -> Result<DetectorGraph> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |what: &str| Error::Format(format!("detector graph: {what}"));
        let nodes = v["nodes"]
            .as_array()
            .ok_or_else(|| bad("missing nodes"))?
            .iter()
            .map(|n| {
                Ok((
                    n["ancilla"].as_str().ok_or_else(|| bad("node ancilla"))?.to_string(),
                    n["round"].as_u64().ok_or_else(|| bad("node round"))? as usize,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = nodes.len();
        let mut edges = Vec::new();
        for e in v["edges"].as_array().ok_or_else(|| bad("missing edges"))? {
            let u = e["u"].as_u64().ok_or_else(|| bad("edge u"))? as usize;
            let v = match &e["v"] {
                Value::String(s) if s == "boundary" => None,
                x => Some(x.as_u64().ok_or_else(|| bad("edge v"))? as usize),
            };
            let p = e["p"].as_f64().ok_or_else(|| bad("edge p"))?;
            if u >= n || v.is_some_and(|v| v >= n) {
                return Err(bad("edge endpoint out of range"));
            }
            if !(p > 0.0 && p < 0.5) {
                return Err(bad("edge probability outside (0, 1/2)"));
            }
            let logical_flip = e["logical_flip"].as_bool().ok_or_else(|| bad("edge logical_flip"))?;
            edges.push(GraphEdge { u, v, p, weight: edge_weight(p), logical_flip });
        }
        Ok(DetectorGraph { n_detectors: n, nodes, edges, warnings: Vec::new(), undetectable: 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_and_weight() {
        assert!((xor_merge(0.01, 0.01) - 0.0198).abs() < 1e-15);
        assert!((edge_weight(0.01) - 99f64.ln()).abs() < 1e-12);
        assert!(edge_weight(0.02) < edge_weight(0.01));
    }

    #[test]
    fn split_enumeration() {
        assert_eq!(splits(&[1, 2, 3]).len(), 3);
        assert_eq!(splits(&[1, 2, 3, 4]).len(), 3);
    }
}
