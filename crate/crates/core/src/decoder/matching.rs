//! Shortest paths over the detector graph and exact minimum-weight matching of fired detectors.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::decoder::blossom::max_weight_matching;
use crate::decoder::graph::DetectorGraph;
use crate::detection::DetectionMatrix;
use crate::error::{Error, Result};

/// Path weights are quantized to this many units per nat so the matching runs on integers.
pub const WEIGHT_SCALE: f64 = 1e6;

const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Matched pairs; `None` is the boundary.
    pub pairs: Vec<(usize, Option<usize>)>,
    /// Total quantized weight.
    pub weight: i64,
    pub logical_flip: bool,
}

/// All-pairs shortest paths plus the matcher. Immutable once built.
#[derive(Clone, Debug)]
pub struct Decoder {
    n: usize,
    /// `(n+1)²` quantized distances; index `n` is the boundary.
    dist: Vec<i64>,
    flip: Vec<bool>,
}

impl Decoder {
    /// Floyd-Warshall over detectors. The boundary is an endpoint only: paths
    /// never pass through it, so "both to boundary" stays a separate option.
    pub fn new(graph: &DetectorGraph) -> Self {
        let n = graph.n_detectors;
        let size = n + 1;
        let mut d = vec![f64::INFINITY; size * size];
        let mut flip = vec![false; size * size];
        for i in 0..size {
            d[i * size + i] = 0.0;
        }
        for e in &graph.edges {
            let v = e.v.unwrap_or(n);
            if e.weight < d[e.u * size + v] {
                for (a, b) in [(e.u, v), (v, e.u)] {
                    d[a * size + b] = e.weight;
                    flip[a * size + b] = e.logical_flip;
                }
            }
        }
        for k in 0..n {
            for i in 0..size {
                let dik = d[i * size + k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..size {
                    let through = dik + d[k * size + j];
                    if through < d[i * size + j] {
                        d[i * size + j] = through;
                        flip[i * size + j] = flip[i * size + k] ^ flip[k * size + j];
                    }
                }
            }
        }
        let dist = d
            .iter()
            .map(|&x| if x.is_finite() { (x * WEIGHT_SCALE).round() as i64 } else { INF })
            .collect();
        Decoder { n, dist, flip }
    }

    pub fn n_detectors(&self) -> usize {
        self.n
    }

    /// Quantized shortest-path weight and logical parity; `None` is the boundary.
    pub fn path(&self, u: usize, v: Option<usize>) -> Option<(i64, bool)> {
        let idx = u * (self.n + 1) + v.unwrap_or(self.n);
        (self.dist[idx] < INF).then(|| (self.dist[idx], self.flip[idx]))
    }

    fn boundary(&self, u: usize) -> Result<(i64, bool)> {
        self.path(u, None).ok_or(Error::Unreachable(u))
    }

    /// Exact minimum-weight perfect matching of `fired` with boundary images.
    ///
    /// Matched on the reduced complete graph: a pair costs the cheaper of its
    /// connecting path and sending both ends to the boundary, and an odd count
    /// gets one extra boundary vertex.
    pub fn mwpm(&self, fired: &[usize]) -> Result<Matching> {
        let m = fired.len();
        if let Some(&bad) = fired.iter().find(|&&d| d >= self.n) {
            return Err(Error::invalid(format!("detector {bad} out of range")));
        }
        let b: Vec<(i64, bool)> = fired.iter().map(|&u| self.boundary(u)).collect::<Result<_>>()?;
        match m {
            0 => return Ok(Matching { pairs: Vec::new(), weight: 0, logical_flip: false }),
            1 => {
                return Ok(Matching { pairs: vec![(fired[0], None)], weight: b[0].0, logical_flip: b[0].1 });
            }
            _ => {}
        }
        // (cost, logical flip, whether the pair is joined directly)
        let pair_cost = |i: usize, j: usize| -> (i64, bool, bool) {
            let both = b[i].0 + b[j].0;
            match self.path(fired[i], Some(fired[j])) {
                Some((w, f)) if w <= both => (w, f, true),
                _ => (both, b[i].1 ^ b[j].1, false),
            }
        };
        let nodes = m + m % 2;
        let mut costs = Vec::with_capacity(nodes * (nodes - 1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                costs.push((i, j, pair_cost(i, j).0));
            }
            if m % 2 == 1 {
                costs.push((i, m, b[i].0));
            }
        }
        let top = costs.iter().map(|c| c.2).max().unwrap_or(0) + 1;
        let edges: Vec<(usize, usize, i64)> = costs.iter().map(|&(i, j, c)| (i, j, top - c)).collect();
        let mate = max_weight_matching(nodes, &edges, true);
        let mut pairs = Vec::new();
        let mut weight = 0;
        let mut logical_flip = false;
        for i in 0..m {
            let j = mate[i].expect("complete graph always has a perfect matching");
            if j < i {
                continue;
            }
            if j == m {
                pairs.push((fired[i], None));
                weight += b[i].0;
                logical_flip ^= b[i].1;
                continue;
            }
            let (w, f, direct) = pair_cost(i, j);
            weight += w;
            logical_flip ^= f;
            if direct {
                pairs.push((fired[i], Some(fired[j])));
            } else {
                pairs.push((fired[i], None));
                pairs.push((fired[j], None));
            }
        }
        pairs.sort_by_key(|&(u, v)| (u, v.map_or(usize::MAX, |v| v)));
        Ok(Matching { pairs, weight, logical_flip })
    }

    /// Minimum matching weight by enumerating every pairing of `fired`
    /// (each detector paired with another or sent to the boundary).
    pub fn brute_force_weight(&self, fired: &[usize]) -> Result<i64> {
        let b: Vec<i64> = fired.iter().map(|&u| self.boundary(u).map(|x| x.0)).collect::<Result<_>>()?;
        fn go(dec: &Decoder, fired: &[usize], b: &[i64], used: &mut [bool]) -> i64 {
            let Some(i) = used.iter().position(|u| !u) else { return 0 };
            used[i] = true;
            let mut best = b[i] + go(dec, fired, b, used);
            for j in i + 1..fired.len() {
                if used[j] {
                    continue;
                }
                if let Some((w, _)) = dec.path(fired[i], Some(fired[j])) {
                    used[j] = true;
                    best = best.min(w + go(dec, fired, b, used));
                    used[j] = false;
                }
            }
            used[i] = false;
            best
        }
        Ok(go(self, fired, &b, &mut vec![false; fired.len()]))
    }

    pub fn decode(&self, fired: &[usize], raw: bool) -> Result<bool> {
        Ok(raw ^ self.mwpm(fired)?.logical_flip)
    }

    /// Corrected logical value of every shot. Repeated event patterns are
    /// decoded once per chunk.
    pub fn decode_matrix(&self, m: &DetectionMatrix) -> Result<Vec<bool>> {
        if m.spec().n_detectors() != self.n {
            return Err(Error::data(format!(
                "detection matrix has {} detectors, decoder expects {}",
                m.spec().n_detectors(),
                self.n
            )));
        }
        const CHUNK: usize = 8192;
        let chunks: Vec<usize> = (0..m.shots().div_ceil(CHUNK)).collect();
        let parts: Vec<Result<Vec<bool>>> = chunks
            .par_iter()
            .map(|&c| {
                let mut memo: HashMap<Vec<u64>, bool> = HashMap::new();
                (c * CHUNK..((c + 1) * CHUNK).min(m.shots()))
                    .map(|shot| {
                        let row = m.row(shot);
                        let flip = match memo.get(row) {
                            Some(&f) => f,
                            None => {
                                let f = self.mwpm(&m.fired(shot))?.logical_flip;
                                memo.insert(row.to_vec(), f);
                                f
                            }
                        };
                        Ok(m.raw_logical(shot) ^ flip)
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::with_capacity(m.shots());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}

pub fn decode_csv(raw: &[bool], corrected: &[bool]) -> String {
    let mut out = String::from("shot,raw,corrected\n");
    for (i, (r, c)) in raw.iter().zip(corrected).enumerate() {
        out.push_str(&format!("{i},{},{}\n", u8::from(*r), u8::from(*c)));
    }
    out
}
