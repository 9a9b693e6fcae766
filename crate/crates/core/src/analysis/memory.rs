//! Post-selection, logical-fidelity curves and the memory-experiment pipeline.

use serde::{Deserialize, Serialize};

use crate::analysis::fit::{fit_logical_error, FitResult};
use crate::decoder::{build_detector_graph, enumerate_faults, Decoder};
use crate::detection::{DetectionMatrix, DetectorSpec, Selection};
use crate::error::{Error, Result};
use crate::noise::{attach_noise, CalibrationTable, NoiseOptions};
use crate::rng::derive_seed;
use crate::sim::{reference_sample, run_circuit, Engine};
use crate::surface_code::{build_memory_circuit_with, Basis, CodeLayout, MemoryCircuit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PostSelectScheme {
    None,
    Data,
    Ancilla,
    Both,
}

impl PostSelectScheme {
    pub const ALL: [PostSelectScheme; 4] =
        [PostSelectScheme::None, PostSelectScheme::Data, PostSelectScheme::Ancilla, PostSelectScheme::Both];

    pub fn name(self) -> &'static str {
        match self {
            PostSelectScheme::None => "none",
            PostSelectScheme::Data => "data",
            PostSelectScheme::Ancilla => "ancilla",
            PostSelectScheme::Both => "both",
        }
    }
}

impl std::str::FromStr for PostSelectScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PostSelectScheme::None),
            "data" | "data_only" => Ok(PostSelectScheme::Data),
            "ancilla" | "ancilla_only" => Ok(PostSelectScheme::Ancilla),
            "both" => Ok(PostSelectScheme::Both),
            other => Err(Error::invalid(format!("unknown post-selection scheme {other:?}"))),
        }
    }
}

/// Which shots survive `scheme`.
///
/// The data check is the last detector round (final data parity against the
/// last ancilla value); the ancilla check covers rounds `1..=n`.
pub fn postselect(m: &DetectionMatrix, scheme: PostSelectScheme) -> Vec<bool> {
    let n = m.spec().n_cycles;
    (0..m.shots())
        .map(|s| {
            let data = || m.any_in_rounds(s, n + 1..=n + 1);
            let anc = || m.any_in_rounds(s, 1..=n);
            match scheme {
                PostSelectScheme::None => true,
                PostSelectScheme::Data => !data(),
                PostSelectScheme::Ancilla => !anc(),
                PostSelectScheme::Both => !data() && !anc(),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorBar {
    #[default]
    Wald,
    Wilson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub total: usize,
    pub retained: usize,
    pub correct: usize,
    pub fidelity: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CurvePoint {
    pub fn retained_rate(&self) -> f64 {
        self.retained as f64 / self.total as f64
    }
}

/// Fraction of retained logical values equal to `target`.
pub fn logical_fidelity(logicals: &[bool], retained: &[bool], target: bool, k: usize, bar: ErrorBar) -> CurvePoint {
    let total = logicals.len();
    let mut kept = 0;
    let mut correct = 0;
    for (&l, &r) in logicals.iter().zip(retained) {
        if r {
            kept += 1;
            correct += usize::from(l == target);
        }
    }
    let n = kept as f64;
    let f = if kept == 0 { f64::NAN } else { correct as f64 / n };
    let stderr = if kept == 0 { f64::NAN } else { (f * (1.0 - f) / n).sqrt() };
    let (lower, upper) = match bar {
        ErrorBar::Wald => ((f - stderr).max(0.0), (f + stderr).min(1.0)),
        ErrorBar::Wilson => {
            let z2 = 1.0;
            let centre = (f + z2 / (2.0 * n)) / (1.0 + z2 / n);
            let half = (f * (1.0 - f) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
            (centre - half, centre + half)
        }
    };
    CurvePoint { k, total, retained: kept, correct, fidelity: f, stderr, lower, upper }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCurve {
    pub basis: Basis,
    pub scheme: PostSelectScheme,
    pub decoded: bool,
    pub points: Vec<CurvePoint>,
}

impl FidelityCurve {
    pub fn fit(&self) -> Result<FitResult> {
        let pts: Vec<(f64, f64)> =
            self.points.iter().filter(|p| p.retained > 0).map(|p| (p.k as f64, p.fidelity)).collect();
        fit_logical_error(&pts)
    }
}

pub fn curves_csv(curves: &[FidelityCurve]) -> String {
    let mut out = String::from("basis,scheme,decoded,k,total,retained,retained_rate,correct,fidelity,stderr,lower,upper\n");
    for c in curves {
        for p in &c.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6}\n",
                match c.basis {
                    Basis::Z => "z",
                    Basis::X => "x",
                },
                c.scheme.name(),
                c.decoded,
                p.k,
                p.total,
                p.retained,
                p.retained_rate(),
                p.correct,
                p.fidelity,
                p.stderr,
                p.lower,
                p.upper
            ));
        }
    }
    out
}

/// Logical value of the noiseless circuit.
pub fn ideal_logical(layout: &CodeLayout, memory: &MemoryCircuit) -> Result<bool> {
    let bits = reference_sample(&memory.circuit, 0)?;
    let spec = DetectorSpec::new(layout, memory, Selection::Consistent);
    Ok(spec.raw_logical(|s| bits[s]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryConfig {
    pub distance: usize,
    pub basis: Basis,
    pub cycles: Vec<usize>,
    pub shots: usize,
    pub seed: u64,
    pub engine: Engine,
    /// `None` runs noiseless.
    pub noise: Option<NoiseOptions>,
    pub error_bar: ErrorBar,
}

/// One cycle count: detection events, raw and corrected logical values.
#[derive(Clone, Debug)]
pub struct MemoryPoint {
    pub k: usize,
    pub target: bool,
    pub detections: DetectionMatrix,
    pub corrected: Vec<bool>,
}

impl MemoryPoint {
    pub fn raw(&self) -> Vec<bool> {
        (0..self.detections.shots()).map(|s| self.detections.raw_logical(s)).collect()
    }
}

/// Seed of the shots at cycle count `k`.
pub fn point_seed(seed: u64, basis: Basis, k: usize) -> u64 {
    let b = match basis {
        Basis::Z => "z",
        Basis::X => "x",
    };
    derive_seed(seed, &format!("memory/{b}/{k}"))
}

/// Simulates, extracts detection events and decodes one cycle count.
pub fn run_memory_point(cfg: &MemoryConfig, cal: &CalibrationTable, k: usize) -> Result<MemoryPoint> {
    let layout = CodeLayout::new(cfg.distance)?;
    let memory = build_memory_circuit_with(&layout, cfg.basis, k, &cal.durations_ns)?;
    let target = ideal_logical(&layout, &memory)?;
    let spec = DetectorSpec::new(&layout, &memory, Selection::Consistent);
    let seed = point_seed(cfg.seed, cfg.basis, k);
    let (batch, decoder) = match &cfg.noise {
        Some(opts) => {
            let (noisy, model) = attach_noise(&memory.circuit, cal, opts)?;
            let batch = run_circuit(&noisy, cfg.engine, Some(&model), cfg.shots, seed)?;
            let faults = enumerate_faults(&noisy, &model, &spec)?;
            let decoder = if faults.iter().any(|f| !f.detectors.is_empty()) {
                Some(Decoder::new(&build_detector_graph(&faults, &spec)?))
            } else {
                None
            };
            (batch, decoder)
        }
        None => (run_circuit(&memory.circuit, cfg.engine, None, cfg.shots, seed)?, None),
    };
    let detections = DetectionMatrix::extract(&batch, &spec)?;
    let corrected = match decoder {
        Some(d) => d.decode_matrix(&detections)?,
        None => (0..detections.shots()).map(|s| detections.raw_logical(s)).collect(),
    };
    Ok(MemoryPoint { k, target, detections, corrected })
}

/// Curves for every scheme, undecoded and decoded.
pub fn build_curves(basis: Basis, points: &[MemoryPoint], bar: ErrorBar) -> Vec<FidelityCurve> {
    let mut curves = Vec::new();
    for decoded in [false, true] {
        for scheme in PostSelectScheme::ALL {
            let pts = points
                .iter()
                .map(|p| {
                    let kept = postselect(&p.detections, scheme);
                    let values = if decoded { p.corrected.clone() } else { p.raw() };
                    logical_fidelity(&values, &kept, p.target, p.k, bar)
                })
                .collect();
            curves.push(FidelityCurve { basis, scheme, decoded, points: pts });
        }
    }
    curves
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub basis: Basis,
    pub scheme: PostSelectScheme,
    pub decoded: bool,
    pub fit: Option<FitResult>,
    pub lifetime_us: Option<f64>,
    pub error: Option<String>,
}

pub fn fit_curves(curves: &[FidelityCurve], tau_cycle_us: f64) -> Vec<CurveFit> {
    curves
        .iter()
        .map(|c| {
            let (fit, error) = match c.fit() {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let lifetime_us = fit
                .as_ref()
                .and_then(|f| crate::analysis::fit::logical_lifetime(f.epsilon, tau_cycle_us).ok())
                .and_then(|l| l.t_l_us);
            CurveFit { basis: c.basis, scheme: c.scheme, decoded: c.decoded, fit, lifetime_us, error }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_flip_fidelity() {
        let vals: Vec<bool> = (0..10_000).map(|i| (i * 7919 + 13) % 97 < 48).collect();
        let keep = vec![true; vals.len()];
        let p = logical_fidelity(&vals, &keep, false, 1, ErrorBar::Wald);
        assert!((p.fidelity - 0.5).abs() < 3.0 / 100.0);
        let w = logical_fidelity(&vals, &keep, false, 1, ErrorBar::Wilson);
        assert!(w.lower < w.fidelity && w.fidelity < w.upper);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in PostSelectScheme::ALL {
            assert_eq!(s.name().parse::<PostSelectScheme>().unwrap(), s);
        }
    }
}
