//! The subcommands. Each takes resolved [`Settings`] and writes its artifacts
//! plus a manifest into the output directory.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::analysis::{
    build_curves, curves_csv, fit_curves, fit_logical_error, ideal_logical, logical_fidelity, logical_lifetime,
    physical_reference_curve, postselect, run_memory_point, MemoryConfig,
};
use crate::cli::config::{Settings, WeightMode};
use crate::cli::manifest::{RunManifest, RunWriter};
use crate::decoder::{build_detector_graph, enumerate_faults, Decoder};
use crate::detection::{correlation_matrix, def_curve, DetectionMatrix, DetectorSpec, Selection};
use crate::error::{Error, Result};
use crate::noise::{attach_noise, CalibrationTable};
use crate::sim::{run_circuit, shotfile, ShotBatch};
use crate::surface_code::{build_memory_circuit_with, cycle_duration, CodeLayout, MemoryCircuit};
use crate::xeb::{run_xeb, xeb_csv, XebConfig};

const SHOTS_FILE: &str = "shots.qshot";
const CALIBRATION_FILE: &str = "calibration.json";

fn pretty(value: &impl serde::Serialize) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn record_calibration(w: &mut RunWriter, s: &Settings) -> Result<()> {
    if let Some(p) = &s.calibration {
        w.input_file(p)?;
    }
    Ok(())
}

pub fn layout(s: &Settings) -> Result<()> {
    let layout = CodeLayout::new(s.distance)?;
    let text = layout.to_json()?;
    match &s.out {
        Some(dir) => {
            let mut w = RunWriter::new(dir, s)?;
            w.write("layout.json", format!("{text}\n").as_bytes())?;
            w.finish()?;
            println!(
                "d={} layout: {} data, {} ancilla, {} couplings -> {}",
                s.distance,
                layout.n_data(),
                layout.n_ancillas(),
                layout.couplings.len(),
                dir.join("layout.json").display()
            );
        }
        None => {
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    Ok(())
}

pub fn simulate(s: &Settings) -> Result<()> {
    let dir = s.out_dir()?;
    let cal = s.calibration_table()?;
    let mut w = RunWriter::new(dir, s)?;
    record_calibration(&mut w, s)?;
    let layout = CodeLayout::new(s.distance)?;
    let memory = build_memory_circuit_with(&layout, s.basis, s.cycles, &cal.durations_ns)?;
    let batch = match &s.noise {
        Some(opts) => {
            let (noisy, model) = attach_noise(&memory.circuit, &cal, opts)?;
            w.mark("build");
            run_circuit(&noisy, s.engine, Some(&model), s.shots, s.seed)?
        }
        None => {
            w.mark("build");
            run_circuit(&memory.circuit, s.engine, None, s.shots, s.seed)?
        }
    };
    w.mark("simulate");
    w.write(SHOTS_FILE, &shotfile::encode(&batch))?;
    w.write(CALIBRATION_FILE, format!("{}\n", cal.to_json()?).as_bytes())?;
    w.write("circuit.txt", memory.circuit.to_text().as_bytes())?;
    w.mark("write");
    w.finish()?;
    println!("{} shots x {} measurements -> {}", batch.shots(), batch.n_measurements(), dir.join(SHOTS_FILE).display());
    Ok(())
}

/// A verified simulation output directory.
struct Simulation {
    manifest: RunManifest,
    cal: CalibrationTable,
    layout: CodeLayout,
    memory: MemoryCircuit,
    batch: ShotBatch,
}

impl Simulation {
    fn load(dir: &Path, w: &mut RunWriter) -> Result<Simulation> {
        let manifest = RunManifest::load(dir)?;
        if manifest.config.command != "simulate" {
            return Err(Error::data(format!("{} holds a {} run, not a simulation", dir.display(), manifest.config.command)));
        }
        let (shots, d1) = manifest.read_verified(dir, SHOTS_FILE)?;
        let (cal, d2) = manifest.read_verified(dir, CALIBRATION_FILE)?;
        w.input(d1);
        w.input(d2);
        let text = String::from_utf8(cal).map_err(|_| Error::data("calibration copy is not UTF-8"))?;
        let cal = CalibrationTable::from_json(&text)?;
        let c = &manifest.config;
        let layout = CodeLayout::new(c.distance)?;
        let memory = build_memory_circuit_with(&layout, c.basis, c.cycles, &cal.durations_ns)?;
        let batch = shotfile::decode(&shots)?;
        Ok(Simulation { manifest, cal, layout, memory, batch })
    }
}

pub fn detect(s: &Settings) -> Result<()> {
    let dir = s.out_dir()?;
    let mut w = RunWriter::new(dir, s)?;
    let sim = Simulation::load(s.input_path()?, &mut w)?;
    w.mark("load");
    let spec = DetectorSpec::new(&sim.layout, &sim.memory, Selection::Consistent);
    let m = DetectionMatrix::extract(&sim.batch, &spec)?;
    let def = def_curve(&m)?;
    let corr = correlation_matrix(&m)?;
    w.mark("detect");
    let total: usize = (0..m.shots()).map(|shot| m.fired(shot).len()).sum();
    w.write("def.csv", def.to_csv().as_bytes())?;
    w.write("correlation.csv", corr.to_csv().as_bytes())?;
    w.write(
        "events.json",
        &pretty(&json!({
            "shots": m.shots(),
            "detectors": spec.n_detectors(),
            "detection_events": total,
            "mid_round_def": def.mid_round_mean(),
        }))?,
    )?;
    w.finish()?;
    println!("detection events: {total} over {} shots x {} detectors", m.shots(), spec.n_detectors());
    Ok(())
}

pub fn decode(s: &Settings) -> Result<()> {
    let dir = s.out_dir()?;
    let mut w = RunWriter::new(dir, s)?;
    let sim = Simulation::load(s.input_path()?, &mut w)?;
    w.mark("load");
    let spec = DetectorSpec::new(&sim.layout, &sim.memory, Selection::Consistent);
    let m = DetectionMatrix::extract(&sim.batch, &spec)?;
    let opts = sim.manifest.config.noise.unwrap_or_default();
    let (noisy, model) = attach_noise(&sim.memory.circuit, &sim.cal, &opts)?;
    let faults = enumerate_faults(&noisy, &model, &spec)?;
    let mut graph = build_detector_graph(&faults, &spec)?;
    graph = match s.weights {
        WeightMode::Calibration => graph,
        WeightMode::Uniform => graph.with_uniform_weights(),
        WeightMode::Correlation => graph.with_correlation_weights(&correlation_matrix(&m)?)?,
    };
    for warning in &graph.warnings {
        log::warn!("{warning}");
    }
    w.mark("graph");
    let decoder = Decoder::new(&graph);
    let corrected = decoder.decode_matrix(&m)?;
    w.mark("decode");
    let raw: Vec<bool> = (0..m.shots()).map(|shot| m.raw_logical(shot)).collect();
    let target = ideal_logical(&sim.layout, &sim.memory)?;
    let kept = postselect(&m, s.scheme);
    let k = sim.manifest.config.cycles;
    let raw_point = logical_fidelity(&raw, &kept, target, k, s.error_bar);
    let dec_point = logical_fidelity(&corrected, &kept, target, k, s.error_bar);
    w.write("graph.json", format!("{}\n", graph.to_json()?).as_bytes())?;
    w.write("decode.csv", crate::decoder::decode_csv(&raw, &corrected).as_bytes())?;
    w.write(
        "decode.json",
        &pretty(&json!({
            "target": target,
            "scheme": s.scheme,
            "weights": s.weights,
            "raw": raw_point,
            "decoded": dec_point,
        }))?,
    )?;
    w.finish()?;
    println!(
        "k={k} {}: raw F = {:.4}, decoded F = {:.4} ({} of {} shots kept)",
        s.scheme.name(),
        raw_point.fidelity,
        dec_point.fidelity,
        dec_point.retained,
        dec_point.total
    );
    Ok(())
}

pub fn analyze(s: &Settings) -> Result<()> {
    let dir = s.out_dir()?;
    let cal = s.calibration_table()?;
    let mut w = RunWriter::new(dir, s)?;
    record_calibration(&mut w, s)?;
    let cfg = MemoryConfig {
        distance: s.distance,
        basis: s.basis,
        cycles: (1..=s.cycles).collect(),
        shots: s.shots,
        seed: s.seed,
        engine: s.engine,
        noise: s.noise,
        error_bar: s.error_bar,
    };
    let mut points = Vec::new();
    for &k in &cfg.cycles {
        points.push(run_memory_point(&cfg, &cal, k)?);
        w.mark(&format!("k{k}"));
    }
    let curves = build_curves(s.basis, &points, s.error_bar);
    let tau = cycle_duration(&cal.durations_ns);
    let fits = fit_curves(&curves, tau);
    let best = cal.best_t1();
    let mut reference = String::from("k,fidelity\n");
    for k in 0..=s.cycles {
        reference.push_str(&format!("{k},{:.6}\n", physical_reference_curve(best.t1_us, tau, k as f64)?));
    }
    w.write("curves.csv", curves_csv(&curves).as_bytes())?;
    w.write(
        "fits.json",
        &pretty(&json!({
            "tau_cycle_us": tau,
            "reference_qubit": best.name,
            "reference_t1_us": best.t1_us,
            "fits": fits,
        }))?,
    )?;
    w.write("reference.csv", reference.as_bytes())?;
    w.mark("write");
    w.finish()?;
    for f in &fits {
        match &f.fit {
            Some(r) => println!(
                "{:>7} {:>9}: eps_L = {:.4}  T_L = {}",
                f.scheme.name(),
                if f.decoded { "decoded" } else { "raw" },
                r.epsilon,
                f.lifetime_us.map_or("inf".to_string(), |t| format!("{t:.1} us"))
            ),
            None => println!(
                "{:>7} {:>9}: {}",
                f.scheme.name(),
                if f.decoded { "decoded" } else { "raw" },
                f.error.as_deref().unwrap_or("no fit")
            ),
        }
    }
    Ok(())
}

pub fn xeb(s: &Settings) -> Result<()> {
    let dir = s.out_dir()?;
    let cal = s.calibration_table()?;
    let mut w = RunWriter::new(dir, s)?;
    record_calibration(&mut w, s)?;
    let layout = CodeLayout::new(s.distance)?;
    let cfg = XebConfig { samples: s.samples, trajectories: s.trajectories, noise: s.noise };
    let mut results = Vec::new();
    for seed in s.seed..s.seed + s.xeb_seeds as u64 {
        results.push(run_xeb(&layout, &cal, seed, &cfg)?);
        w.mark(&format!("seed{seed}"));
    }
    let n = results.len() as f64;
    let mean = results.iter().map(|r| r.result.fidelity).sum::<f64>() / n;
    let spread = if results.len() > 1 {
        (results.iter().map(|r| (r.result.fidelity - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        results[0].result.stderr
    };
    let predicted = results[0].result.predicted;
    w.write("xeb.csv", xeb_csv(&results).as_bytes())?;
    w.write(
        "xeb.json",
        &pretty(&json!({
            "mean_fidelity": mean,
            "stderr_of_mean": spread,
            "predicted": predicted,
            "ratio": predicted.map(|p| mean / p),
        }))?,
    )?;
    w.finish()?;
    println!(
        "F_XEB = {mean:.4} +- {spread:.4} over {} seeds{}",
        results.len(),
        predicted.map_or(String::new(), |p| format!(", predicted {p:.4}"))
    );
    Ok(())
}

type PointGroup = (String, Vec<(f64, f64)>);

/// Groups of `(k, F)` points from a CSV with at least `k` and `fidelity`
/// columns. `basis`, `scheme` and `decoded` columns, when present, split the
/// rows into separate curves.
fn read_points(text: &str) -> Result<Vec<PointGroup>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::data("empty fit input"))?.split(',').map(str::trim).collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let kc = col("k").ok_or_else(|| Error::data("fit input has no k column"))?;
    let fc = col("fidelity").ok_or_else(|| Error::data("fit input has no fidelity column"))?;
    let keys: Vec<usize> = ["basis", "scheme", "decoded"].iter().filter_map(|n| col(n)).collect();
    let mut groups: Vec<PointGroup> = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |c: usize| -> Result<f64> {
            cells
                .get(c)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::data(format!("fit input row {}: bad number in column {}", i + 2, header[c])))
        };
        let (k, f) = (num(kc)?, num(fc)?);
        if f.is_nan() {
            continue;
        }
        let key = keys.iter().map(|&c| cells.get(c).copied().unwrap_or("")).collect::<Vec<_>>().join("/");
        match groups.iter_mut().find(|g| g.0 == key) {
            Some(g) => g.1.push((k, f)),
            None => groups.push((key, vec![(k, f)])),
        }
    }
    if groups.is_empty() {
        return Err(Error::data("fit input has no rows"));
    }
    Ok(groups)
}

pub fn fit(s: &Settings) -> Result<()> {
    let input = s.input_path()?;
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let cal = s.calibration_table()?;
    let tau = cycle_duration(&cal.durations_ns);
    let mut entries = Vec::new();
    for (curve, pts) in read_points(&text)? {
        let entry = match fit_logical_error(&pts) {
            Ok(f) => {
                let life = logical_lifetime(f.epsilon, tau)?;
                println!("{curve:>16}: eps_L = {:.5}, k0 = {:.3}, residual = {:.2e}", f.epsilon, f.k0, f.residual);
                json!({"curve": curve, "fit": f, "lifetime_us": life.t_l_us})
            }
            Err(e) => {
                println!("{curve:>16}: {e}");
                json!({"curve": curve, "error": e.to_string()})
            }
        };
        entries.push(entry);
    }
    let body = pretty(&json!({"tau_cycle_us": tau, "curves": entries}))?;
    if let Some(dir) = &s.out {
        let mut w = RunWriter::new(dir, s)?;
        w.input_file(input)?;
        record_calibration(&mut w, s)?;
        w.write("fit.json", &body)?;
        w.finish()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_input_groups() {
        let text = "basis,scheme,decoded,k,fidelity\nz,none,false,1,0.9\nz,none,false,2,0.8\nz,both,true,1,0.95\n";
        let g = read_points(text).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].0, "z/none/false");
        assert_eq!(g[0].1, vec![(1.0, 0.9), (2.0, 0.8)]);
        assert!(read_points("k,f\n1,2\n").is_err());
        assert!(read_points("k,fidelity\n1,abc\n").is_err());
    }
}
