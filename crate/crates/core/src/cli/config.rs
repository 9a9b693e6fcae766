//! Run configuration: JSON file, flags and defaults merged into [`Settings`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{ErrorBar, PostSelectScheme};
use crate::error::{Error, Result};
use crate::noise::{CalibrationTable, ErrorConvention, NoiseOptions};
use crate::sim::Engine;
use crate::surface_code::Basis;

/// Environment variable naming the calibration file used when neither the
/// flags nor the config file give one.
pub const CALIBRATION_ENV: &str = "SURFACE_LAB_CALIBRATION";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Weights from the calibrated noise model.
    #[default]
    Calibration,
    /// Weights from measured detector correlations, falling back to the model.
    Correlation,
    /// Every edge weighs the same.
    Uniform,
}

impl std::str::FromStr for WeightMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "calibration" | "model" => Ok(WeightMode::Calibration),
            "correlation" => Ok(WeightMode::Correlation),
            "uniform" => Ok(WeightMode::Uniform),
            other => Err(Error::invalid(format!("unknown weight mode {other:?}"))),
        }
    }
}

/// Everything a run can be told. Every field is optional; missing ones take
/// the value from the next layer down (flags, then file, then defaults).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub calibration: Option<PathBuf>,
    pub distance: Option<usize>,
    pub basis: Option<Basis>,
    pub cycles: Option<usize>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub engine: Option<Engine>,
    pub noise: Option<bool>,
    pub gate_noise: Option<bool>,
    pub idle_noise: Option<bool>,
    pub readout_noise: Option<bool>,
    pub convention: Option<ErrorConvention>,
    pub scheme: Option<PostSelectScheme>,
    pub error_bar: Option<ErrorBar>,
    pub weights: Option<WeightMode>,
    pub samples: Option<usize>,
    pub trajectories: Option<usize>,
    pub xeb_seeds: Option<usize>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config file {}: {e}", path.display())))
    }

    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: self.$f.or(lower.$f)),* } };
        }
        pick!(
            calibration, distance, basis, cycles, shots, seed, engine, noise, gate_noise, idle_noise,
            readout_noise, convention, scheme, error_bar, weights, samples, trajectories, xeb_seeds, input, out
        )
    }
}

/// Fully resolved configuration, echoed into every manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub command: String,
    /// `None` means the built-in table.
    pub calibration: Option<PathBuf>,
    pub distance: usize,
    pub basis: Basis,
    pub cycles: usize,
    pub shots: usize,
    pub seed: u64,
    pub engine: Engine,
    pub noise: Option<NoiseOptions>,
    pub scheme: PostSelectScheme,
    pub error_bar: ErrorBar,
    pub weights: WeightMode,
    pub samples: usize,
    pub trajectories: usize,
    pub xeb_seeds: usize,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn resolve(command: &str, cfg: RunConfig, env_calibration: Option<PathBuf>) -> Result<Settings> {
        let noise = if cfg.noise.unwrap_or(true) {
            Some(NoiseOptions {
                convention: cfg.convention.unwrap_or_default(),
                gates: cfg.gate_noise.unwrap_or(true),
                idle: cfg.idle_noise.unwrap_or(true),
                readout: cfg.readout_noise.unwrap_or(true),
            })
        } else {
            None
        };
        // `analyze` sweeps 1..=cycles, so its default is the short sweep.
        let default_cycles = if command == "analyze" { 5 } else { 11 };
        let s = Settings {
            command: command.to_string(),
            calibration: cfg.calibration.or(env_calibration),
            distance: cfg.distance.unwrap_or(3),
            basis: cfg.basis.unwrap_or(Basis::Z),
            cycles: cfg.cycles.unwrap_or(default_cycles),
            shots: cfg.shots.unwrap_or(if command == "analyze" { 480_000 } else { 10_000 }),
            seed: cfg.seed.unwrap_or(0),
            engine: cfg.engine.unwrap_or(Engine::Frame),
            noise,
            scheme: cfg.scheme.unwrap_or(PostSelectScheme::None),
            error_bar: cfg.error_bar.unwrap_or_default(),
            weights: cfg.weights.unwrap_or_default(),
            samples: cfg.samples.unwrap_or(100_000),
            trajectories: cfg.trajectories.unwrap_or(100),
            xeb_seeds: cfg.xeb_seeds.unwrap_or(9),
            input: cfg.input,
            out: cfg.out,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance < 3 || self.distance.is_multiple_of(2) {
            return Err(Error::invalid(format!("distance must be odd and at least 3, got {}", self.distance)));
        }
        for (name, v) in [
            ("cycles", self.cycles),
            ("shots", self.shots),
            ("samples", self.samples),
            ("trajectories", self.trajectories),
            ("xeb-seeds", self.xeb_seeds),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn calibration_table(&self) -> Result<CalibrationTable> {
        match &self.calibration {
            Some(p) => CalibrationTable::load(p),
            None => Ok(CalibrationTable::default_table()),
        }
    }

    pub fn out_dir(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::invalid(format!("{} needs --out", self.command)))
    }

    pub fn input_path(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| Error::invalid(format!("{} needs --input", self.command)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig = serde_json::from_str(r#"{"shots": 5, "seed": 3, "basis": "x"}"#).unwrap();
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let s = Settings::resolve("simulate", flags.over(file), None).unwrap();
        assert_eq!((s.shots, s.seed, s.basis), (5, 9, Basis::X));
        assert_eq!(s.cycles, 11);
        assert!(s.noise.is_some());
    }

    #[test]
    fn unknown_fields_and_bad_values_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"shotz": 5}"#).is_err());
        let cfg = RunConfig { distance: Some(4), ..Default::default() };
        assert!(Settings::resolve("simulate", cfg, None).is_err());
        let cfg = RunConfig { shots: Some(0), ..Default::default() };
        assert!(Settings::resolve("simulate", cfg, None).is_err());
    }

    #[test]
    fn environment_calibration_is_last_resort() {
        let env = Some(PathBuf::from("env.json"));
        let s = Settings::resolve("layout", RunConfig::default(), env.clone()).unwrap();
        assert_eq!(s.calibration, env);
        let cfg = RunConfig { calibration: Some("flag.json".into()), ..Default::default() };
        let s = Settings::resolve("layout", cfg, env).unwrap();
        assert_eq!(s.calibration, Some(PathBuf::from("flag.json")));
    }
}
