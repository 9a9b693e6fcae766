//! Device calibration tables.
//!
//! The JSON file lists per-qubit coherence, readout and gate-error data, the
//! CZ error per coupled pair and layer pattern, and the global durations.
//! Fidelities and errors are stored as probabilities (0.977, not 97.7).

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::Pattern;
use crate::error::{Error, Result};

pub const DEFAULT_CALIBRATION_JSON: &str = include_str!("../../data/default_calibration.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub name: String,
    #[serde(rename = "T1_us")]
    pub t1_us: f64,
    #[serde(rename = "T2_echo_us")]
    pub t2_echo_us: f64,
    #[serde(rename = "T2_star_us", default, skip_serializing_if = "Option::is_none")]
    pub t2_star_us: Option<f64>,
    #[serde(rename = "F00")]
    pub f00: f64,
    #[serde(rename = "F11")]
    pub f11: f64,
    pub e1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CzParams {
    pub pattern: Pattern,
    pub pair: [String; 2],
    pub e2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub oneq: f64,
    pub twoq: f64,
    pub measure: f64,
    pub depletion: f64,
}

impl Durations {
    pub fn measure_window_ns(&self) -> f64 {
        self.measure + self.depletion
    }
}

/// On-disk form; any per-qubit number may be omitted and is then filled with
/// the average of the rows that have it.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    qubits: Vec<RawQubit>,
    #[serde(default)]
    cz: Vec<RawCz>,
    durations_ns: Durations,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    name: String,
    #[serde(rename = "T1_us")]
    t1_us: Option<f64>,
    #[serde(rename = "T2_echo_us")]
    t2_echo_us: Option<f64>,
    #[serde(rename = "T2_star_us")]
    t2_star_us: Option<f64>,
    #[serde(rename = "F00")]
    f00: Option<f64>,
    #[serde(rename = "F11")]
    f11: Option<f64>,
    e1: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCz {
    pattern: String,
    pair: [String; 2],
    e2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub qubits: Vec<QubitParams>,
    pub cz: Vec<CzParams>,
    pub durations_ns: Durations,
}

fn fill(values: &mut [Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        return None;
    }
    let mean = present.iter().sum::<f64>() / present.len() as f64;
    for v in values.iter_mut() {
        v.get_or_insert(mean);
    }
    Some(mean)
}

impl CalibrationTable {
    pub fn default_table() -> Self {
        Self::from_json(DEFAULT_CALIBRATION_JSON).expect("bundled calibration is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTable = serde_json::from_str(text)
            .map_err(|e| Error::calibration(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        if raw.qubits.is_empty() {
            return Err(Error::calibration("qubits", "table lists no qubits"));
        }
        let n = raw.qubits.len();
        let mut cols: [Vec<Option<f64>>; 6] = Default::default();
        for q in &raw.qubits {
            for (col, v) in cols.iter_mut().zip([q.t1_us, q.t2_echo_us, q.t2_star_us, q.f00, q.f11, q.e1]) {
                col.push(v);
            }
        }
        let names = ["T1_us", "T2_echo_us", "T2_star_us", "F00", "F11", "e1"];
        for (k, col) in cols.iter_mut().enumerate() {
            // T2* is optional and may be absent everywhere.
            if fill(col).is_none() && k != 2 {
                return Err(Error::calibration(format!("qubits[*].{}", names[k]), "missing in every row"));
            }
        }
        let qubits: Vec<QubitParams> = raw
            .qubits
            .into_iter()
            .enumerate()
            .map(|(i, q)| QubitParams {
                name: q.name,
                t1_us: cols[0][i].expect("filled"),
                t2_echo_us: cols[1][i].expect("filled"),
                t2_star_us: cols[2][i],
                f00: cols[3][i].expect("filled"),
                f11: cols[4][i].expect("filled"),
                e1: cols[5][i].expect("filled"),
            })
            .collect();
        debug_assert_eq!(qubits.len(), n);

        let mut pattern_cols: HashMap<Pattern, Vec<Option<f64>>> = HashMap::new();
        let mut parsed = Vec::with_capacity(raw.cz.len());
        for (i, c) in raw.cz.iter().enumerate() {
            let mut chars = c.pattern.chars();
            let pattern = match (chars.next().and_then(Pattern::from_char), chars.next()) {
                (Some(p), None) => p,
                _ => return Err(Error::calibration(format!("cz[{i}].pattern"), format!("unknown pattern {:?}", c.pattern))),
            };
            pattern_cols.entry(pattern).or_default().push(c.e2);
            parsed.push(pattern);
        }
        for col in pattern_cols.values_mut() {
            fill(col);
        }
        let mut cursor: HashMap<Pattern, usize> = HashMap::new();
        let mut cz = Vec::with_capacity(raw.cz.len());
        for (i, (c, pattern)) in raw.cz.into_iter().zip(parsed).enumerate() {
            let k = cursor.entry(pattern).or_insert(0);
            let e2 = pattern_cols[&pattern][*k].ok_or_else(|| {
                Error::calibration(format!("cz[{i}].e2"), "missing and no other entry of the pattern has it")
            })?;
            *k += 1;
            cz.push(CzParams { pattern, pair: c.pair, e2 });
        }
        let table = CalibrationTable { qubits, cz, durations_ns: raw.durations_ns };
        table.validate()?;
        Ok(table)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every invariant, naming the offending row and field.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for (i, q) in self.qubits.iter().enumerate() {
            let at = |f: &str| format!("qubits[{i}] ({}).{f}", q.name);
            if seen.insert(q.name.clone(), i).is_some() {
                return Err(Error::calibration(at("name"), "duplicate qubit name"));
            }
            if !(q.t1_us > 0.0) {
                return Err(Error::calibration(at("T1_us"), format!("must be positive, got {}", q.t1_us)));
            }
            if !(q.t2_echo_us > 0.0) {
                return Err(Error::calibration(at("T2_echo_us"), format!("must be positive, got {}", q.t2_echo_us)));
            }
            if let Some(t) = q.t2_star_us {
                if !(t > 0.0) {
                    return Err(Error::calibration(at("T2_star_us"), format!("must be positive, got {t}")));
                }
            }
            for (f, v) in [("F00", q.f00), ("F11", q.f11)] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::calibration(at(f), format!("must lie in (0, 1], got {v}")));
                }
            }
            if !(0.0..1.0).contains(&q.e1) {
                return Err(Error::calibration(at("e1"), format!("must lie in [0, 1), got {}", q.e1)));
            }
        }
        let mut pairs = HashMap::new();
        for (i, c) in self.cz.iter().enumerate() {
            for name in &c.pair {
                if !seen.contains_key(name) {
                    return Err(Error::calibration(format!("cz[{i}].pair"), format!("unknown qubit {name}")));
                }
            }
            if c.pair[0] == c.pair[1] {
                return Err(Error::calibration(format!("cz[{i}].pair"), "pair repeats a qubit"));
            }
            if !(0.0..1.0).contains(&c.e2) {
                return Err(Error::calibration(format!("cz[{i}].e2"), format!("must lie in [0, 1), got {}", c.e2)));
            }
            if let Some(prev) = pairs.insert(pair_key(&c.pair[0], &c.pair[1]), i) {
                return Err(Error::calibration(format!("cz[{i}].pair"), format!("pair already listed at cz[{prev}]")));
            }
        }
        let d = &self.durations_ns;
        for (f, v) in [("oneq", d.oneq), ("twoq", d.twoq), ("measure", d.measure), ("depletion", d.depletion)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::calibration(format!("durations_ns.{f}"), format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn qubit(&self, name: &str) -> Option<&QubitParams> {
        self.qubits.iter().find(|q| q.name == name)
    }

    pub fn cz_entry(&self, a: &str, b: &str) -> Option<&CzParams> {
        let key = pair_key(a, b);
        self.cz.iter().find(|c| pair_key(&c.pair[0], &c.pair[1]) == key)
    }

    pub fn pattern_average(&self, pattern: Pattern) -> Option<f64> {
        let v: Vec<f64> = self.cz.iter().filter(|c| c.pattern == pattern).map(|c| c.e2).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn average_e1(&self) -> f64 {
        self.qubits.iter().map(|q| q.e1).sum::<f64>() / self.qubits.len() as f64
    }

    pub fn average_e2(&self) -> Option<f64> {
        (!self.cz.is_empty()).then(|| self.cz.iter().map(|c| c.e2).sum::<f64>() / self.cz.len() as f64)
    }

    /// Qubit with the longest T1.
    pub fn best_t1(&self) -> &QubitParams {
        self.qubits
            .iter()
            .max_by(|a, b| a.t1_us.total_cmp(&b.t1_us))
            .expect("table has at least one qubit")
    }

    /// Copy with every error source multiplied by `factor`: gate errors and
    /// readout infidelities scale linearly (capped below one) and coherence
    /// times scale by `1/factor`. A factor of zero yields a noiseless table.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("scale factor {factor} must be finite and non-negative")));
        }
        const CAP: f64 = 0.999_999;
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.e1 = (q.e1 * factor).min(CAP);
            q.f00 = 1.0 - ((1.0 - q.f00) * factor).min(CAP);
            q.f11 = 1.0 - ((1.0 - q.f11) * factor).min(CAP);
            q.t1_us = if factor == 0.0 { f64::INFINITY } else { q.t1_us / factor };
            q.t2_echo_us = if factor == 0.0 { f64::INFINITY } else { q.t2_echo_us / factor };
            q.t2_star_us = q.t2_star_us.map(|t| if factor == 0.0 { f64::INFINITY } else { t / factor });
        }
        for c in &mut out.cz {
            c.e2 = (c.e2 * factor).min(CAP);
        }
        Ok(out)
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_averages() {
        let t = CalibrationTable::default_table();
        assert_eq!(t.qubits.len(), 17);
        assert_eq!(t.cz.len(), 24);
        assert!((t.average_e1() - 0.00098).abs() < 0.000005);
        assert!((t.average_e2().unwrap() - 0.01035).abs() < 0.00001);
        assert_eq!(t.qubit("D1").unwrap().t1_us, 35.9);
        let b = t.cz_entry("X2", "D1").unwrap();
        assert_eq!(b.pattern, Pattern::B);
        assert!((b.e2 - 0.024).abs() < 1e-12);
        assert_eq!(t.best_t1().name, "D1");
    }

    #[test]
    fn cz_rows_are_checked_and_filled() {
        let base = r#"{"qubits":[{"name":"a","T1_us":10,"T2_echo_us":2,"F00":0.9,"F11":0.8,"e1":0.001},
                                  {"name":"b","T1_us":10,"T2_echo_us":2,"F00":0.9,"F11":0.8,"e1":0.001},
                                  {"name":"c","T1_us":10,"T2_echo_us":2,"F00":0.9,"F11":0.8,"e1":0.001}],
                       "cz":CZ,
                       "durations_ns":{"oneq":25,"twoq":32,"measure":1500,"depletion":2400}}"#;
        let with = |cz: &str| CalibrationTable::from_json(&base.replace("CZ", cz));
        let err = with(r#"[{"pattern":"A","pair":["a","x"],"e2":0.01}]"#).unwrap_err().to_string();
        assert!(err.contains("cz[0].pair"), "{err}");
        let err = with(r#"[{"pattern":"A","pair":["a","b"],"e2":0.01},{"pattern":"B","pair":["b","a"],"e2":0.01}]"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("already listed"), "{err}");
        let err = with(r#"[{"pattern":"E","pair":["a","b"],"e2":0.01}]"#).unwrap_err().to_string();
        assert!(err.contains("cz[0].pattern"), "{err}");
        let t = with(r#"[{"pattern":"A","pair":["a","b"]},{"pattern":"A","pair":["b","c"],"e2":0.02}]"#).unwrap();
        assert_eq!(t.cz_entry("b", "a").unwrap().e2, 0.02);
    }

    #[test]
    fn fills_qubit_averages() {
        let text = r#"{"qubits":[{"name":"a","T1_us":10,"T2_echo_us":2,"F00":0.9,"F11":0.8,"e1":0.001},
                                  {"name":"b","T2_echo_us":4,"F00":0.95,"F11":0.9}],
                       "durations_ns":{"oneq":25,"twoq":32,"measure":1500,"depletion":2400}}"#;
        let t = CalibrationTable::from_json(text).unwrap();
        assert_eq!(t.qubit("b").unwrap().t1_us, 10.0);
        assert_eq!(t.qubit("b").unwrap().e1, 0.001);
        assert_eq!(t.qubit("a").unwrap().t2_star_us, None);
    }

    #[test]
    fn invariant_violation_names_field() {
        let text = r#"{"qubits":[{"name":"a","T1_us":-1,"T2_echo_us":2,"F00":0.9,"F11":0.8,"e1":0.001}],
                       "durations_ns":{"oneq":25,"twoq":32,"measure":1500,"depletion":2400}}"#;
        let err = CalibrationTable::from_json(text).unwrap_err().to_string();
        assert!(err.contains("qubits[0] (a).T1_us"), "{err}");
        assert!(CalibrationTable::from_json("{").is_err());
    }

    #[test]
    fn zero_scale_is_noiseless() {
        let t = CalibrationTable::default_table().scaled(0.0).unwrap();
        assert!(t.qubits.iter().all(|q| q.e1 == 0.0 && q.f00 == 1.0 && q.t1_us.is_infinite()));
        assert!(t.cz.iter().all(|c| c.e2 == 0.0));
    }
}
