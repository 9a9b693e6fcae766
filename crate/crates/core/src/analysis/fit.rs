//! Logical-error fitting, lifetime and the single-qubit reference decay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Linearized,
    GoldenSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Logical error per cycle.
    pub epsilon: f64,
    pub k0: f64,
    /// Root-mean-square difference between the model and the input fidelities.
    pub residual: f64,
    pub method: FitMethod,
    pub points: usize,
}

/// `F(k) = (1 + (1 - 2ε)^(k - k0)) / 2`.
pub fn decay_model(epsilon: f64, k0: f64, k: f64) -> f64 {
    0.5 * (1.0 + (1.0 - 2.0 * epsilon).powf(k - k0))
}

fn rms(points: &[(f64, f64)], epsilon: f64, k0: f64) -> f64 {
    let sse: f64 = points.iter().map(|&(k, f)| (decay_model(epsilon, k0, k) - f).powi(2)).sum();
    (sse / points.len() as f64).sqrt()
}

/// Minimum of a unimodal function on `[lo, hi]`.
pub fn golden_section(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Fits `(k, F)` points to the decay model.
///
/// When every point has `F > 1/2` the model is linear in `ln(2F - 1)` and an
/// ordinary least-squares line gives both parameters. Otherwise `ε` is found
/// by golden-section search with the best `k0` chosen for each trial `ε`.
pub fn fit_logical_error(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::Unfittable(format!("need at least two points, got {}", points.len())));
    }
    if points.iter().all(|&(_, f)| f <= 0.5) {
        return Err(Error::Unfittable("every fidelity is at or below 1/2".into()));
    }
    let above = points.iter().filter(|&&(_, f)| f > 0.5).count();
    if above == points.len() && above >= 3 {
        let ys: Vec<(f64, f64)> = points.iter().map(|&(k, f)| (k, (2.0 * f - 1.0).ln())).collect();
        let n = ys.len() as f64;
        let mx = ys.iter().map(|p| p.0).sum::<f64>() / n;
        let my = ys.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = ys.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = ys.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let slope = (sxy / sxx).min(0.0);
            let intercept = my - slope * mx;
            let epsilon = (1.0 - slope.exp()) / 2.0;
            let k0 = if slope < 0.0 { -intercept / slope } else { 0.0 };
            return Ok(FitResult {
                epsilon,
                k0,
                residual: rms(points, epsilon, k0),
                method: FitMethod::Linearized,
                points: points.len(),
            });
        }
    }
    let kmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let kmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let span = (kmax - kmin).max(1.0);
    let best_k0 = |eps: f64| golden_section(kmin - 10.0 * span, kmax + span, 1e-9, |k0| rms(points, eps, k0));
    let epsilon = golden_section(0.0, 0.5 - 1e-9, 1e-12, |eps| rms(points, eps, best_k0(eps)));
    let k0 = best_k0(epsilon);
    Ok(FitResult { epsilon, k0, residual: rms(points, epsilon, k0), method: FitMethod::GoldenSection, points: points.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifetimeEstimate {
    /// `None` when the fitted error is zero.
    pub t_l_us: Option<f64>,
    pub tau_cycle_us: f64,
}

pub fn logical_lifetime(epsilon: f64, tau_cycle_us: f64) -> Result<LifetimeEstimate> {
    if !(0.0..=0.5).contains(&epsilon) || !(tau_cycle_us > 0.0) {
        return Err(Error::invalid(format!("lifetime needs 0 <= eps <= 1/2 and tau > 0, got {epsilon}, {tau_cycle_us}")));
    }
    let t_l_us = (epsilon > 0.0).then(|| tau_cycle_us / (2.0 * epsilon));
    Ok(LifetimeEstimate { t_l_us, tau_cycle_us })
}

/// Fidelity of a bare qubit left alone for `k` cycles, decaying to 1/2 with `T1`.
pub fn physical_reference_curve(t1_us: f64, tau_cycle_us: f64, k: f64) -> Result<f64> {
    if !(t1_us > 0.0) {
        return Err(Error::invalid(format!("T1 must be positive, got {t1_us}")));
    }
    Ok(0.5 * (1.0 + (-k * tau_cycle_us / t1_us).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_curve_recovers_parameters() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, decay_model(0.05, 1.0, k as f64))).collect();
        let fit = fit_logical_error(&pts).unwrap();
        assert!((fit.epsilon - 0.05).abs() < 1e-9);
        assert!((fit.k0 - 1.0).abs() < 1e-6);
        assert_eq!(fit.method, FitMethod::Linearized);
    }

    #[test]
    fn flat_curve_has_zero_error() {
        let pts: Vec<(f64, f64)> = (1..=5).map(|k| (k as f64, 1.0)).collect();
        assert_eq!(fit_logical_error(&pts).unwrap().epsilon, 0.0);
    }

    #[test]
    fn fallback_when_a_point_is_below_half() {
        let mut pts: Vec<(f64, f64)> = (1..=6).map(|k| (k as f64, decay_model(0.2, 0.0, k as f64))).collect();
        pts[5].1 = 0.499;
        let fit = fit_logical_error(&pts).unwrap();
        assert_eq!(fit.method, FitMethod::GoldenSection);
        assert!((fit.epsilon - 0.2).abs() < 0.02, "{fit:?}");
        assert!(fit_logical_error(&[(1.0, 0.4), (2.0, 0.5)]).is_err());
    }

    #[test]
    fn lifetime_values() {
        let l = logical_lifetime(0.0322, 4.153).unwrap();
        assert!((l.t_l_us.unwrap() - 64.49).abs() < 0.01);
        assert_eq!(logical_lifetime(0.5, 4.153).unwrap().t_l_us, Some(4.153));
        assert_eq!(logical_lifetime(0.0, 4.153).unwrap().t_l_us, None);
        let twice = logical_lifetime(0.0322, 8.306).unwrap().t_l_us.unwrap();
        assert!((twice - 2.0 * l.t_l_us.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn reference_curve_values() {
        assert_eq!(physical_reference_curve(35.9, 4.153, 0.0).unwrap(), 1.0);
        assert!((physical_reference_curve(35.9, 4.153, 5.0).unwrap() - 0.7804).abs() < 1e-3);
        assert!((physical_reference_curve(35.9, 4.153, 1e6).unwrap() - 0.5).abs() < 1e-12);
        assert!(physical_reference_curve(0.0, 4.153, 1.0).is_err());
    }
}
