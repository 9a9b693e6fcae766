//! Post-selection, fidelity curves, decay fits and lifetimes.

pub mod fit;
pub mod memory;

pub use fit::{
    decay_model, fit_logical_error, golden_section, logical_lifetime, physical_reference_curve, FitMethod, FitResult,
    LifetimeEstimate,
};
pub use memory::{
    build_curves, curves_csv, fit_curves, ideal_logical, logical_fidelity, point_seed, postselect, run_memory_point,
    CurveFit, CurvePoint, ErrorBar, FidelityCurve, MemoryConfig, MemoryPoint, PostSelectScheme,
};
