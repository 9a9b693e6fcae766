//! Calibration data and the noise channels compiled from it.

pub mod attach;
pub mod calibration;
pub mod channels;

pub use attach::{attach_noise, depolarizing_from_avg_error, idle_channel, readout_flip, ErrorConvention, NoiseOptions};
pub use calibration::CalibrationTable;
pub use channels::{Channel, LocationClass, NoiseModel, PauliChannel, PauliTerm, ReadoutFlip};
