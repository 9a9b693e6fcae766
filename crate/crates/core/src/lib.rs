pub mod analysis;
pub mod cli;
pub mod circuit;
pub mod decoder;
pub mod detection;
pub mod error;
pub mod noise;
pub mod rng;
pub mod sim;
pub mod surface_code;
pub mod xeb;

pub use error::{Error, Result};
