//! Simulation engines and shot storage.

pub mod frame;
pub mod pauli;
pub mod run;
pub mod shotfile;
pub mod statevector;
pub mod tableau;

pub use pauli::{Pauli, PauliString};
pub use run::{reference_sample, run_circuit, Engine, ShotBatch, ShotRecord};
pub use statevector::StateVector;
pub use tableau::StabilizerTableau;
