//! Rotated surface-code layouts and circuits.

pub mod cycle;
pub mod layout;

pub use cycle::{
    build_cycle_circuit, build_memory_circuit, build_memory_circuit_with, cycle_duration, CyclePlan, MemoryCircuit,
    RecordMap,
};
pub use layout::{Basis, CodeLayout, StabKind};
