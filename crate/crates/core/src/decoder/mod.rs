//! Detector error model, matching graph and minimum-weight perfect matching.

pub mod blossom;
pub mod graph;
pub mod matching;

pub use graph::{build_detector_graph, edge_weight, enumerate_faults, DetectorGraph, FaultKind, FaultSignature, GraphEdge};
pub use matching::{decode_csv, Decoder, Matching, WEIGHT_SCALE};
