//! Qudit circuits with intermediate-level Toffoli decompositions, Grover
//! search, and leakage models.

pub mod circuit;
pub mod cli;
pub mod digits;
pub mod error;
pub mod gates;
pub mod grover;
pub mod leakage;
pub mod state;
pub mod table3;
pub mod toffoli;

pub use circuit::{Circuit, Delta, GateOp, SingleKind, WireSpec};
pub use error::{Error, Result};
pub use gates::UnitaryMatrix;
pub use state::{StateVector, TraceRecord, TraceState};
