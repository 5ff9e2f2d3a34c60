//! Simulation of non-demolition measurement networks for the Bell and GHZ
//! bases, the Bell operators whose eigenstates those bases are, and an
//! authentication scheme built on repeated Bell-basis checks.

pub mod auth;
pub mod bell;
pub mod bell_operator;
pub mod error;
pub mod ghz;
pub mod statevec;
pub mod stats;

pub use error::{Error, Result};
pub use statevec::{GateKind, GateOp, HadamardConvention, MeasurementResult, StateDump, StateVector};
