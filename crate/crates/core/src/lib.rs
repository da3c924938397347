//! Security analysis workbench for two-way quantum key distribution with
//! non-orthogonal qubit states.

pub mod attack;
pub mod bounds;
pub mod error;
pub mod gram;
pub mod math;
pub mod pauli;
pub mod protocol;
pub mod search;
pub mod simulator;
pub mod verify;

pub use error::{Error, Result};
