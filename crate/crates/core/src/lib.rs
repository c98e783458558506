//! Certified lower bounds on the convex-roof three-tangle of three-qubit
//! states from measured expectation values of witness operators.

pub mod bound;
pub mod charcurve;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod qstate;

pub use error::{Error, Result};
