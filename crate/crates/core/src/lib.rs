//! Measurement-only quantum computation.
//!
//! Gate-level circuits are lowered into programs that contain nothing but
//! projective measurements, classical feed-forward and a Pauli frame. Two
//! simulation engines back everything: a dense statevector engine (the
//! ground truth) and a stabilizer tableau engine.

pub mod clifford;
pub mod compiler;
pub mod error;
pub mod exec;
pub mod formats;
pub mod frame;
pub mod gadgets;
pub mod linalg;
pub mod measure;
pub mod msets;
pub mod pauli;
pub mod program;
pub mod state;
pub mod stats;
pub mod tableau;

pub use error::{Error, Result};
