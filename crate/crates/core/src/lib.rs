//! Ising-model Boolean logic, array-multiplier networks, simulated annealing
//! and a stochastic flux-qubit circuit simulator.
//!
//! Multiplication runs forward by clamping the factor bits and reading the
//! product off the ground state; factoring runs the same network backwards by
//! clamping the product.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anneal;
pub mod capacity;
pub mod error;
pub mod flux;
pub mod format;
pub mod gates;
pub mod ising;
pub mod multiplier;
pub mod synth;

pub use error::{Error, Result};
pub use ising::{ClampAssignment, IsingModel, SpinState};
