//! Quantum Fisher information of single-parameter qubit channels acting on
//! very noisy (low-purity) inputs.
//!
//! The crate carries an exact density-operator oracle ([`fisher`]), the
//! series expansion of the QFI in the purity ([`series`]), closed forms for
//! single-qubit and pairwise-correlated protocols, and the measurement
//! schemes that attain them ([`protocols`]).

#![no_std]
// `!(x < y)` forms are deliberate so NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bloch;
pub mod dense;
mod error;
pub mod expr;
pub mod fisher;
pub mod fit;
pub mod linalg;
pub mod mstate;
pub mod protocols;
pub mod series;

pub use error::{Error, Result};
