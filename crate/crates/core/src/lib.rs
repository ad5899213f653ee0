//! Fourier expansions of Jacobi-Eisenstein series of integral weight for even
//! positive-definite lattices.
//!
//! The crate is organised bottom-up: exact arithmetic ([`arith`]), lattices and
//! their duals ([`lattice`]), exact residue counting ([`rep_count`]), local
//! densities ([`density`]), the coefficient pipelines ([`eisenstein`]) and
//! modularity checks ([`validation`]). [`cli`] wires these to the command line.

pub mod arith;
pub mod error;
pub mod lattice;
pub mod qexp;
pub mod rep_count;
pub mod density;
pub mod eisenstein;
pub mod validation;
pub mod cli;

pub use error::{Error, Result};
