//! Fluctuation-theorem benchmarks for quantum annealers.
//!
//! The crate simulates annealing of a transverse-field Ising chain under
//! closed and noisy dynamics, evaluates two-point-measurement work
//! distributions together with the quantum efficacy, and audits shot data
//! (simulated or recorded on hardware) for unitality, adiabaticity and
//! defect formation.
//!
//! Everything here is pure computation over dense matrices and works with
//! `alloc` alone. The `std` feature (on by default) only switches the
//! linear algebra backend to its optimized matrix products; file formats
//! and the command-line tool live in the companion `annealbench` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod linalg;

pub mod archive;
pub mod bench;
pub mod chimera;
pub mod dynamics;
pub mod model;
pub mod noise;
pub mod tpm;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, RMatrix, C64};

/// Largest chain length accepted unless a caller raises it explicitly.
/// State vectors of this size are cheap; the one dense eigendecomposition
/// of `H(0)` is what bounds it.
pub const DEFAULT_MAX_SPINS: usize = 12;

/// Largest chain length for density-matrix (noisy) runs.
pub const DEFAULT_MAX_SPINS_MIXED: usize = 8;
