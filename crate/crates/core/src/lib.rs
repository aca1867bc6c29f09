//! Coarse-grained mean-field dynamics of molecular polaritons in a planar
//! multimode cavity, together with the perturbative pump-probe hierarchy and
//! the observables built on top of it.
//!
//! Units throughout: energies in eV, time in fs, lengths in μm. Every
//! equation-of-motion right-hand side divides energies by [`units::HBAR`]
//! exactly once.
//!
//! The crate is `no_std` and only needs an allocator. File formats, Fourier
//! spectra, scenario orchestration and the command-line tool live in the
//! `polaritrans-sim` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod integrate;
pub mod model;
pub mod observables;
pub mod pulses;
pub mod record;
pub mod transport;
pub mod units;

pub use error::{Error, Result};
pub use model::{LatticeGrid, ModelParams};
pub use pulses::PulseSpec;
pub use record::{FieldData, RecordMeta, SpatioTemporalRecord};

/// Complex double used for every field amplitude.
pub type C64 = num_complex::Complex64;
