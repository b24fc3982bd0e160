//! Numerical core for a causal nonlocal memory operator built from a
//! superposition of massive retarded Klein-Gordon resolvents.
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and threading live in the companion `cetlab` crate.
#![no_std]

extern crate alloc;

pub mod averaging;
pub mod dispersion;
pub mod error;
pub mod math;
pub mod quadrature;
pub mod pheno;
pub mod radial;
pub mod scattering;
pub mod resolvent;
pub mod spectral;

pub use error::{Error, Result};
