//! Null-controls for the one-dimensional heat equation built from explicit
//! biorthogonal families, with simulators and cost experiments around them.

pub mod biorthogonal;
pub mod entire;
pub mod error;
pub mod harness;
pub mod heatsim;
pub mod io;
pub mod mp;
pub mod quad;
pub mod spectral;
pub mod special;
pub mod transmute;
pub mod tridiag;

pub use error::{Error, Result};
