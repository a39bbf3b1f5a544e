//! Linear D2Q9 lattice Boltzmann schemes for heat and acoustics, halfway
//! boundary rules, boundary-layer analysis and eigenmode extraction.

pub mod analysis;
pub mod boundary;
pub mod collision;
pub mod error;
pub mod lattice;
pub mod solver;

pub use error::{Error, Result};
