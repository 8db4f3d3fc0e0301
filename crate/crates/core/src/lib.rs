//! Joint spectra of quantum semitoric systems, asymptotic-lattice labelling,
//! and recovery of the classical symplectic invariants from the spectrum.

pub mod config;
pub mod eigen;
pub mod error;
pub mod invariants;
pub mod lattice;
pub mod models;

pub use config::Tolerances;
pub use error::{Error, ErrorClass, Result};
