//! Entanglement witnesses for two- and three-mode Gaussian states built from
//! normally-ordered intensity correlation moments, with a truncated Fock-space
//! oracle and a multiplexed click-detector simulator.

pub mod error;
pub mod gaussian;

pub use error::{Error, Result};
pub mod fock;
pub mod moments;
pub mod detector;
pub mod witness;
pub mod random;
pub mod sweep;
