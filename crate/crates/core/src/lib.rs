//! Matrix formalism for spherical and hyperbolic simplices: angle Gram
//! classification, Gram dualities, Gaussian orthant and Klein-model volume
//! estimation, and experiments that follow volumes along sequences of
//! simplices degenerating toward the boundary of the moduli space.

pub mod cli;
pub mod degeneration_lab;
pub mod error;
pub mod gram;
pub mod hyperbolic_geom;
pub mod matrix_core;
pub mod volume_engine;

pub use error::{Error, Result};
