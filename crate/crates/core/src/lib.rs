//! Exact and approximate computations for the hard-core model on the
//! discrete hypercube.

pub mod asymptotics;
pub mod containers;
pub mod cube;
pub mod error;
pub mod exact;
pub mod logvalue;
pub mod rational;
pub mod sampling;

pub use error::{Error, Result};
