//! Welch-type lower bounds for approximate Schauder frames on finite
//! dimensional ℓp spaces, their symmetric-tensor lifts and atomic-measure
//! generalizations, together with numerical searches for frames that come
//! close to the bounds.

pub mod asf;
pub mod bounds;
pub mod cli;
pub mod continuous;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod numkernel;
pub mod optimize;
pub mod symlift;

pub use asf::{DualPair, Exponent, Field, LpSpace};
pub use error::{Error, Result};
pub use numkernel::{DenseMatrix, Spectrum, ToleranceConfig};
