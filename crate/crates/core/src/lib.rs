//! Simultaneous diagonalization of commuting matrix pairs, singular value
//! decomposition of star-commuting pairs with a shared left basis, and
//! permutation-similarity invariance checks.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod generator;
pub mod io;
pub mod matrix;
pub mod permutation;
pub mod report;
pub mod simdiag;
pub mod svd;
pub mod tolerance;

#[cfg(test)]
pub(crate) mod test_fixtures;

pub use error::{Error, Result};
pub use matrix::{ComplexScalar, Matrix};
pub use tolerance::ToleranceConfig;
