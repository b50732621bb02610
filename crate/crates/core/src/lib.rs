//! Lie algebra of stochastic matrices 𝔰(n,ℝ): basis, structure constants,
//! Levi decomposition, root system, two-generator certificates and
//! Markov semigroup utilities.

pub mod basis;
pub mod classify;
pub mod decomp;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod rational;
pub mod structure;
pub mod twogen;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector, Tolerance};
