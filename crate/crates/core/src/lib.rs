//! Worst-case IncGDD lattice instances reduced to the symmetric binary
//! perceptron and number partitioning, with exact desk-scale solvers and a
//! statistical harness.

pub mod error;
pub mod gaussian;
pub mod harness;
pub mod lattice;
pub mod matrix;
pub mod npp;
pub mod pipeline;
pub mod rational;
pub mod rng;
pub mod sbp;
pub mod scalar;
pub mod solvers;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Real;

/// Exact rational scalar used for bases.
pub type Rational = num_rational::BigRational;
/// Dense `f64` matrix, the working type of both pipelines.
pub type Mat = Matrix<f64>;
pub type RatMatrix = Matrix<Rational>;
pub type IntMatrix = Matrix<num_bigint::BigInt>;
