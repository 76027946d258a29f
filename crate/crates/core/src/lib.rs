//! Multiple operator integrals of finite-dimensional Hermitian and unitary
//! operators, the operator calculus built on them, and Monte Carlo checks of
//! their tail bounds under Haar-random eigenbases.

pub mod calculus;
pub mod documents;
pub mod error;
pub mod harness;
pub mod integrand;
pub mod linalg;
pub mod moi;
pub mod poly;
pub mod schema;
pub mod tensor;

pub use error::{Error, Result};
pub use integrand::{MultivariateFunction, Polynomial, ScalarFunction, SeparableIntegrand};
pub use linalg::{ComplexMatrix, HermitianOperator, SpectralDecomposition, UnitaryOperator};
