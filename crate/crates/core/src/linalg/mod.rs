//! Dense complex linear algebra for Hermitian and unitary operators.

pub mod matrix;
pub mod norms;
pub mod operator;
pub mod random;
pub mod spectral;

pub use matrix::ComplexMatrix;
pub use norms::{operator_norm, schatten_norm, schatten_norm_p, SchattenP};
pub use operator::{apply_scalar_function, HermitianOperator, UnitaryOperator};
pub use random::{
    mix64, rng_from_seed, sample_haar_unitary, sample_random_hermitian, stream_rng, EigenvalueLaw,
    RandomOperatorModel, SeededRng,
};
pub use spectral::{SpectralDecomposition, SpectrumKind};
