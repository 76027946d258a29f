//! Multiple operator integrals by spectral summation.

pub mod eval;
pub mod identities;

pub use eval::{evaluate_hermitian, evaluate_spectral, moi_evaluate, MoiRequest, MoiResult};
pub use identities::{
    continuity_modulus, moi_linear_combination_check, moi_norm_bound, moi_partition_evaluate,
    moi_split_evaluate, perturbation_residual, ContinuityModulus, NormBound, NormMode, Residual,
};
