//! Derivatives, higher differences and Taylor remainders as MOIs.

pub mod bounds;
pub mod derivative;
pub mod multiindex;
pub mod remainder;

pub use bounds::{exp_tail_series, rho_bound, theta_sum};
pub use derivative::{
    adjacent_spread, compare_weighted_form, frechet_derivative, higher_difference, higher_difference_moi,
    higher_difference_weighted_form, kth_derivative, WeightedFormComparison,
};
pub use multiindex::{binomial, compositions, factorial_f64, MultiIndex};
pub use remainder::{
    exp_i, exp_series_term, exp_tail, sa_remainder, unitary_remainder, RemainderFlavor, RemainderMethod,
    RemainderSpec, SeparableMultivariateFunction,
};
