//! Integrand functions: scalar functions, divided differences, separable sums.

pub mod divided;
pub mod scalar;
pub mod separable;

pub use divided::{divided_difference, divided_difference_table, DividedDifferenceSpec};
pub use scalar::{Polynomial, ScalarFunction};
pub use separable::{
    integrand_from_divided_difference, integrand_oplus, sup_norm_on_grid, MultivariateFunction,
    SeparableIntegrand,
};
