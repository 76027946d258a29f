//! Multivariate polynomials as sums of inner-product powers and of products
//! of homogenized linear forms, and polynomial fits on boxes.

pub mod decompose;
pub mod fit;
pub mod monomial;

pub use decompose::{
    decompose_inner_powers, decompose_inner_powers_with_directions, direction_count, to_linear_products,
    InnerPowerDecomposition, InnerPowerForm, InnerPowerTerm, LinearProductForm,
};
pub use fit::{fit_polynomial, PolynomialFit};
pub use monomial::{MonomialPolynomial, MonomialTerm};
