//! Operator derivatives and higher differences through MOIs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::multiindex::{binomial, factorial_f64};
use crate::error::{Error, Result};
use crate::integrand::{integrand_from_divided_difference, MultivariateFunction, ScalarFunction};
use crate::linalg::matrix::{self, ComplexMatrix};
use crate::linalg::norms::operator_norm;
use crate::linalg::{apply_scalar_function, HermitianOperator, SpectralDecomposition};
use crate::moi::evaluate_spectral;

/// `d/dt f(X + tV)|_{t=0} = T^{X,X}_{f^[1]}(V)`.
pub fn frechet_derivative(f: &ScalarFunction, x: &HermitianOperator, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    kth_derivative(f, x, v, 1)
}

/// `d^k/dt^k f(A + tB)|_{t=0} = k!·T^{A,…,A}_{f^[k]}(B,…,B)`; `k = 0` is `f(A)`.
pub fn kth_derivative(f: &ScalarFunction, a: &HermitianOperator, b: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    if b.nrows() != a.dim() || b.ncols() != a.dim() {
        return Err(Error::Dimension(format!(
            "direction is {}x{}, operator is {}x{}",
            b.nrows(),
            b.ncols(),
            a.dim(),
            a.dim()
        )));
    }
    if k == 0 {
        return apply_scalar_function(f, a);
    }
    let psi = integrand_from_divided_difference(f, k)?;
    let s = a.spectral()?;
    let spectra = vec![s; k + 1];
    let args = vec![b.clone(); k];
    Ok(evaluate_spectral(&spectra, &psi, &args)? * Complex64::new(factorial_f64(k), 0.0))
}

/// `A + iB` for `i = 0..=k`.
fn shifted_operators(a: &HermitianOperator, b: &HermitianOperator, k: usize) -> Result<Vec<HermitianOperator>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("{} vs {}", a.dim(), b.dim())));
    }
    (0..=k).map(|i| a.add_scaled(b.matrix(), i as f64)).collect()
}

/// `Δ^k_B f(A) = Σ_i (−1)^{k−i} C(k,i) f(A + iB)`.
pub fn higher_difference(f: &ScalarFunction, a: &HermitianOperator, b: &HermitianOperator, k: usize) -> Result<ComplexMatrix> {
    let ops = shifted_operators(a, b, k)?;
    let mut acc = matrix::zeros(a.dim());
    for (i, op) in ops.iter().enumerate() {
        let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += apply_scalar_function(f, op)? * Complex64::new(sign * binomial(k, i), 0.0);
    }
    Ok(acc)
}

/// `k!·T^{A, A+B, …, A+kB}_{f^[k]}(B, …, B)`, which equals `Δ^k_B f(A)`.
pub fn higher_difference_moi(f: &ScalarFunction, a: &HermitianOperator, b: &HermitianOperator, k: usize) -> Result<ComplexMatrix> {
    if k == 0 {
        return apply_scalar_function(f, a);
    }
    let ops = shifted_operators(a, b, k)?;
    let spectra: Vec<&SpectralDecomposition> = ops.iter().map(|o| o.spectral()).collect::<Result<_>>()?;
    let psi = integrand_from_divided_difference(f, k)?;
    let args = vec![b.matrix().clone(); k];
    Ok(evaluate_spectral(&spectra, &psi, &args)? * Complex64::new(factorial_f64(k), 0.0))
}

/// `Σ_{j=1}^k T^{A,…,A+kB}_{(λ_{j+1} − λ_j) f^[k]}(B, …, B)`, the weighted
/// representation stated for the difference tail bound. Its scalar case is
/// `k b^{k+1} f^[k]`, not `k! b^k f^[k]`, so this is a diagnostic only.
pub fn higher_difference_weighted_form(
    f: &ScalarFunction,
    a: &HermitianOperator,
    b: &HermitianOperator,
    k: usize,
) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(Error::Parameter("weighted form needs k ≥ 1".into()));
    }
    let ops = shifted_operators(a, b, k)?;
    let spectra: Vec<&SpectralDecomposition> = ops.iter().map(|o| o.spectral()).collect::<Result<_>>()?;
    let dd = integrand_from_divided_difference(f, k)?;
    // the j-sum telescopes to λ_{k+1} − λ_1
    let psi = MultivariateFunction::new_complex(k + 1, "weighted divided difference", move |z| {
        Ok((z[z.len() - 1] - z[0]) * dd.eval_complex(z)?)
    });
    evaluate_spectral(&spectra, &psi, &vec![b.matrix().clone(); k])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedFormComparison {
    pub binomial_norm: f64,
    pub weighted_norm: f64,
    pub residual: f64,
    /// `residual ≤ 1e-8·max(1, binomial_norm, weighted_norm)`.
    pub agrees: bool,
}

pub fn compare_weighted_form(
    f: &ScalarFunction,
    a: &HermitianOperator,
    b: &HermitianOperator,
    k: usize,
) -> Result<WeightedFormComparison> {
    let exact = higher_difference(f, a, b, k)?;
    let weighted = higher_difference_weighted_form(f, a, b, k)?;
    let binomial_norm = operator_norm(&exact);
    let weighted_norm = operator_norm(&weighted);
    let residual = operator_norm(&(exact - weighted));
    Ok(WeightedFormComparison {
        binomial_norm,
        weighted_norm,
        residual,
        agrees: residual <= 1e-8 * binomial_norm.max(weighted_norm).max(1.0),
    })
}

/// Largest eigenvalue displacement between consecutive operators
/// `A + (j−1)B` and `A + jB`, `j = 1..=k`: `max_j max_{λ,λ'} |λ' − λ|`.
pub fn adjacent_spread(a: &HermitianOperator, b: &HermitianOperator, k: usize) -> Result<f64> {
    let ops = shifted_operators(a, b, k)?;
    let mut kappa = 0.0_f64;
    for w in ops.windows(2) {
        let l0 = w[0].spectral()?.real_eigenvalues();
        let l1 = w[1].spectral()?.real_eigenvalues();
        let (lo0, hi0) = (l0[0], l0[l0.len() - 1]);
        let (lo1, hi1) = (l1[0], l1[l1.len() - 1]);
        kappa = kappa.max((hi1 - lo0).abs()).max((hi0 - lo1).abs());
    }
    Ok(kappa)
}
