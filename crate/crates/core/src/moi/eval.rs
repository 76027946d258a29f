//! Spectral-sum evaluation of
//! `T = Σ ψ(λ_{i_1}, …, λ_{i_m}) P_{i_1} X_1 P_{i_2} ⋯ X_{m-1} P_{i_m}`.
//!
//! With `A_j = U_j Λ_j U_j*` and `Y_j = U_j* X_j U_{j+1}` the sum becomes
//! `U_1 R U_m*` where `R[a, b] = Σ_{i_2..i_{m-1}} ψ(λ) Π_j Y_j[i_j, i_{j+1}]`
//! over tuples with `i_1 = a`, `i_m = b`. Rows of `R` are independent, so
//! they are computed in parallel and assembled in index order; the result
//! does not depend on the thread count.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrand::MultivariateFunction;
use crate::linalg::matrix::{self, ComplexMatrix};
use crate::linalg::{HermitianOperator, SpectralDecomposition};

/// Tuple count above which rows are evaluated in parallel.
const PARALLEL_THRESHOLD: usize = 1 << 12;

/// An MOI evaluation: `m ≥ 2` decomposed operators, an arity-`m` integrand
/// and `m − 1` arguments.
#[derive(Debug, Clone)]
pub struct MoiRequest {
    pub operators: Vec<SpectralDecomposition>,
    pub integrand: MultivariateFunction,
    pub arguments: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone)]
pub struct MoiResult {
    pub value: ComplexMatrix,
    pub eigen_tuple_count: u64,
    pub wall_time_s: f64,
}

impl MoiRequest {
    pub fn new(
        operators: Vec<SpectralDecomposition>,
        integrand: MultivariateFunction,
        arguments: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let req = Self {
            operators,
            integrand,
            arguments,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn from_hermitian(
        operators: &[&HermitianOperator],
        integrand: MultivariateFunction,
        arguments: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let spectra = operators
            .iter()
            .map(|a| a.spectral().cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(spectra, integrand, arguments)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.operators.len();
        if m < 2 {
            return Err(Error::Dimension(format!("an MOI needs at least 2 operators, got {m}")));
        }
        check_shapes(&self.operators.iter().collect::<Vec<_>>(), &self.integrand, &self.arguments)
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }
}

fn check_shapes(
    spectra: &[&SpectralDecomposition],
    psi: &MultivariateFunction,
    args: &[ComplexMatrix],
) -> Result<()> {
    let m = spectra.len();
    if m == 0 {
        return Err(Error::Dimension("no operators".into()));
    }
    if psi.arity() != m {
        return Err(Error::Dimension(format!(
            "integrand arity {} but {m} operators",
            psi.arity()
        )));
    }
    if args.len() + 1 != m {
        return Err(Error::Dimension(format!(
            "{} arguments for {m} operators, expected {}",
            args.len(),
            m - 1
        )));
    }
    let n = spectra[0].dim();
    if let Some(s) = spectra.iter().find(|s| s.dim() != n) {
        return Err(Error::Dimension(format!("operator dims {n} and {}", s.dim())));
    }
    for (j, x) in args.iter().enumerate() {
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::Dimension(format!(
                "argument {} is {}x{}, operators are {n}x{n}",
                j + 1,
                x.nrows(),
                x.ncols()
            )));
        }
        matrix::ensure_finite(x)?;
    }
    Ok(())
}

pub fn moi_evaluate(req: &MoiRequest) -> Result<MoiResult> {
    req.validate()?;
    let start = Instant::now();
    let ops: Vec<&SpectralDecomposition> = req.operators.iter().collect();
    let value = evaluate_spectral(&ops, &req.integrand, &req.arguments)?;
    let n = req.dim() as u64;
    Ok(MoiResult {
        value,
        eigen_tuple_count: n.pow(ops.len() as u32),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Evaluate the spectral sum for any `m ≥ 1`; `m = 1` is `ψ(A_1)`.
pub fn evaluate_spectral(
    spectra: &[&SpectralDecomposition],
    psi: &MultivariateFunction,
    args: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    check_shapes(spectra, psi, args)?;
    let m = spectra.len();
    let n = spectra[0].dim();
    let y: Vec<ComplexMatrix> = (0..m - 1)
        .map(|j| spectra[j].basis().adjoint() * &args[j] * spectra[j + 1].basis())
        .collect();
    let values: Vec<&[Complex64]> = spectra.iter().map(|s| s.eigenvalues()).collect();
    let row = |a: usize| rotated_row(a, n, &values, &y, psi);
    let rows: Vec<Vec<Complex64>> = if n.pow(m as u32) >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(row).collect::<Result<_>>()?
    } else {
        (0..n).map(row).collect::<Result<_>>()?
    };
    let r = ComplexMatrix::from_fn(n, n, |a, b| rows[a][b]);
    Ok(spectra[0].basis() * r * spectra[m - 1].basis().adjoint())
}

/// Row `a` of the rotated-coordinate sum.
fn rotated_row(
    a: usize,
    n: usize,
    values: &[&[Complex64]],
    y: &[ComplexMatrix],
    psi: &MultivariateFunction,
) -> Result<Vec<Complex64>> {
    let m = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut point = vec![Complex64::new(0.0, 0.0); m];
    point[0] = values[0][a];
    if m == 1 {
        out[a] = checked_eval(psi, &point, &[a])?;
        return Ok(out);
    }
    // idx[j] is the eigen-index in slot j; prefix[j] = Π_{t<j} Y_t[i_t, i_{t+1}]
    let mut idx = vec![0usize; m];
    idx[0] = a;
    let mut prefix = vec![Complex64::new(1.0, 0.0); m];
    let mut level = 1;
    loop {
        let i = idx[level];
        point[level] = values[level][i];
        prefix[level] = prefix[level - 1] * y[level - 1][(idx[level - 1], i)];
        if level == m - 1 {
            if prefix[level] != Complex64::new(0.0, 0.0) {
                out[i] += checked_eval(psi, &point, &idx)? * prefix[level];
            }
        } else {
            level += 1;
            idx[level] = 0;
            continue;
        }
        // advance to the next tuple
        loop {
            idx[level] += 1;
            if idx[level] < n {
                break;
            }
            if level == 1 {
                return Ok(out);
            }
            level -= 1;
        }
    }
}

fn checked_eval(psi: &MultivariateFunction, point: &[Complex64], idx: &[usize]) -> Result<Complex64> {
    let v = psi.eval_complex(point)?;
    if !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Domain(format!(
            "integrand {} is {v} at eigen-index tuple {idx:?}, eigenvalues {point:?}",
            psi.name()
        )));
    }
    Ok(v)
}

/// Convenience wrapper over Hermitian operators.
pub fn evaluate_hermitian(
    operators: &[&HermitianOperator],
    psi: &MultivariateFunction,
    args: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let spectra = operators
        .iter()
        .map(|a| a.spectral())
        .collect::<Result<Vec<_>>>()?;
    evaluate_spectral(&spectra, psi, args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::{MultivariateFunction, SeparableIntegrand, ScalarFunction};
    use crate::linalg::matrix::from_real_rows;

    fn ops() -> (HermitianOperator, HermitianOperator) {
        let a = HermitianOperator::new(from_real_rows(2, &[1.0, 0.5, 0.5, -1.0])).unwrap();
        let b = HermitianOperator::new(from_real_rows(2, &[0.0, 2.0, 2.0, 3.0])).unwrap();
        (a, b)
    }

    #[test]
    fn constant_integrand_returns_argument() {
        let (a, b) = ops();
        let x = from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]);
        let t = evaluate_hermitian(&[&a, &b], &MultivariateFunction::constant(2, 1.0), &[x.clone()]).unwrap();
        assert!(matrix::max_abs(&(t - x)) < 1e-14);
    }

    #[test]
    fn first_variable_gives_left_product() {
        let (a, b) = ops();
        let x = from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]);
        let psi = MultivariateFunction::new_real(2, "l1", |l| l[0]);
        let t = evaluate_hermitian(&[&a, &b], &psi, &[x.clone()]).unwrap();
        assert!(matrix::max_abs(&(t - a.matrix() * x)) < 1e-14);
    }

    #[test]
    fn single_operator_is_function_of_operator() {
        let (a, _) = ops();
        let psi = MultivariateFunction::from_separable(
            SeparableIntegrand::product(vec![ScalarFunction::monomial(3)]).unwrap(),
        );
        let t = evaluate_hermitian(&[&a], &psi, &[]).unwrap();
        let cube = a.matrix() * a.matrix() * a.matrix();
        assert!(matrix::max_abs(&(t - cube)) < 1e-13);
    }

    #[test]
    fn nan_names_tuple() {
        let (a, b) = ops();
        let psi = MultivariateFunction::new_real(2, "bad", |_| f64::NAN);
        let err = evaluate_hermitian(&[&a, &b], &psi, &[matrix::identity(2)]).unwrap_err();
        assert!(matches!(err, Error::Domain(ref s) if s.contains("tuple")), "{err}");
    }

    #[test]
    fn request_shape_checks() {
        let (a, b) = ops();
        let psi = MultivariateFunction::constant(3, 1.0);
        assert!(MoiRequest::from_hermitian(&[&a, &b], psi, vec![matrix::identity(2)]).is_err());
        let psi = MultivariateFunction::constant(2, 1.0);
        assert!(MoiRequest::from_hermitian(&[&a, &b], psi.clone(), vec![]).is_err());
        assert!(MoiRequest::from_hermitian(&[&a], MultivariateFunction::constant(1, 1.0), vec![]).is_err());
        let req = MoiRequest::from_hermitian(&[&a, &b], psi, vec![matrix::identity(2)]).unwrap();
        assert_eq!(moi_evaluate(&req).unwrap().eigen_tuple_count, 4);
    }
}
