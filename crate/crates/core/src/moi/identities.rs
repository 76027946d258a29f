//! Algebraic identities, norm estimates, the perturbation formula and the
//! continuity estimate for MOIs.

use serde::Serialize;

use super::eval::evaluate_spectral;
use crate::error::{Error, Result};
use crate::integrand::separable::polynomial_divided_projective_bound;
use crate::integrand::{integrand_from_divided_difference, sup_norm_on_grid, MultivariateFunction, ScalarFunction};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::norms::{operator_norm, scale_of, schatten_norm, SchattenP};
use crate::linalg::{HermitianOperator, SpectralDecomposition};

/// A residual together with the scale it should be judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    pub scale: f64,
}

impl Residual {
    pub fn new(residual: f64, parts: &[&ComplexMatrix]) -> Self {
        Self {
            residual,
            scale: scale_of(parts),
        }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }

    pub fn within(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale
    }
}

/// `‖T_{αφ+βψ} − (αT_φ + βT_ψ)‖` on shared operators and arguments.
pub fn moi_linear_combination_check(
    phi: &MultivariateFunction,
    psi: &MultivariateFunction,
    alpha: f64,
    beta: f64,
    spectra: &[&SpectralDecomposition],
    args: &[ComplexMatrix],
) -> Result<Residual> {
    let combined = MultivariateFunction::linear_combination(alpha, phi, beta, psi)?;
    let lhs = evaluate_spectral(spectra, &combined, args)?;
    let tp = evaluate_spectral(spectra, phi, args)?;
    let tq = evaluate_spectral(spectra, psi, args)?;
    let rhs = &tp * num_complex::Complex64::new(alpha, 0.0) + &tq * num_complex::Complex64::new(beta, 0.0);
    Ok(Residual::new(operator_norm(&(&lhs - &rhs)), &[&lhs, &rhs]))
}

/// `T_{ψ1}(X_1..X_{k-1}) · X_k · T_{ψ2}(X_{k+1}..X_{m-1})` with `k` the arity
/// of `ψ1`.
pub fn moi_split_evaluate(
    psi1: &MultivariateFunction,
    psi2: &MultivariateFunction,
    spectra: &[&SpectralDecomposition],
    args: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let m = spectra.len();
    let k = psi1.arity();
    if k < 1 || k + psi2.arity() != m || psi2.arity() < 1 {
        return Err(Error::Parameter(format!(
            "split at k = {k} with arities ({}, {}) does not fit {m} operators",
            psi1.arity(),
            psi2.arity()
        )));
    }
    moi_partition_evaluate(&[k, m - k], &[psi1.clone(), psi2.clone()], spectra, args)
}

/// Factored evaluation over contiguous segments of lengths `segments`:
/// `(Π_{i<ℓ} T_{ψ_i}(…) X_{j_i}) T_{ψ_ℓ}(…)` where `X_{j_i}` joins segments.
pub fn moi_partition_evaluate(
    segments: &[usize],
    psis: &[MultivariateFunction],
    spectra: &[&SpectralDecomposition],
    args: &[ComplexMatrix],
) -> Result<ComplexMatrix> {
    let m = spectra.len();
    if segments.is_empty() || segments.contains(&0) || segments.iter().sum::<usize>() != m {
        return Err(Error::Parameter(format!(
            "segments {segments:?} do not partition {m} operators"
        )));
    }
    if psis.len() != segments.len() {
        return Err(Error::Parameter(format!(
            "{} integrands for {} segments",
            psis.len(),
            segments.len()
        )));
    }
    if args.len() + 1 != m {
        return Err(Error::Dimension(format!("{} arguments for {m} operators", args.len())));
    }
    let mut start = 0;
    let mut acc: Option<ComplexMatrix> = None;
    for (len, psi) in segments.iter().zip(psis) {
        let end = start + len;
        if psi.arity() != *len {
            return Err(Error::Dimension(format!(
                "segment of length {len} has integrand of arity {}",
                psi.arity()
            )));
        }
        let t = evaluate_spectral(&spectra[start..end], psi, &args[start..end - 1])?;
        acc = Some(match acc {
            None => t,
            // args[start - 1] joins the previous segment to this one
            Some(prev) => prev * &args[start - 1] * t,
        });
        start = end;
    }
    Ok(acc.expect("non-empty partition"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormMode {
    Operator,
    /// Schatten exponents `p_1, …, p_{m-1}` of the arguments.
    Schatten(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct NormBound {
    pub bound: f64,
    pub actual: f64,
    pub projective_norm: f64,
    /// Hölder exponent used for `actual`; `None` is `∞`.
    pub q: Option<f64>,
    /// `1 − Σ 1/p_i`, the exponent rule as literally stated, kept for reference.
    pub stated_q_reciprocal: Option<f64>,
}

/// `actual = ‖T_ψ(X)‖_q` against `bound = ‖ψ‖_proj Π ‖X_i‖_{p_i}` with
/// `1/q = Σ 1/p_i`. Needs a separable representation and real spectra.
pub fn moi_norm_bound(
    psi: &MultivariateFunction,
    spectra: &[&SpectralDecomposition],
    args: &[ComplexMatrix],
    mode: &NormMode,
) -> Result<NormBound> {
    let sep = psi.separable().ok_or_else(|| {
        Error::Capability(format!("integrand {} has no separable representation", psi.name()))
    })?;
    let real: Vec<Vec<f64>> = spectra.iter().map(|s| s.real_eigenvalues()).collect();
    let projective_norm = sep.projective_norm_bound(&real)?;
    let t = evaluate_spectral(spectra, psi, args)?;
    match mode {
        NormMode::Operator => {
            let prod: f64 = args.iter().map(operator_norm).product();
            Ok(NormBound {
                bound: projective_norm * prod,
                actual: operator_norm(&t),
                projective_norm,
                q: None,
                stated_q_reciprocal: None,
            })
        }
        NormMode::Schatten(ps) => {
            if ps.len() != args.len() {
                return Err(Error::Parameter(format!(
                    "{} Schatten exponents for {} arguments",
                    ps.len(),
                    args.len()
                )));
            }
            let ps: Vec<SchattenP> = ps.iter().map(|&p| SchattenP::new(p)).collect::<Result<_>>()?;
            let recip: f64 = ps.iter().map(|p| p.reciprocal()).sum();
            if recip > 1.0 + 1e-12 {
                return Err(Error::Parameter(format!("Σ 1/p_i = {recip} exceeds 1")));
            }
            let q = SchattenP::from_reciprocal(recip.min(1.0))?;
            let prod: f64 = args.iter().zip(&ps).map(|(x, &p)| schatten_norm(x, p)).product();
            Ok(NormBound {
                bound: projective_norm * prod,
                actual: schatten_norm(&t, q),
                projective_norm,
                q: match q {
                    SchattenP::Finite(q) => Some(q),
                    SchattenP::Infinity => None,
                },
                stated_q_reciprocal: Some(1.0 - recip),
            })
        }
    }
}

fn insert<T: Clone>(items: &[T], at: usize, value: T) -> Vec<T> {
    let mut out = items.to_vec();
    out.insert(at, value);
    out
}

/// `‖T^{A̲,C,A̲}_{f^[m]}(X̲) − T^{A̲,D,A̲}_{f^[m]}(X̲) − T^{A̲,C,D,A̲}_{f^[m+1]}(X̲ with C−D inserted)‖`.
///
/// `operators` holds `A_1..A_m`, `position` (1-based, `1..=m+1`) is where
/// `C`/`D` are inserted, `args` holds the `m` arguments.
pub fn perturbation_residual(
    f: &ScalarFunction,
    operators: &[&HermitianOperator],
    position: usize,
    c: &HermitianOperator,
    d: &HermitianOperator,
    args: &[ComplexMatrix],
) -> Result<Residual> {
    let m = operators.len();
    if position < 1 || position > m + 1 {
        return Err(Error::Parameter(format!("insertion position {position} outside 1..={}", m + 1)));
    }
    if args.len() != m {
        return Err(Error::Dimension(format!("{} arguments, expected {m}", args.len())));
    }
    let at = position - 1;
    let base: Vec<&SpectralDecomposition> = operators.iter().map(|a| a.spectral()).collect::<Result<_>>()?;
    let (sc, sd) = (c.spectral()?, d.spectral()?);
    let psi_m = integrand_from_divided_difference(f, m)?;
    let psi_m1 = integrand_from_divided_difference(f, m + 1)?;
    let t_c = evaluate_spectral(&insert(&base, at, sc), &psi_m, args)?;
    let t_d = evaluate_spectral(&insert(&base, at, sd), &psi_m, args)?;
    let with_both = insert(&insert(&base, at, sc), at + 1, sd);
    let diff = c.matrix() - d.matrix();
    let rhs = evaluate_spectral(&with_both, &psi_m1, &insert(args, at, diff))?;
    let lhs = &t_c - &t_d;
    Ok(Residual::new(operator_norm(&(&lhs - &rhs)), &[&t_c, &t_d, &rhs]))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ContinuityModulus {
    pub lhs: f64,
    pub bound: f64,
    /// The `‖f^[n+1]‖` surrogate used in `bound`.
    pub integrand_norm: f64,
    /// True when the surrogate is a projective bound of a separable
    /// representation, false for the grid sup-norm fallback.
    pub certified: bool,
}

/// `lhs = ‖T^{A'}_{f^[n]}(X̲) − T^{A}_{f^[n]}(X̲)‖` and
/// `bound = ‖f^[n+1]‖ Σ_i ‖A'_i − A_i‖ Π_j ‖X_j‖` with `n = args.len()`.
pub fn continuity_modulus(
    f: &ScalarFunction,
    operators: &[&HermitianOperator],
    perturbed: &[&HermitianOperator],
    args: &[ComplexMatrix],
) -> Result<ContinuityModulus> {
    let n = args.len();
    if operators.len() != n + 1 || perturbed.len() != n + 1 {
        return Err(Error::Dimension(format!(
            "{} and {} operators for {n} arguments",
            operators.len(),
            perturbed.len()
        )));
    }
    let s0: Vec<&SpectralDecomposition> = operators.iter().map(|a| a.spectral()).collect::<Result<_>>()?;
    let s1: Vec<&SpectralDecomposition> = perturbed.iter().map(|a| a.spectral()).collect::<Result<_>>()?;
    let psi = integrand_from_divided_difference(f, n)?;
    let t0 = evaluate_spectral(&s0, &psi, args)?;
    let t1 = evaluate_spectral(&s1, &psi, args)?;
    let lhs = operator_norm(&(&t1 - &t0));

    let union: Vec<f64> = s0
        .iter()
        .chain(&s1)
        .flat_map(|s| s.real_eigenvalues())
        .collect();
    let (integrand_norm, certified) = match f.as_polynomial() {
        Some(p) => {
            let r = union.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            (polynomial_divided_projective_bound(p, n + 1, &vec![r; n + 2]), true)
        }
        None => {
            let psi1 = integrand_from_divided_difference(f, n + 1)?;
            (sup_norm_on_grid(&psi1, &vec![union; n + 2])?, false)
        }
    };
    let shift: f64 = operators
        .iter()
        .zip(perturbed)
        .map(|(a, b)| operator_norm(&(b.matrix() - a.matrix())))
        .sum();
    let prod: f64 = args.iter().map(operator_norm).product();
    Ok(ContinuityModulus {
        lhs,
        bound: integrand_norm * shift * prod,
        integrand_norm,
        certified,
    })
}
