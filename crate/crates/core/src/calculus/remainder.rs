//! Taylor remainders of separable multivariate functions
//! `f(X_1, …, X_n) = Σ_j φ_j(X_j)`, for self-adjoint perturbations
//! `X_j + H_j` and unitary perturbations `e^{ιH_j} X_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bounds::exp_tail_series;
use super::derivative::kth_derivative;
use super::multiindex::{compositions, factorial_f64};
use crate::error::{Error, Result};
use crate::integrand::{integrand_from_divided_difference, Polynomial, ScalarFunction};
use crate::linalg::matrix::{self, ComplexMatrix};
use crate::linalg::{apply_scalar_function, HermitianOperator, SpectralDecomposition, UnitaryOperator};
use crate::moi::evaluate_spectral;

/// `f(X_1, …, X_n) = Σ_t φ_t(X_{slot_t})`.
#[derive(Debug, Clone)]
pub struct SeparableMultivariateFunction {
    slots: usize,
    terms: Vec<(usize, ScalarFunction)>,
}

impl SeparableMultivariateFunction {
    pub fn new(slots: usize, terms: Vec<(usize, ScalarFunction)>) -> Result<Self> {
        if slots == 0 {
            return Err(Error::Dimension("at least one operator slot is needed".into()));
        }
        if let Some((j, _)) = terms.iter().find(|(j, _)| *j >= slots) {
            return Err(Error::Dimension(format!("term slot {j} but only {slots} slots")));
        }
        Ok(Self { slots, terms })
    }

    /// `φ_j` in slot `j` for each `j`.
    pub fn per_slot(phis: Vec<ScalarFunction>) -> Result<Self> {
        let n = phis.len();
        Self::new(n, phis.into_iter().enumerate().collect())
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> &[(usize, ScalarFunction)] {
        &self.terms
    }

    fn polynomial_terms(&self) -> Result<Vec<(usize, &Polynomial)>> {
        self.terms
            .iter()
            .map(|(j, phi)| {
                phi.as_polynomial().map(|p| (*j, p)).ok_or_else(|| {
                    Error::Capability(format!(
                        "unitary remainders need polynomial φ, got {}",
                        phi.name()
                    ))
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderFlavor {
    SelfAdjoint,
    Unitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderMethod {
    /// Function value minus the Taylor polynomial.
    Direct,
    /// The MOI representation.
    Moi,
}

fn check_inputs(f: &SeparableMultivariateFunction, n_bases: usize, hs: &[HermitianOperator], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::Parameter("remainder order must be at least 1".into()));
    }
    if n_bases != f.slots() || hs.len() != f.slots() {
        return Err(Error::Dimension(format!(
            "{} slots, {n_bases} base operators, {} perturbations",
            f.slots(),
            hs.len()
        )));
    }
    let dim = hs[0].dim();
    if let Some(h) = hs.iter().find(|h| h.dim() != dim) {
        return Err(Error::Dimension(format!("perturbation dims {dim} and {}", h.dim())));
    }
    Ok(dim)
}

/// `R = f(X + H) − Σ_{l<k} (1/l!) d^l/dt^l f(X + tH)|_{t=0}`.
pub fn sa_remainder(
    f: &SeparableMultivariateFunction,
    xs: &[HermitianOperator],
    hs: &[HermitianOperator],
    k: usize,
    method: RemainderMethod,
) -> Result<ComplexMatrix> {
    let dim = check_inputs(f, xs.len(), hs, k)?;
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::Dimension(format!("operator dims {dim} and {}", x.dim())));
    }
    let mut acc = matrix::zeros(dim);
    for (j, phi) in f.terms() {
        let (x, h) = (&xs[*j], &hs[*j]);
        let shifted = x.add(h)?;
        match method {
            RemainderMethod::Direct => {
                acc += apply_scalar_function(phi, &shifted)?;
                for l in 0..k {
                    let term = kth_derivative(phi, x, h.matrix(), l)?;
                    acc -= term * Complex64::new(1.0 / factorial_f64(l), 0.0);
                }
            }
            RemainderMethod::Moi => {
                // T^{X+H, X, …, X}_{φ^[k]}(H, …, H)
                let psi = integrand_from_divided_difference(phi, k)?;
                let mut spectra: Vec<&SpectralDecomposition> = vec![shifted.spectral()?];
                spectra.extend(std::iter::repeat_n(x.spectral()?, k));
                acc += evaluate_spectral(&spectra, &psi, &vec![h.matrix().clone(); k])?;
            }
        }
    }
    Ok(acc)
}

/// `e^{ιH} − Σ_{m < i_1} (ιH)^m / m!`, through the eigenvalues of `H`.
pub fn exp_tail(h: &HermitianOperator, i1: usize) -> Result<ComplexMatrix> {
    Ok(h.spectral()?.apply(|l| exp_tail_series(Complex64::new(0.0, 1.0) * l, i1)))
}

/// `(ιH)^i / i!`.
pub fn exp_series_term(h: &HermitianOperator, i: usize) -> Result<ComplexMatrix> {
    let scale = 1.0 / factorial_f64(i);
    Ok(h.spectral()?.apply(|l| (Complex64::new(0.0, 1.0) * l).powu(i as u32) * scale))
}

/// `e^{ιH}`.
pub fn exp_i(h: &HermitianOperator) -> Result<ComplexMatrix> {
    Ok(h.spectral()?.apply(|l| (Complex64::new(0.0, 1.0) * l).exp()))
}

/// `Q = f(e^{ιH}X) − Σ_{l<k} (1/l!) d^l/dt^l f(e^{ιtH}X)|_{t=0}` for
/// polynomial `φ_j`.
pub fn unitary_remainder(
    f: &SeparableMultivariateFunction,
    xs: &[UnitaryOperator],
    hs: &[HermitianOperator],
    k: usize,
    method: RemainderMethod,
) -> Result<ComplexMatrix> {
    let dim = check_inputs(f, xs.len(), hs, k)?;
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(Error::Dimension(format!("operator dims {dim} and {}", x.dim())));
    }
    let polys = f.polynomial_terms()?;
    let mut acc = matrix::zeros(dim);
    for (j, p) in polys {
        let (x, h) = (&xs[j], &hs[j]);
        match method {
            RemainderMethod::Direct => acc += unitary_remainder_direct(p, x, h, k)?,
            RemainderMethod::Moi => acc += unitary_remainder_moi(p, x, h, k)?,
        }
    }
    Ok(acc)
}

/// Expands `M(t) = e^{ιtH}X = Σ_m t^m D_m` to order `k − 1` and subtracts the
/// matching coefficients of `p(M(t))` from `p(e^{ιH}X)`.
fn unitary_remainder_direct(p: &Polynomial, x: &UnitaryOperator, h: &HermitianOperator, k: usize) -> Result<ComplexMatrix> {
    let dim = x.dim();
    let d: Vec<ComplexMatrix> = (0..k)
        .map(|m| exp_series_term(h, m).map(|e| e * x.matrix()))
        .collect::<Result<_>>()?;
    let mut power: Vec<ComplexMatrix> = (0..k)
        .map(|l| if l == 0 { matrix::identity(dim) } else { matrix::zeros(dim) })
        .collect();
    let mut taylor = vec![matrix::zeros(dim); k];
    for (deg, &c) in p.coeffs().iter().enumerate() {
        if deg > 0 {
            power = truncated_product(&power, &d);
        }
        if c != 0.0 {
            for (t, q) in taylor.iter_mut().zip(&power) {
                *t += q * Complex64::new(c, 0.0);
            }
        }
    }
    let perturbed = exp_i(h)? * x.matrix();
    let mut out = matrix::polynomial_at(p.coeffs(), &perturbed);
    for t in taylor {
        out -= t;
    }
    Ok(out)
}

fn truncated_product(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let k = a.len();
    let dim = a[0].nrows();
    (0..k)
        .map(|l| {
            let mut s = matrix::zeros(dim);
            for i in 0..=l {
                s += &a[i] * &b[l - i];
            }
            s
        })
        .collect()
}

/// `Σ_{ℓ=1}^k Σ_{i ⊨ k} T^{e^{ιH}X, X, …, X}_{φ^[ℓ]}(E_{i_1} X, D_{i_2}, …, D_{i_ℓ})`
/// with `E_i` the exponential tail and `D_i = (ιH)^i/i!·X`.
fn unitary_remainder_moi(p: &Polynomial, x: &UnitaryOperator, h: &HermitianOperator, k: usize) -> Result<ComplexMatrix> {
    let dim = x.dim();
    let phi = ScalarFunction::Polynomial(p.clone());
    let perturbed = UnitaryOperator::new(exp_i(h)? * x.matrix())?;
    let sx = x.spectral()?;
    let sp = perturbed.spectral()?;
    let mut acc = matrix::zeros(dim);
    for l in 1..=k {
        let psi = integrand_from_divided_difference(&phi, l)?;
        let mut spectra: Vec<&SpectralDecomposition> = vec![sp];
        spectra.extend(std::iter::repeat_n(sx, l));
        for comp in compositions(k, l) {
            let parts = comp.components();
            let mut args = Vec::with_capacity(l);
            args.push(exp_tail(h, parts[0])? * x.matrix());
            for &i in &parts[1..] {
                args.push(exp_series_term(h, i)? * x.matrix());
            }
            acc += evaluate_spectral(&spectra, &psi, &args)?;
        }
    }
    Ok(acc)
}

/// A remainder evaluation over raw matrices.
#[derive(Debug, Clone)]
pub struct RemainderSpec {
    pub order: usize,
    pub function: SeparableMultivariateFunction,
    pub bases: Vec<ComplexMatrix>,
    pub perturbations: Vec<ComplexMatrix>,
    pub flavor: RemainderFlavor,
}

impl RemainderSpec {
    pub fn evaluate(&self, method: RemainderMethod) -> Result<ComplexMatrix> {
        let hs: Vec<HermitianOperator> = self
            .perturbations
            .iter()
            .map(|h| HermitianOperator::new(h.clone()))
            .collect::<Result<_>>()?;
        match self.flavor {
            RemainderFlavor::SelfAdjoint => {
                let xs: Vec<HermitianOperator> =
                    self.bases.iter().map(|x| HermitianOperator::new(x.clone())).collect::<Result<_>>()?;
                sa_remainder(&self.function, &xs, &hs, self.order, method)
            }
            RemainderFlavor::Unitary => {
                let xs: Vec<UnitaryOperator> =
                    self.bases.iter().map(|x| UnitaryOperator::new(x.clone())).collect::<Result<_>>()?;
                unitary_remainder(&self.function, &xs, &hs, self.order, method)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::bounds::theta_sum;
    use crate::integrand::separable::polynomial_divided_projective_bound;
    use crate::linalg::norms::operator_norm;
    use crate::linalg::random::{hermitian_with_norm, rng_from_seed, sample_haar_unitary};
    use crate::linalg::matrix::from_real_rows;

    #[test]
    fn scalar_sa_remainder() {
        // exp(1.3) − (1 + 0.3) at x = 1, h = 0.3, k = 2, times e: e·(e^{0.3} − 1.3)
        let f = SeparableMultivariateFunction::per_slot(vec![ScalarFunction::exp()]).unwrap();
        let x = HermitianOperator::from_real_diagonal(&[1.0]);
        let h = HermitianOperator::from_real_diagonal(&[0.3]);
        let expected = 1f64.exp() * (0.3f64.exp() - 1.3);
        for method in [RemainderMethod::Direct, RemainderMethod::Moi] {
            let r = sa_remainder(&f, &[x.clone()], &[h.clone()], 2, method).unwrap();
            assert!((r[(0, 0)].re - expected).abs() < 1e-12, "{method:?}");
        }
    }

    #[test]
    fn sa_methods_agree_noncommuting() {
        let mut rng = rng_from_seed(11);
        let f = SeparableMultivariateFunction::per_slot(vec![
            ScalarFunction::polynomial(vec![0.5, -1.0, 0.0, 2.0, 1.0]),
            ScalarFunction::sin(),
        ])
        .unwrap();
        let xs: Vec<_> = (0..2).map(|_| HermitianOperator::new(hermitian_with_norm(4, 1.0, &mut rng)).unwrap()).collect();
        let hs: Vec<_> = (0..2).map(|_| HermitianOperator::new(hermitian_with_norm(4, 0.3, &mut rng)).unwrap()).collect();
        for k in 1..=3 {
            let d = sa_remainder(&f, &xs, &hs, k, RemainderMethod::Direct).unwrap();
            let m = sa_remainder(&f, &xs, &hs, k, RemainderMethod::Moi).unwrap();
            assert!(matrix::max_abs(&(&d - &m)) < 1e-10, "k={k}");
        }
    }

    #[test]
    fn low_degree_has_zero_remainder() {
        let mut rng = rng_from_seed(2);
        let f = SeparableMultivariateFunction::per_slot(vec![ScalarFunction::polynomial(vec![1.0, 2.0, -3.0])]).unwrap();
        let x = HermitianOperator::new(hermitian_with_norm(3, 1.0, &mut rng)).unwrap();
        let h = HermitianOperator::new(hermitian_with_norm(3, 0.5, &mut rng)).unwrap();
        for method in [RemainderMethod::Direct, RemainderMethod::Moi] {
            let r = sa_remainder(&f, &[x.clone()], &[h.clone()], 3, method).unwrap();
            assert!(matrix::max_abs(&r) < 1e-10);
        }
    }

    #[test]
    fn exp_tail_matches_partial_sums() {
        let h = HermitianOperator::new(from_real_rows(2, &[0.4, 0.2, 0.2, -0.7])).unwrap();
        for i1 in 0..5 {
            let mut full = matrix::zeros(2);
            let ih = h.matrix() * Complex64::new(0.0, 1.0);
            let mut term = matrix::identity(2);
            for m in 0..60 {
                if m >= i1 {
                    full += &term;
                }
                term = &term * &ih / Complex64::new((m + 1) as f64, 0.0);
            }
            assert!(matrix::max_abs(&(exp_tail(&h, i1).unwrap() - full)) < 1e-12);
        }
    }

    #[test]
    fn unitary_methods_agree_and_obey_bound() {
        let mut rng = rng_from_seed(5);
        let p = Polynomial::new(vec![0.3, 1.0, -0.5, 0.25]);
        let f = SeparableMultivariateFunction::per_slot(vec![
            ScalarFunction::Polynomial(p.clone()),
            ScalarFunction::monomial(2),
        ])
        .unwrap();
        let xs: Vec<_> = (0..2).map(|_| sample_haar_unitary(3, &mut rng).unwrap()).collect();
        let hs: Vec<_> = (0..2).map(|_| HermitianOperator::new(hermitian_with_norm(3, 0.4, &mut rng)).unwrap()).collect();
        for k in 1..=3 {
            let d = unitary_remainder(&f, &xs, &hs, k, RemainderMethod::Direct).unwrap();
            let m = unitary_remainder(&f, &xs, &hs, k, RemainderMethod::Moi).unwrap();
            assert!(matrix::max_abs(&(&d - &m)) < 1e-10, "k={k}");
            let mut bound = 0.0;
            for ((_, phi), h) in f.terms().iter().zip(&hs) {
                let poly = phi.as_polynomial().unwrap();
                for l in 1..=k {
                    let norm = polynomial_divided_projective_bound(poly, l, &vec![1.0; l + 1]);
                    bound += norm * theta_sum(operator_norm(h.matrix()), k, l).unwrap();
                }
            }
            assert!(operator_norm(&d) <= bound * (1.0 + 1e-12), "k={k}");
        }
    }

    #[test]
    fn unitary_needs_polynomial() {
        let f = SeparableMultivariateFunction::per_slot(vec![ScalarFunction::exp()]).unwrap();
        let x = UnitaryOperator::new(matrix::identity(2)).unwrap();
        let h = HermitianOperator::from_real_diagonal(&[0.1, 0.2]);
        let err = unitary_remainder(&f, &[x], &[h], 2, RemainderMethod::Moi).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn spec_roundtrip() {
        let spec = RemainderSpec {
            order: 2,
            function: SeparableMultivariateFunction::per_slot(vec![ScalarFunction::monomial(3)]).unwrap(),
            bases: vec![from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])],
            perturbations: vec![from_real_rows(2, &[0.0, 0.1, 0.1, 0.0])],
            flavor: RemainderFlavor::SelfAdjoint,
        };
        let d = spec.evaluate(RemainderMethod::Direct).unwrap();
        let m = spec.evaluate(RemainderMethod::Moi).unwrap();
        assert!(matrix::max_abs(&(d - m)) < 1e-12);
    }
}
