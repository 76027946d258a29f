use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::divided::{complete_homogeneous, divided_difference, divided_difference_complex, DividedDifferenceSpec};
use super::scalar::{Polynomial, ScalarFunction};
use crate::error::{Error, Result};

/// Finite sum of products `Σ_n Π_i f_{i,n}(λ_i)`.
#[derive(Debug, Clone)]
pub struct SeparableIntegrand {
    arity: usize,
    terms: Vec<Vec<ScalarFunction>>,
}

impl SeparableIntegrand {
    pub fn new(arity: usize, terms: Vec<Vec<ScalarFunction>>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Parameter("integrand arity must be positive".into()));
        }
        if terms.is_empty() {
            return Err(Error::Parameter("separable integrand needs at least one term".into()));
        }
        if let Some((n, t)) = terms.iter().enumerate().find(|(_, t)| t.len() != arity) {
            return Err(Error::Dimension(format!(
                "term {n} has {} factors, arity is {arity}",
                t.len()
            )));
        }
        Ok(Self { arity, terms })
    }

    /// The single all-constant term `c·1·…·1`.
    pub fn constant(arity: usize, c: f64) -> Self {
        let mut term = vec![ScalarFunction::polynomial(vec![1.0]); arity];
        term[0] = ScalarFunction::polynomial(vec![c]);
        Self::new(arity, vec![term]).expect("arity positive")
    }

    /// Single-term integrand `f_1(λ_1)·…·f_m(λ_m)`.
    pub fn product(factors: Vec<ScalarFunction>) -> Result<Self> {
        Self::new(factors.len(), vec![factors])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Vec<ScalarFunction>] {
        &self.terms
    }

    pub fn eval(&self, lambda: &[f64]) -> f64 {
        debug_assert_eq!(lambda.len(), self.arity);
        self.terms
            .iter()
            .map(|t| t.iter().zip(lambda).map(|(f, &x)| f.eval(x)).product::<f64>())
            .sum()
    }

    pub fn eval_complex(&self, lambda: &[Complex64]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut prod = Complex64::new(1.0, 0.0);
            for (f, &z) in t.iter().zip(lambda) {
                prod *= f.eval_complex(z)?;
            }
            acc += prod;
        }
        Ok(acc)
    }

    /// Scale every term by `s` (applied to the first factor).
    pub fn scale(&self, s: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t[0] = scale_function(&t[0], s);
                t
            })
            .collect();
        Self {
            arity: self.arity,
            terms,
        }
    }

    /// Concatenate the term lists of two integrands of equal arity.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Dimension(format!(
                "arity {} vs {}",
                self.arity, other.arity
            )));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::new(self.arity, terms)
    }

    /// `Σ_n Π_i max_{λ ∈ spectra_i} |f_{i,n}(λ)|`.
    pub fn projective_norm_bound(&self, spectra: &[Vec<f64>]) -> Result<f64> {
        if spectra.len() != self.arity {
            return Err(Error::Dimension(format!(
                "{} spectra for arity {}",
                spectra.len(),
                self.arity
            )));
        }
        if spectra.iter().any(|s| s.is_empty()) {
            return Err(Error::Parameter("empty spectrum".into()));
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.iter()
                    .zip(spectra)
                    .map(|(f, s)| s.iter().fold(0.0_f64, |m, &x| m.max(f.eval(x).abs())))
                    .product::<f64>()
            })
            .sum())
    }
}

fn scale_function(f: &ScalarFunction, s: f64) -> ScalarFunction {
    match f {
        ScalarFunction::Polynomial(p) => ScalarFunction::Polynomial(p.scale(s)),
        other => {
            let g = other.clone();
            let name = format!("{s}*{}", other.name());
            match other {
                ScalarFunction::WithDerivatives { derivatives, .. } => {
                    let ds: Vec<_> = (1..=derivatives.len())
                        .map(|r| {
                            let g = g.clone();
                            move |x: f64| s * g.derivative(r, x).unwrap_or(f64::NAN)
                        })
                        .collect();
                    ScalarFunction::with_derivatives(&name, move |x| s * g.eval(x), ds)
                }
                _ => ScalarFunction::value_only(&name, move |x| s * g.eval(x)),
            }
        }
    }
}

/// `(p ⊕ q)(λ_1..λ_m) = p(λ_1..λ_k)·q(λ_{k+1}..λ_m)`: all pairwise term
/// concatenations.
pub fn integrand_oplus(p: &SeparableIntegrand, q: &SeparableIntegrand) -> SeparableIntegrand {
    let mut terms = Vec::with_capacity(p.terms.len() * q.terms.len());
    for tp in &p.terms {
        for tq in &q.terms {
            let mut t = tp.clone();
            t.extend(tq.iter().cloned());
            terms.push(t);
        }
    }
    SeparableIntegrand {
        arity: p.arity + q.arity,
        terms,
    }
}

type Evaluator = Arc<dyn Fn(&[Complex64]) -> Result<Complex64> + Send + Sync>;

/// A function of `m` scalars, optionally with a separable representation.
///
/// Evaluation takes complex arguments so that the same integrand serves
/// Hermitian (real spectra) and unitary (unit-circle spectra) operators.
/// Real-only integrands reject arguments with nonzero imaginary part.
#[derive(Clone)]
pub struct MultivariateFunction {
    arity: usize,
    name: String,
    evaluate: Evaluator,
    separable: Option<SeparableIntegrand>,
}

impl fmt::Debug for MultivariateFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultivariateFunction")
            .field("arity", &self.arity)
            .field("name", &self.name)
            .field("separable", &self.separable.as_ref().map(|s| s.terms().len()))
            .finish()
    }
}

impl MultivariateFunction {
    pub fn new_complex<F>(arity: usize, name: &str, f: F) -> Self
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            arity,
            name: name.to_string(),
            evaluate: Arc::new(f),
            separable: None,
        }
    }

    /// Real-valued function of real arguments.
    pub fn new_real<F>(arity: usize, name: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let label = name.to_string();
        Self::new_complex(arity, name, move |z| {
            let x = real_args(&label, z)?;
            Ok(Complex64::new(f(&x), 0.0))
        })
    }

    pub fn from_separable(s: SeparableIntegrand) -> Self {
        let inner = s.clone();
        Self {
            arity: s.arity(),
            name: format!("separable({} terms)", s.terms().len()),
            evaluate: Arc::new(move |z| inner.eval_complex(z)),
            separable: Some(s),
        }
    }

    /// `ψ ≡ c`.
    pub fn constant(arity: usize, c: f64) -> Self {
        Self::from_separable(SeparableIntegrand::constant(arity, c))
    }

    /// Attach a separable representation after checking it against the
    /// evaluator on a `5^m` grid over `[lo, hi]^m`.
    pub fn with_separable(mut self, s: SeparableIntegrand, lo: f64, hi: f64) -> Result<Self> {
        if s.arity() != self.arity {
            return Err(Error::Dimension(format!(
                "separable arity {} vs {}",
                s.arity(),
                self.arity
            )));
        }
        let worst = separable_mismatch(&self, &s, lo, hi)?;
        if worst > 1e-10 {
            return Err(Error::Parameter(format!(
                "separable representation deviates by {worst:e} (relative) from the function"
            )));
        }
        self.separable = Some(s);
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn separable(&self) -> Option<&SeparableIntegrand> {
        self.separable.as_ref()
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.arity {
            return Err(Error::Dimension(format!(
                "{} arguments for arity {}",
                z.len(),
                self.arity
            )));
        }
        (self.evaluate)(z)
    }

    /// Real part of the value at real arguments.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.eval_complex(&z)?.re)
    }

    /// Pointwise `αφ + βψ`; keeps a separable representation when both have one.
    pub fn linear_combination(alpha: f64, phi: &Self, beta: f64, psi: &Self) -> Result<Self> {
        if phi.arity != psi.arity {
            return Err(Error::Dimension(format!(
                "arity {} vs {}",
                phi.arity, psi.arity
            )));
        }
        let (f, g) = (phi.evaluate.clone(), psi.evaluate.clone());
        let mut out = Self::new_complex(phi.arity, "linear combination", move |z| {
            Ok(f(z)? * alpha + g(z)? * beta)
        });
        if let (Some(a), Some(b)) = (&phi.separable, &psi.separable) {
            out.separable = Some(a.scale(alpha).sum(&b.scale(beta))?);
        }
        Ok(out)
    }

    /// Pointwise product `ψ1(λ_1..λ_k)·ψ2(λ_{k+1}..λ_m)`.
    pub fn oplus(p: &Self, q: &Self) -> Self {
        let k = p.arity;
        let (f, g) = (p.evaluate.clone(), q.evaluate.clone());
        let mut out = Self::new_complex(p.arity + q.arity, "oplus", move |z| {
            Ok(f(&z[..k])? * g(&z[k..])?)
        });
        if let (Some(a), Some(b)) = (&p.separable, &q.separable) {
            out.separable = Some(integrand_oplus(a, b));
        }
        out
    }
}

fn real_args(name: &str, z: &[Complex64]) -> Result<Vec<f64>> {
    z.iter()
        .map(|v| {
            if v.im == 0.0 {
                Ok(v.re)
            } else {
                Err(Error::Capability(format!("{name} needs real arguments, got {v}")))
            }
        })
        .collect()
}

/// Max of `|ψ(λ) − Σ_n Π f_{i,n}(λ_i)| / (1 + |ψ(λ)|)` over a `5^m` grid.
pub fn separable_mismatch(
    f: &MultivariateFunction,
    s: &SeparableIntegrand,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let axis: Vec<f64> = (0..5).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
    let spectra = vec![axis; f.arity()];
    let mut worst = 0.0_f64;
    for_each_tuple(&spectra, |x| {
        let v = f.eval(x)?;
        let w = s.eval(x);
        worst = worst.max((v - w).abs() / (1.0 + v.abs()));
        Ok(())
    })?;
    Ok(worst)
}

/// Visit every point of the Cartesian product of `spectra` in row-major order.
pub fn for_each_tuple(
    spectra: &[Vec<f64>],
    mut visit: impl FnMut(&[f64]) -> Result<()>,
) -> Result<()> {
    if spectra.iter().any(|s| s.is_empty()) {
        return Ok(());
    }
    let m = spectra.len();
    let mut idx = vec![0usize; m];
    let mut point: Vec<f64> = spectra.iter().map(|s| s[0]).collect();
    loop {
        visit(&point)?;
        let mut d = m;
        loop {
            if d == 0 {
                return Ok(());
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < spectra[d].len() {
                point[d] = spectra[d][idx[d]];
                break;
            }
            idx[d] = 0;
            point[d] = spectra[d][0];
        }
    }
}

/// `max |ψ|` over the Cartesian product of the spectra.
pub fn sup_norm_on_grid(f: &MultivariateFunction, spectra: &[Vec<f64>]) -> Result<f64> {
    if spectra.len() != f.arity() {
        return Err(Error::Dimension(format!(
            "{} spectra for arity {}",
            spectra.len(),
            f.arity()
        )));
    }
    let mut best = 0.0_f64;
    for_each_tuple(spectra, |x| {
        best = best.max(f.eval(x)?.abs());
        Ok(())
    })?;
    Ok(best)
}

/// Exponent vectors `a ∈ ℕ^parts` with `|a| = total`, lexicographically.
pub fn weak_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Separable form of `p^[k]`: `Σ_d c_d Σ_{|a| = d-k} Π_i λ_i^{a_i}`, one term
/// per `(d, a)` with the coefficient on the first factor.
pub fn polynomial_divided_separable(p: &Polynomial, k: usize) -> SeparableIntegrand {
    let c = p.coeffs();
    let mut terms = Vec::new();
    for d in k..c.len() {
        if c[d] == 0.0 {
            continue;
        }
        for a in weak_compositions(d - k, k + 1) {
            let mut t: Vec<ScalarFunction> = a.iter().map(|&e| ScalarFunction::monomial(e)).collect();
            t[0] = ScalarFunction::Polynomial(Polynomial::monomial(a[0]).scale(c[d]));
            terms.push(t);
        }
    }
    if terms.is_empty() {
        return SeparableIntegrand::constant(k + 1, 0.0);
    }
    SeparableIntegrand::new(k + 1, terms).expect("term shapes fixed")
}

/// Projective surrogate of [`polynomial_divided_separable`] in closed form:
/// `Σ_d |c_d| h_{d-k}(r_0, …, r_k)` with `r_i` the largest modulus in slot `i`.
pub fn polynomial_divided_projective_bound(p: &Polynomial, k: usize, radii: &[f64]) -> f64 {
    assert_eq!(radii.len(), k + 1);
    let c = p.coeffs();
    if c.len() <= k {
        return 0.0;
    }
    let h = complete_homogeneous(radii, c.len() - 1 - k);
    h.iter().enumerate().map(|(j, &hj)| c[k + j].abs() * hj).sum()
}

/// `ψ = f^[k]` as an integrand of arity `k + 1`. Polynomials evaluate at
/// complex nodes and carry their monomial separable form.
pub fn integrand_from_divided_difference(f: &ScalarFunction, k: usize) -> Result<MultivariateFunction> {
    if !f.supports_order(k) {
        return Err(Error::Capability(format!(
            "{} supports divided differences to order {}, order {k} requested",
            f.name(),
            f.max_derivative_order().unwrap_or(0)
        )));
    }
    let name = format!("{}^[{k}]", f.name());
    let g = f.clone();
    let mut out = MultivariateFunction::new_complex(k + 1, &name, move |z| divided_difference_complex(&g, z));
    if let ScalarFunction::Polynomial(p) = f {
        out.separable = Some(polynomial_divided_separable(p, k));
    }
    Ok(out)
}

/// Real-node divided difference with an explicit clustering width.
pub fn integrand_from_divided_difference_with_tolerance(
    f: &ScalarFunction,
    k: usize,
    tau: f64,
) -> Result<MultivariateFunction> {
    let mut out = integrand_from_divided_difference(f, k)?;
    if f.as_polynomial().is_none() {
        let g = f.clone();
        let label = out.name.clone();
        out.evaluate = Arc::new(move |z| {
            let x = real_args(&label, z)?;
            let spec = DividedDifferenceSpec {
                f: g.clone(),
                nodes: x,
                tau: Some(tau),
            };
            Ok(Complex64::new(divided_difference(&spec)?, 0.0))
        });
    }
    Ok(out)
}
