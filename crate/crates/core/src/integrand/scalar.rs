use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real polynomial, coefficients ascending by degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Trailing zero coefficients are dropped; the empty list is the zero
    /// polynomial.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = 1.0;
        Self::new(c)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Coefficients of the `r`-th derivative.
    pub fn derivative(&self, r: usize) -> Polynomial {
        if r > self.degree() || self.is_zero() {
            return Polynomial::new(Vec::new());
        }
        let coeffs = (r..self.coeffs.len())
            .map(|d| {
                let falling: f64 = ((d - r + 1)..=d).map(|t| t as f64).product();
                self.coeffs[d] * falling
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn derivative_at(&self, r: usize, x: f64) -> f64 {
        self.derivative(r).eval(x)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Highest derivative order served by finite differences.
pub const NUMERIC_DERIVATIVE_MAX_ORDER: usize = 3;

/// A scalar function of one real variable with whatever derivative access
/// it carries.
#[derive(Clone)]
pub enum ScalarFunction {
    Polynomial(Polynomial),
    /// Value plus exact derivatives of orders `1..=derivatives.len()`.
    WithDerivatives {
        name: String,
        value: RealFn,
        derivatives: Vec<RealFn>,
    },
    /// Value only; derivatives up to order 3 by extrapolated differences.
    ValueOnly { name: String, value: RealFn },
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarFunction::Polynomial(p) => write!(f, "Polynomial({:?})", p.coeffs()),
            ScalarFunction::WithDerivatives {
                name, derivatives, ..
            } => write!(f, "{name} (derivatives to order {})", derivatives.len()),
            ScalarFunction::ValueOnly { name, .. } => write!(f, "{name} (value only)"),
        }
    }
}

impl ScalarFunction {
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        ScalarFunction::Polynomial(Polynomial::new(coeffs))
    }

    pub fn monomial(degree: usize) -> Self {
        ScalarFunction::Polynomial(Polynomial::monomial(degree))
    }

    pub fn with_derivatives<F, D>(name: &str, value: F, derivatives: Vec<D>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarFunction::WithDerivatives {
            name: name.to_string(),
            value: Arc::new(value),
            derivatives: derivatives
                .into_iter()
                .map(|d| Arc::new(d) as RealFn)
                .collect(),
        }
    }

    pub fn value_only<F>(name: &str, value: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarFunction::ValueOnly {
            name: name.to_string(),
            value: Arc::new(value),
        }
    }

    /// `exp` with exact derivatives up to order 8.
    pub fn exp() -> Self {
        Self::with_derivatives("exp", f64::exp, vec![f64::exp as fn(f64) -> f64; 8])
    }

    /// `sin` with exact derivatives up to order 8.
    pub fn sin() -> Self {
        let cycle: [fn(f64) -> f64; 4] = [f64::cos, |x| -x.sin(), |x| -x.cos(), f64::sin];
        Self::with_derivatives("sin", f64::sin, (0..8).map(|r| cycle[r % 4]).collect())
    }

    /// `cos` with exact derivatives up to order 8.
    pub fn cos() -> Self {
        let cycle: [fn(f64) -> f64; 4] = [|x| -x.sin(), |x| -x.cos(), f64::sin, f64::cos];
        Self::with_derivatives("cos", f64::cos, (0..8).map(|r| cycle[r % 4]).collect())
    }

    /// Look up a named function: `exp`, `sin`, `cos`, or `abs` (value only).
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "exp" => Ok(Self::exp()),
            "sin" => Ok(Self::sin()),
            "cos" => Ok(Self::cos()),
            "abs" => Ok(Self::value_only("abs", f64::abs)),
            other => Err(Error::Parameter(format!("unknown builtin function {other:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ScalarFunction::Polynomial(p) => format!("polynomial{:?}", p.coeffs()),
            ScalarFunction::WithDerivatives { name, .. } | ScalarFunction::ValueOnly { name, .. } => {
                name.clone()
            }
        }
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match self {
            ScalarFunction::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScalarFunction::Polynomial(p) => p.eval(x),
            ScalarFunction::WithDerivatives { value, .. } | ScalarFunction::ValueOnly { value, .. } => {
                value(x)
            }
        }
    }

    /// Complex evaluation; only polynomials accept non-real arguments.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        match self {
            ScalarFunction::Polynomial(p) => Ok(p.eval_complex(z)),
            _ if z.im == 0.0 => Ok(Complex64::new(self.eval(z.re), 0.0)),
            _ => Err(Error::Capability(format!(
                "{} cannot be evaluated at non-real {z}",
                self.name()
            ))),
        }
    }

    /// Highest derivative order available; `None` means unlimited.
    pub fn max_derivative_order(&self) -> Option<usize> {
        match self {
            ScalarFunction::Polynomial(_) => None,
            ScalarFunction::WithDerivatives { derivatives, .. } => Some(derivatives.len()),
            ScalarFunction::ValueOnly { .. } => Some(NUMERIC_DERIVATIVE_MAX_ORDER),
        }
    }

    pub fn supports_order(&self, r: usize) -> bool {
        self.max_derivative_order().is_none_or(|k| r <= k)
    }

    /// `f^{(r)}(x)`; `r = 0` is the value.
    pub fn derivative(&self, r: usize, x: f64) -> Result<f64> {
        if r == 0 {
            return Ok(self.eval(x));
        }
        match self {
            ScalarFunction::Polynomial(p) => Ok(p.derivative_at(r, x)),
            ScalarFunction::WithDerivatives {
                name, derivatives, ..
            } => derivatives.get(r - 1).map(|d| d(x)).ok_or_else(|| {
                Error::Capability(format!(
                    "{name} provides derivatives to order {}, order {r} requested",
                    derivatives.len()
                ))
            }),
            ScalarFunction::ValueOnly { name, value } => {
                if r > NUMERIC_DERIVATIVE_MAX_ORDER {
                    return Err(Error::Capability(format!(
                        "{name} has no derivatives; numerical order {r} exceeds {NUMERIC_DERIVATIVE_MAX_ORDER}"
                    )));
                }
                Ok(richardson_derivative(value.as_ref(), r, x))
            }
        }
    }
}

impl From<Polynomial> for ScalarFunction {
    fn from(p: Polynomial) -> Self {
        ScalarFunction::Polynomial(p)
    }
}

fn central_difference(f: &dyn Fn(f64) -> f64, r: usize, x: f64, h: f64) -> f64 {
    match r {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
        _ => unreachable!("order checked by caller"),
    }
}

/// Central difference of order `r ≤ 3` with two Richardson levels. The
/// stencils have even error expansions in `h`, so the levels remove the
/// `h²` and `h⁴` terms. The step balances rounding `ε/h^r` against the
/// remaining `h⁶` truncation.
pub fn richardson_derivative(f: &dyn Fn(f64) -> f64, r: usize, x: f64) -> f64 {
    let h = f64::EPSILON.powf(1.0 / (r as f64 + 6.0)) * x.abs().max(1.0);
    let d0 = central_difference(f, r, x, h);
    let d1 = central_difference(f, r, x, h / 2.0);
    let d2 = central_difference(f, r, x, h / 4.0);
    let e0 = (4.0 * d1 - d0) / 3.0;
    let e1 = (4.0 * d2 - d1) / 3.0;
    (16.0 * e1 - e0) / 15.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_at_zero_is_constant_term() {
        let p = Polynomial::new(vec![3.5, -1.0, 2.0]);
        assert_eq!(p.eval(0.0), 3.5);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        assert_eq!(Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]).degree(), 1);
        assert!(Polynomial::new(vec![0.0]).is_zero());
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new(vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(p.derivative(1).coeffs(), &[1.0, 2.0, 3.0]);
        assert_eq!(p.derivative(3).coeffs(), &[6.0]);
        assert!(p.derivative(4).is_zero());
        assert_eq!(p.derivative_at(2, 2.0), 2.0 + 6.0 * 2.0);
    }

    #[test]
    fn complex_eval_on_circle() {
        let p = Polynomial::monomial(3);
        let z = Complex64::from_polar(1.0, 0.4);
        assert!((p.eval_complex(z) - Complex64::from_polar(1.0, 1.2)).norm() < 1e-15);
    }

    #[test]
    fn richardson_orders() {
        let f = |x: f64| x.sin();
        let x = 0.7_f64;
        assert!((richardson_derivative(&f, 1, x) - x.cos()).abs() < 1e-9);
        assert!((richardson_derivative(&f, 2, x) + x.sin()).abs() < 1e-9);
        assert!((richardson_derivative(&f, 3, x) + x.cos()).abs() < 1e-8);
    }

    #[test]
    fn capability_limits() {
        let f = ScalarFunction::value_only("sqrt", f64::sqrt);
        assert!(f.derivative(3, 2.0).is_ok());
        assert!(matches!(f.derivative(4, 2.0), Err(Error::Capability(_))));
        let e = ScalarFunction::exp();
        assert!((e.derivative(8, 1.0).unwrap() - 1f64.exp()).abs() < 1e-15);
        assert!(e.derivative(9, 1.0).is_err());
        assert!(ScalarFunction::exp().eval_complex(Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn sin_derivative_cycle() {
        let s = ScalarFunction::sin();
        let x = 0.3_f64;
        assert_eq!(s.derivative(1, x).unwrap(), x.cos());
        assert_eq!(s.derivative(2, x).unwrap(), -x.sin());
        assert_eq!(s.derivative(4, x).unwrap(), x.sin());
    }
}
