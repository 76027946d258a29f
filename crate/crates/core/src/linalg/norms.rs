use nalgebra::SVD;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Schatten exponent: a real `p >= 1` or `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(SchattenP::Infinity);
        }
        if !(p >= 1.0) {
            return Err(Error::Parameter(format!("Schatten exponent p = {p} < 1")));
        }
        Ok(SchattenP::Finite(p))
    }

    /// Hölder conjugate exponent `1/p`, zero for `∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            SchattenP::Finite(p) => 1.0 / p,
            SchattenP::Infinity => 0.0,
        }
    }

    /// Exponent with the given reciprocal; `∞` when the reciprocal is zero.
    pub fn from_reciprocal(r: f64) -> Result<Self> {
        if r == 0.0 {
            Ok(SchattenP::Infinity)
        } else {
            SchattenP::new(1.0 / r)
        }
    }
}

/// `(Σ σ_i^p)^{1/p}`; `p = ∞` is the operator norm.
pub fn schatten_norm(m: &ComplexMatrix, p: SchattenP) -> f64 {
    let s = singular_values(m);
    schatten_from_singular_values(&s, p)
}

pub fn schatten_from_singular_values(s: &[f64], p: SchattenP) -> f64 {
    match p {
        SchattenP::Infinity => s.first().copied().unwrap_or(0.0),
        SchattenP::Finite(p) => {
            let top = s.first().copied().unwrap_or(0.0);
            if top == 0.0 {
                return 0.0;
            }
            // factor out σ_max against overflow
            let sum: f64 = s.iter().map(|&x| (x / top).powf(p)).sum();
            top * sum.powf(1.0 / p)
        }
    }
}

/// Convenience wrapper taking a raw exponent (`f64::INFINITY` allowed).
pub fn schatten_norm_p(m: &ComplexMatrix, p: f64) -> Result<f64> {
    Ok(schatten_norm(m, SchattenP::new(p)?))
}

/// Residual scale for identity checks: the largest operator norm among the
/// given matrices, floored at one.
pub fn scale_of(mats: &[&ComplexMatrix]) -> f64 {
    mats.iter().map(|m| operator_norm(m)).fold(1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{diag_real, frobenius, from_real_rows, identity, zeros};

    #[test]
    fn diagonal_operator_norm() {
        assert!((operator_norm(&diag_real(&[-5.0, 2.0])) - 5.0).abs() < 1e-14);
        assert_eq!(operator_norm(&zeros(3)), 0.0);
    }

    #[test]
    fn identity_trace_norm() {
        let n = 5;
        let v = schatten_norm_p(&identity(n), 1.0).unwrap();
        assert!((v - n as f64).abs() < 1e-13);
    }

    #[test]
    fn p2_is_frobenius() {
        let m = from_real_rows(3, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -1.0, 4.0, 2.0]);
        let v = schatten_norm_p(&m, 2.0).unwrap();
        assert!((v - frobenius(&m)).abs() < 1e-12);
    }

    #[test]
    fn p_below_one_rejected() {
        assert!(matches!(schatten_norm_p(&identity(2), 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn infinity_equals_operator_norm_exactly() {
        let m = from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(schatten_norm(&m, SchattenP::Infinity), operator_norm(&m));
    }
}
