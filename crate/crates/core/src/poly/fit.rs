//! Least-squares polynomial fits on boxes.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::monomial::MonomialPolynomial;
use crate::error::{Error, Result};
use crate::integrand::separable::weak_compositions;
use crate::linalg::random::rng_from_seed;

pub const FIT_MAX_DEGREE: usize = 8;
pub const FIT_MAX_ARITY: usize = 3;
pub const HOLDOUT_POINTS: usize = 1000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialFit {
    pub polynomial: MonomialPolynomial,
    /// `max |f − p|` over the held-out random sample.
    pub sup_error: f64,
    pub holdout_points: usize,
    pub grid_points: usize,
}

/// Chebyshev polynomials `T_0..=T_k` of the affine map `[lo, hi] → [−1, 1]`
/// in variable `axis`, as monomials in `x`.
fn chebyshev_in_x(m: usize, axis: usize, lo: f64, hi: f64, k: usize) -> Result<Vec<MonomialPolynomial>> {
    let mut u = vec![0.0; m + 1];
    u[axis] = 2.0 / (hi - lo);
    u[m] = -(hi + lo) / (hi - lo);
    let t = MonomialPolynomial::affine(&u);
    let two_t = t.mul(&MonomialPolynomial::constant(m, 2.0))?;
    let minus_one = MonomialPolynomial::constant(m, -1.0);
    let mut out = vec![MonomialPolynomial::constant(m, 1.0), t];
    while out.len() <= k {
        let n = out.len();
        let next = two_t.mul(&out[n - 1])?.add(&out[n - 2].mul(&minus_one)?)?;
        out.push(next);
    }
    out.truncate(k + 1);
    Ok(out)
}

fn chebyshev_values(t: f64, k: usize) -> Vec<f64> {
    let mut v = vec![1.0, t];
    while v.len() <= k {
        let n = v.len();
        v.push(2.0 * t * v[n - 1] - v[n - 2]);
    }
    v.truncate(k + 1);
    v
}

/// Fits a total-degree-`k` polynomial to `f` on `Π [lo_i, hi_i]` by least
/// squares on a tensor grid of `2(k + 1)` Chebyshev nodes per axis, then
/// measures the sup error on 1000 uniform points drawn from `seed`.
pub fn fit_polynomial(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    k: usize,
    seed: u64,
) -> Result<PolynomialFit> {
    let m = lo.len();
    if m == 0 || m > FIT_MAX_ARITY || hi.len() != m {
        return Err(Error::Dimension(format!(
            "box bounds of lengths {} and {}, supported arity 1..={FIT_MAX_ARITY}",
            lo.len(),
            hi.len()
        )));
    }
    if k > FIT_MAX_DEGREE {
        return Err(Error::Parameter(format!("degree {k} exceeds {FIT_MAX_DEGREE}")));
    }
    if let Some(i) = (0..m).find(|&i| !(lo[i] < hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
        return Err(Error::Parameter(format!("empty box side {i}: [{}, {}]", lo[i], hi[i])));
    }
    let basis: Vec<Vec<usize>> = (0..=k).flat_map(|d| weak_compositions(d, m)).collect();
    let per_axis = 2 * (k + 1);
    let nodes: Vec<f64> = (0..per_axis)
        .map(|j| (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * per_axis) as f64).cos())
        .collect();
    let count = per_axis.pow(m as u32);
    let mut design = DMatrix::zeros(count, basis.len());
    let mut rhs = DVector::zeros(count);
    let mut idx = vec![0usize; m];
    let mut x = vec![0.0; m];
    for row in 0..count {
        let mut r = row;
        for d in 0..m {
            idx[d] = r % per_axis;
            r /= per_axis;
            x[d] = lo[d] + (hi[d] - lo[d]) * (nodes[idx[d]] + 1.0) / 2.0;
        }
        let cheb: Vec<Vec<f64>> = (0..m).map(|d| chebyshev_values(nodes[idx[d]], k)).collect();
        for (col, alpha) in basis.iter().enumerate() {
            design[(row, col)] = alpha.iter().enumerate().map(|(d, &a)| cheb[d][a]).product();
        }
        let y = f(&x);
        if !y.is_finite() {
            return Err(Error::Domain(format!("f{x:?} = {y}")));
        }
        rhs[row] = y;
    }
    let coeffs = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Parameter(e.to_string()))?;

    let axes: Vec<Vec<MonomialPolynomial>> = (0..m)
        .map(|d| chebyshev_in_x(m, d, lo[d], hi[d], k))
        .collect::<Result<_>>()?;
    let mut polynomial = MonomialPolynomial::constant(m, 0.0);
    for (alpha, &c) in basis.iter().zip(coeffs.iter()) {
        let mut term = MonomialPolynomial::constant(m, c);
        for (d, &a) in alpha.iter().enumerate() {
            term = term.mul(&axes[d][a])?;
        }
        polynomial = polynomial.add(&term)?;
    }

    let mut rng = rng_from_seed(seed);
    let mut sup_error = 0.0_f64;
    for _ in 0..HOLDOUT_POINTS {
        for d in 0..m {
            x[d] = lo[d] + (hi[d] - lo[d]) * rng.random::<f64>();
        }
        sup_error = sup_error.max((f(&x) - polynomial.eval(&x)).abs());
    }
    Ok(PolynomialFit {
        polynomial,
        sup_error,
        holdout_points: HOLDOUT_POINTS,
        grid_points: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_polynomials() {
        let f = |x: &[f64]| 1.0 - 2.0 * x[0] * x[1] + 0.5 * x[0].powi(3);
        let fit = fit_polynomial(&f, &[-1.0, 0.0], &[2.0, 1.5], 3, 1).unwrap();
        assert!(fit.sup_error <= 1e-9, "{}", fit.sup_error);
        assert!((fit.polynomial.coefficient(&[1, 1]) + 2.0).abs() < 1e-9);
    }

    #[test]
    fn abs_improves_with_degree() {
        let f = |x: &[f64]| x[0].abs();
        let low = fit_polynomial(&f, &[-1.0], &[1.0], 2, 5).unwrap();
        let high = fit_polynomial(&f, &[-1.0], &[1.0], 6, 5).unwrap();
        assert!(high.sup_error > 0.0 && high.sup_error < low.sup_error);
    }

    #[test]
    fn exp_on_square() {
        let f = |x: &[f64]| (x[0] + x[1]).exp();
        let fit = fit_polynomial(&f, &[0.0, 0.0], &[1.0, 1.0], 6, 2).unwrap();
        assert!(fit.sup_error <= 1e-4, "{}", fit.sup_error);
    }

    #[test]
    fn rejects_bad_boxes() {
        let f = |_: &[f64]| 0.0;
        assert!(fit_polynomial(&f, &[1.0], &[1.0], 2, 0).is_err());
        assert!(fit_polynomial(&f, &[0.0; 4], &[1.0; 4], 2, 0).is_err());
        assert!(fit_polynomial(&f, &[0.0], &[1.0], 9, 0).is_err());
    }
}
