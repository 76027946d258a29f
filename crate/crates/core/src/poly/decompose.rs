//! Sums of powers of inner products and products of homogenized linear forms.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::monomial::{for_each_grid_point, MonomialPolynomial};
use crate::calculus::{binomial, factorial_f64};
use crate::error::{Error, Result};
use crate::integrand::separable::weak_compositions;

pub const MAX_DEGREE: usize = 8;
pub const MAX_ARITY: usize = 4;
pub const MAX_CONDITION: f64 = 1e10;
pub const MAX_ATTEMPTS: usize = 10;
pub const PROBE_POINTS: usize = 10;
pub const RESIDUAL_TOL: f64 = 1e-8;

/// `c ⟨x, v⟩^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerPowerTerm {
    pub degree: usize,
    pub coef: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerPowerForm {
    pub arity: usize,
    pub terms: Vec<InnerPowerTerm>,
}

impl InnerPowerForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let dot: f64 = t.direction.iter().zip(x).map(|(v, xi)| v * xi).sum();
                t.coef * dot.powi(t.degree as i32)
            })
            .sum()
    }

    pub fn count_of_degree(&self, i: usize) -> usize {
        self.terms.iter().filter(|t| t.degree == i).count()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerPowerDecomposition {
    pub form: InnerPowerForm,
    /// `sup |p − form|` over the `10^m` probe grid on `[−1, 1]^m`.
    pub residual: f64,
    pub grid_norm: f64,
    /// Condition number of the accepted system per degree.
    pub condition: Vec<f64>,
    pub attempts: usize,
}

/// `n_i = C(m + i − 1, i)`.
pub fn direction_count(m: usize, i: usize) -> usize {
    binomial(m + i - 1, i) as usize
}

fn multinomial(i: usize, alpha: &[usize]) -> f64 {
    factorial_f64(i) / alpha.iter().map(|&a| factorial_f64(a)).product::<f64>()
}

fn unit_direction<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Solves `Σ_d c_d ⟨x, v_d⟩^i = p_i(x)` for the degree-`i` part `p_i`.
/// Returns the coefficients and the condition number.
fn solve_degree(p: &MonomialPolynomial, i: usize, dirs: &[Vec<f64>]) -> Result<(Vec<f64>, f64)> {
    let m = p.arity();
    let alphas = weak_compositions(i, m);
    if dirs.len() != alphas.len() {
        return Err(Error::Dimension(format!(
            "degree {i} needs {} directions, got {}",
            alphas.len(),
            dirs.len()
        )));
    }
    let n = alphas.len();
    let system = DMatrix::from_fn(n, n, |r, c| {
        let alpha = &alphas[r];
        multinomial(i, alpha)
            * alpha
                .iter()
                .zip(&dirs[c])
                .map(|(&a, &v)| v.powi(a as i32))
                .product::<f64>()
    });
    let rhs = DVector::from_iterator(n, alphas.iter().map(|a| p.coefficient(a)));
    let svd = system.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Ok((Vec::new(), condition));
    }
    let c = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Decomposition {
            attempts: 1,
            condition,
            detail: e.to_string(),
        })?;
    Ok((c.iter().copied().collect(), condition))
}

fn check_scale(p: &MonomialPolynomial) -> Result<()> {
    if p.degree() > MAX_DEGREE || p.arity() > MAX_ARITY {
        return Err(Error::Parameter(format!(
            "degree {} and arity {} exceed the supported {MAX_DEGREE} and {MAX_ARITY}",
            p.degree(),
            p.arity()
        )));
    }
    Ok(())
}

fn residual(p: &MonomialPolynomial, form: &InnerPowerForm) -> f64 {
    let mut r = 0.0_f64;
    for_each_grid_point(p.arity(), PROBE_POINTS, |x| r = r.max((p.eval(x) - form.eval(x)).abs()));
    r
}

/// Writes `p` as `Σ_i Σ_{d ≤ n_i} c_{i,d} ⟨x, v_{i,d}⟩^i` with random unit
/// directions, one linear solve per homogeneous degree.
pub fn decompose_inner_powers<R: Rng + ?Sized>(p: &MonomialPolynomial, rng: &mut R) -> Result<InnerPowerDecomposition> {
    check_scale(p)?;
    let m = p.arity();
    let grid_norm = p.grid_sup_norm(PROBE_POINTS);
    let mut terms = Vec::new();
    let mut condition = Vec::new();
    let mut attempts = 0;
    for i in 0..=p.degree() {
        let n = direction_count(m, i);
        let mut worst = 0.0_f64;
        let mut solved = None;
        for _ in 0..MAX_ATTEMPTS {
            attempts += 1;
            let dirs: Vec<Vec<f64>> = (0..n).map(|_| unit_direction(m, rng)).collect();
            let (c, cond) = solve_degree(p, i, &dirs)?;
            worst = worst.max(cond);
            if !c.is_empty() {
                solved = Some((c, dirs, cond));
                break;
            }
        }
        let Some((c, dirs, cond)) = solved else {
            return Err(Error::Decomposition {
                attempts: MAX_ATTEMPTS,
                condition: worst,
                detail: format!("degree {i} direction system stayed ill-conditioned"),
            });
        };
        condition.push(cond);
        terms.extend(c.into_iter().zip(dirs).map(|(coef, direction)| InnerPowerTerm {
            degree: i,
            coef,
            direction,
        }));
    }
    let form = InnerPowerForm { arity: m, terms };
    let residual = residual(p, &form);
    if residual > RESIDUAL_TOL * (1.0 + grid_norm) {
        return Err(Error::Decomposition {
            attempts,
            condition: condition.iter().cloned().fold(0.0, f64::max),
            detail: format!("reconstruction residual {residual:e}"),
        });
    }
    Ok(InnerPowerDecomposition {
        form,
        residual,
        grid_norm,
        condition,
        attempts,
    })
}

/// As [`decompose_inner_powers`] with caller-chosen directions, indexed by
/// degree; each is normalized.
pub fn decompose_inner_powers_with_directions(
    p: &MonomialPolynomial,
    directions: &[Vec<Vec<f64>>],
) -> Result<InnerPowerDecomposition> {
    check_scale(p)?;
    let m = p.arity();
    if directions.len() != p.degree() + 1 {
        return Err(Error::Dimension(format!(
            "{} direction sets for degree {}",
            directions.len(),
            p.degree()
        )));
    }
    let mut terms = Vec::new();
    let mut condition = Vec::new();
    for (i, dirs) in directions.iter().enumerate() {
        let dirs: Vec<Vec<f64>> = dirs
            .iter()
            .map(|v| {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if v.len() != m || norm == 0.0 {
                    return Err(Error::Dimension(format!("direction {v:?} for arity {m}")));
                }
                Ok(v.iter().map(|x| x / norm).collect())
            })
            .collect::<Result<_>>()?;
        let (c, cond) = solve_degree(p, i, &dirs)?;
        if c.is_empty() {
            return Err(Error::Decomposition {
                attempts: 1,
                condition: cond,
                detail: format!("degree {i} direction system is singular"),
            });
        }
        condition.push(cond);
        terms.extend(c.into_iter().zip(dirs).map(|(coef, direction)| InnerPowerTerm {
            degree: i,
            coef,
            direction,
        }));
    }
    let form = InnerPowerForm { arity: m, terms };
    Ok(InnerPowerDecomposition {
        residual: residual(p, &form),
        grid_norm: p.grid_sup_norm(PROBE_POINTS),
        form,
        condition,
        attempts: 1,
    })
}

/// `Σ_t Π_j ⟨x̌, u_{t,j}⟩` with `x̌ = [x, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProductForm {
    pub arity: usize,
    pub terms: Vec<Vec<Vec<f64>>>,
}

impl LinearProductForm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let m = self.arity;
        self.terms
            .iter()
            .map(|factors| {
                factors
                    .iter()
                    .map(|u| u[..m].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + u[m])
                    .product::<f64>()
            })
            .sum()
    }

    /// Multiplies out every product into monomials of `x`.
    pub fn expand(&self) -> Result<MonomialPolynomial> {
        let mut acc = MonomialPolynomial::constant(self.arity, 0.0);
        for factors in &self.terms {
            let mut prod = MonomialPolynomial::constant(self.arity, 1.0);
            for u in factors {
                prod = prod.mul(&MonomialPolynomial::affine(u))?;
            }
            acc = acc.add(&prod)?;
        }
        Ok(acc)
    }
}

/// Term `t` (1-based, terms in the order of `ip`) becomes `t` factors:
/// `[c·v, 0]` then `i − 1` copies of `[v, 0]`, padded with `[0, 1]`; a
/// degree-0 term uses `[0, c]`. Requires degrees sorted ascending with one
/// degree-0 term first, as produced by [`decompose_inner_powers`].
pub fn to_linear_products(ip: &InnerPowerForm) -> Result<LinearProductForm> {
    let m = ip.arity;
    let mut terms = Vec::with_capacity(ip.terms.len());
    for (pos, t) in ip.terms.iter().enumerate() {
        let len = pos + 1;
        if t.degree > len {
            return Err(Error::Parameter(format!(
                "term {len} has degree {} and cannot fit {len} factors",
                t.degree
            )));
        }
        let mut factors = Vec::with_capacity(len);
        let with_one = |v: &[f64], s: f64, last: f64| {
            let mut u: Vec<f64> = v.iter().map(|x| x * s).collect();
            u.push(last);
            u
        };
        if t.degree == 0 {
            factors.push(with_one(&vec![0.0; m], 0.0, t.coef));
        } else {
            factors.push(with_one(&t.direction, t.coef, 0.0));
            for _ in 1..t.degree {
                factors.push(with_one(&t.direction, 1.0, 0.0));
            }
        }
        while factors.len() < len {
            factors.push(with_one(&vec![0.0; m], 0.0, 1.0));
        }
        terms.push(factors);
    }
    Ok(LinearProductForm { arity: m, terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::rng_from_seed;

    fn random_poly<R: Rng>(m: usize, k: usize, rng: &mut R) -> MonomialPolynomial {
        let mut map = std::collections::BTreeMap::new();
        for d in 0..=k {
            for e in weak_compositions(d, m) {
                map.insert(e, rng.random::<f64>() * 2.0 - 1.0);
            }
        }
        MonomialPolynomial::from_map(m, map)
    }

    #[test]
    fn polarization() {
        let p = MonomialPolynomial::from_pairs(2, &[(&[1, 1], 1.0)]).unwrap();
        let dirs = vec![
            vec![vec![1.0, 0.0]],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![1.0, 0.0]],
        ];
        let d = decompose_inner_powers_with_directions(&p, &dirs).unwrap();
        let c: Vec<f64> = d.form.terms.iter().filter(|t| t.degree == 2).map(|t| t.coef).collect();
        // unit directions: xy = ½⟨x,(1,1)/√2⟩² − ½⟨x,(1,−1)/√2⟩²
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 0.5).abs() < 1e-12 && c[2].abs() < 1e-12, "{c:?}");
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn constant_is_single_term() {
        let p = MonomialPolynomial::constant(3, 2.5);
        let d = decompose_inner_powers(&p, &mut rng_from_seed(1)).unwrap();
        assert_eq!(d.form.terms.len(), 1);
        assert_eq!(d.form.terms[0].degree, 0);
        assert!((d.form.terms[0].coef - 2.5).abs() < 1e-15);
    }

    #[test]
    fn random_round_trip_and_counts() {
        let mut rng = rng_from_seed(3);
        for m in 1..=3 {
            for k in 0..=4 {
                let p = random_poly(m, k, &mut rng);
                let d = decompose_inner_powers(&p, &mut rng).unwrap();
                assert!(d.residual <= 1e-8 * (1.0 + d.grid_norm), "m={m} k={k} {}", d.residual);
                let total: usize = (0..=k).map(|i| direction_count(m, i)).sum();
                assert_eq!(d.form.terms.len(), total);
                for i in 0..=k {
                    assert_eq!(d.form.count_of_degree(i), direction_count(m, i));
                }
                for t in &d.form.terms {
                    assert!((t.direction.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn product_form_matches_and_is_triangular() {
        let mut rng = rng_from_seed(4);
        let p = random_poly(2, 3, &mut rng);
        let d = decompose_inner_powers(&p, &mut rng).unwrap();
        let lp = to_linear_products(&d.form).unwrap();
        for (i, t) in lp.terms.iter().enumerate() {
            assert_eq!(t.len(), i + 1);
        }
        for_each_grid_point(2, 10, |x| assert!((lp.eval(x) - d.form.eval(x)).abs() < 1e-10));
    }

    #[test]
    fn single_linear_and_constant_terms() {
        let ip = InnerPowerForm {
            arity: 2,
            terms: vec![
                InnerPowerTerm { degree: 0, coef: 3.0, direction: vec![1.0, 0.0] },
                InnerPowerTerm { degree: 1, coef: 2.0, direction: vec![0.6, 0.8] },
            ],
        };
        let lp = to_linear_products(&ip).unwrap();
        assert_eq!(lp.terms[0], vec![vec![0.0, 0.0, 3.0]]);
        assert_eq!(lp.terms[1][0], vec![1.2, 1.6, 0.0]);
        assert_eq!(lp.terms[1].len(), 2);
    }

    #[test]
    fn homogenized_expansion_matches_symbolically() {
        let mut rng = rng_from_seed(9);
        for k in 0..=3 {
            let p = random_poly(1, k, &mut rng);
            let d = decompose_inner_powers(&p, &mut rng).unwrap();
            let expanded = to_linear_products(&d.form).unwrap().expand().unwrap();
            for e in 0..=k {
                assert!((expanded.coefficient(&[e]) - p.coefficient(&[e])).abs() < 1e-10, "k={k} e={e}");
            }
        }
    }

    #[test]
    fn too_large_is_rejected() {
        let p = MonomialPolynomial::from_pairs(1, &[(&[9], 1.0)]).unwrap();
        assert!(decompose_inner_powers(&p, &mut rng_from_seed(0)).is_err());
    }
}
