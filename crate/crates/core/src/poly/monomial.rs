use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::MultiIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub exp: MultiIndex,
    pub coef: f64,
}

/// `p(x) = Σ a_α x^α` in `m` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMonomialPolynomial")]
pub struct MonomialPolynomial {
    arity: usize,
    terms: Vec<MonomialTerm>,
}

#[derive(Deserialize)]
struct RawMonomialPolynomial {
    arity: usize,
    terms: Vec<MonomialTerm>,
}

impl TryFrom<RawMonomialPolynomial> for MonomialPolynomial {
    type Error = Error;

    fn try_from(raw: RawMonomialPolynomial) -> Result<Self> {
        Self::new(raw.arity, raw.terms)
    }
}

impl MonomialPolynomial {
    pub fn new(arity: usize, terms: Vec<MonomialTerm>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Dimension("polynomial arity must be at least 1".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &terms {
            if t.exp.len() != arity {
                return Err(Error::Dimension(format!(
                    "exponent {:?} has length {}, arity is {arity}",
                    t.exp.components(),
                    t.exp.len()
                )));
            }
            if !t.coef.is_finite() {
                return Err(Error::Parameter(format!("coefficient of {:?} is {}", t.exp.components(), t.coef)));
            }
            if !seen.insert(t.exp.clone()) {
                return Err(Error::Parameter(format!("exponent {:?} repeated", t.exp.components())));
            }
        }
        Ok(Self { arity, terms })
    }

    /// Sums coefficients of repeated exponents and drops zeros.
    pub fn from_map(arity: usize, map: BTreeMap<Vec<usize>, f64>) -> Self {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(e, c)| MonomialTerm {
                exp: MultiIndex::new(e),
                coef: c,
            })
            .collect();
        Self { arity, terms }
    }

    pub fn from_pairs(arity: usize, pairs: &[(&[usize], f64)]) -> Result<Self> {
        Self::new(
            arity,
            pairs
                .iter()
                .map(|(e, c)| MonomialTerm {
                    exp: MultiIndex::new(e.to_vec()),
                    coef: *c,
                })
                .collect(),
        )
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        let mut map = BTreeMap::new();
        map.insert(vec![0; arity], c);
        Self::from_map(arity, map)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[MonomialTerm] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.exp.order()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        self.terms
            .iter()
            .map(|t| {
                t.coef
                    * t.exp
                        .components()
                        .iter()
                        .zip(x)
                        .map(|(&a, &xi)| xi.powi(a as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Coefficient of `x^α`, zero when absent.
    pub fn coefficient(&self, exp: &[usize]) -> f64 {
        self.terms
            .iter()
            .find(|t| t.exp.components() == exp)
            .map_or(0.0, |t| t.coef)
    }

    pub fn to_map(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut map = BTreeMap::new();
        for t in &self.terms {
            *map.entry(t.exp.components().to_vec()).or_insert(0.0) += t.coef;
        }
        map
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Dimension(format!("arity {} vs {}", self.arity, other.arity)));
        }
        let mut map = BTreeMap::new();
        for a in &self.terms {
            for b in &other.terms {
                let e: Vec<usize> = a
                    .exp
                    .components()
                    .iter()
                    .zip(b.exp.components())
                    .map(|(x, y)| x + y)
                    .collect();
                *map.entry(e).or_insert(0.0) += a.coef * b.coef;
            }
        }
        Ok(Self::from_map(self.arity, map))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.arity != other.arity {
            return Err(Error::Dimension(format!("arity {} vs {}", self.arity, other.arity)));
        }
        let mut map = self.to_map();
        for t in &other.terms {
            *map.entry(t.exp.components().to_vec()).or_insert(0.0) += t.coef;
        }
        Ok(Self::from_map(self.arity, map))
    }

    /// `⟨x, u⟩ + u_m` for `u ∈ ℝ^{m+1}`.
    pub fn affine(u: &[f64]) -> Self {
        let m = u.len() - 1;
        let mut map = BTreeMap::new();
        for (i, &ui) in u[..m].iter().enumerate() {
            let mut e = vec![0; m];
            e[i] = 1;
            map.insert(e, ui);
        }
        map.insert(vec![0; m], u[m]);
        Self::from_map(m, map)
    }

    /// `max |p|` over the `points^m` uniform grid on `[−1, 1]^m`.
    pub fn grid_sup_norm(&self, points: usize) -> f64 {
        let mut sup = 0.0_f64;
        for_each_grid_point(self.arity, points, |x| sup = sup.max(self.eval(x).abs()));
        sup
    }
}

/// Visits the `points^m` uniform grid on `[−1, 1]^m`.
pub fn for_each_grid_point(m: usize, points: usize, mut visit: impl FnMut(&[f64])) {
    let axis: Vec<f64> = (0..points)
        .map(|i| if points == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (points - 1) as f64 })
        .collect();
    let mut idx = vec![0usize; m];
    let mut x = vec![0.0; m];
    loop {
        for (xi, &i) in x.iter_mut().zip(&idx) {
            *xi = axis[i];
        }
        visit(&x);
        let mut d = 0;
        loop {
            if d == m {
                return;
            }
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}
