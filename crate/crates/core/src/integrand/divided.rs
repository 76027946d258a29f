//! Divided differences `f^[n](λ_0, …, λ_n)`.
//!
//! Polynomials use the identity `f^[n](λ) = Σ_d c_d h_{d-n}(λ)` with `h_k`
//! the complete homogeneous symmetric polynomial of degree `k`. It needs no
//! division, so coincident nodes and complex nodes are handled exactly.
//! Other functions go through the Newton table with nodes merged into
//! clusters of width `τ`; a cluster of size `r + 1` contributes
//! `f^{(r)}(z)/r!` at its mean `z`.

use std::ops::{Add, Mul};

use num_complex::Complex64;

use super::scalar::{Polynomial, ScalarFunction};
use crate::error::{Error, Result};

/// `[h_0, …, h_kmax]` of the given nodes.
pub fn complete_homogeneous<T>(nodes: &[T], kmax: usize) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<Output = T> + From<f64>,
{
    let mut h = vec![T::from(0.0); kmax + 1];
    h[0] = T::from(1.0);
    // h_k(x_0..x_j) = h_k(x_0..x_{j-1}) + x_j h_{k-1}(x_0..x_j)
    for &x in nodes {
        for k in 1..=kmax {
            h[k] = h[k] + x * h[k - 1];
        }
    }
    h
}

/// `p^[n]` at `n + 1 = nodes.len()` real or complex nodes.
pub fn polynomial_divided_difference<T>(p: &Polynomial, nodes: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<Output = T> + From<f64>,
{
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let n = nodes.len() - 1;
    let c = p.coeffs();
    if c.len() <= n {
        return T::from(0.0);
    }
    let h = complete_homogeneous(nodes, c.len() - 1 - n);
    let mut acc = T::from(0.0);
    for (k, &hk) in h.iter().enumerate() {
        acc = acc + T::from(c[n + k]) * hk;
    }
    acc
}

pub fn polynomial_divided_difference_complex(p: &Polynomial, nodes: &[Complex64]) -> Complex64 {
    polynomial_divided_difference(p, nodes)
}

/// Default clustering width `1e-7·max(1, max|λ|)`.
pub fn default_tolerance(nodes: &[f64]) -> f64 {
    1e-7 * nodes.iter().fold(1.0_f64, |m, x| m.max(x.abs()))
}

/// Sort nodes and replace each `τ`-cluster (single linkage on the sorted
/// list) by its mean. Returns the merged node list.
pub fn cluster_nodes(nodes: &[f64], tau: f64) -> Vec<f64> {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(sorted.len());
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tau {
            let block = &sorted[start..i];
            let mean = block.iter().sum::<f64>() / block.len() as f64;
            out.extend(std::iter::repeat_n(mean, block.len()));
            start = i;
        }
    }
    out
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|t| t as f64).product()
}

/// Newton-table divided difference with confluent clusters, for any
/// function with enough derivative access.
pub fn divided_difference_table(f: &ScalarFunction, nodes: &[f64], tau: f64) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::Parameter("divided difference needs at least one node".into()));
    }
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("confluence tolerance must be positive, got {tau}")));
    }
    let z = cluster_nodes(nodes, tau);
    let n = z.len();
    let mut table: Vec<f64> = Vec::with_capacity(n);
    for &x in &z {
        let v = f.eval(x);
        table.push(v);
    }
    // column j holds f[z_i..z_{i+j}] in table[i]
    for j in 1..n {
        for i in 0..(n - j) {
            let (a, b) = (z[i], z[i + j]);
            table[i] = if a == b {
                f.derivative(j, a)? / factorial(j)
            } else {
                (table[i + 1] - table[i]) / (b - a)
            };
        }
    }
    Ok(table[0])
}

/// Inputs for a single divided difference.
#[derive(Debug, Clone)]
pub struct DividedDifferenceSpec {
    pub f: ScalarFunction,
    pub nodes: Vec<f64>,
    /// Clustering width; `None` selects [`default_tolerance`].
    pub tau: Option<f64>,
}

impl DividedDifferenceSpec {
    pub fn new(f: ScalarFunction, nodes: Vec<f64>) -> Self {
        Self { f, nodes, tau: None }
    }

    pub fn order(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    pub fn tolerance(&self) -> f64 {
        self.tau.unwrap_or_else(|| default_tolerance(&self.nodes))
    }
}

/// `f^[n]` at the spec's nodes: exact symmetric-polynomial route for
/// polynomials, confluent Newton table otherwise.
pub fn divided_difference(spec: &DividedDifferenceSpec) -> Result<f64> {
    if spec.nodes.is_empty() {
        return Err(Error::Parameter("divided difference needs at least one node".into()));
    }
    let tau = spec.tolerance();
    if !(tau > 0.0) {
        return Err(Error::Parameter(format!("confluence tolerance must be positive, got {tau}")));
    }
    if let Some(order) = spec.f.max_derivative_order() {
        if spec.order() > order {
            return Err(Error::Capability(format!(
                "{} supports divided differences to order {order}, order {} requested",
                spec.f.name(),
                spec.order()
            )));
        }
    }
    match &spec.f {
        ScalarFunction::Polynomial(p) => Ok(polynomial_divided_difference(p, &spec.nodes)),
        f => divided_difference_table(f, &spec.nodes, tau),
    }
}

/// `f^[n]` at complex nodes; polynomials only.
pub fn divided_difference_complex(f: &ScalarFunction, nodes: &[Complex64]) -> Result<Complex64> {
    if nodes.is_empty() {
        return Err(Error::Parameter("divided difference needs at least one node".into()));
    }
    match f {
        ScalarFunction::Polynomial(p) => Ok(polynomial_divided_difference(p, nodes)),
        _ if nodes.iter().all(|z| z.im == 0.0) => {
            let re: Vec<f64> = nodes.iter().map(|z| z.re).collect();
            divided_difference(&DividedDifferenceSpec::new(f.clone(), re)).map(|v| Complex64::new(v, 0.0))
        }
        _ => Err(Error::Capability(format!(
            "divided differences of {} at non-real nodes need a polynomial",
            f.name()
        ))),
    }
}
