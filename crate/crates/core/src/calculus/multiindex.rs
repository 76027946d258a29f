use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A tuple of nonnegative integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|a| = Σ a_i`.
    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    /// `a! = Π a_i!`, exact while it fits in `u128`; each `a_i ≤ 20` is
    /// required.
    pub fn factorial(&self) -> Result<u128> {
        let mut acc: u128 = 1;
        for &a in &self.0 {
            if a > 20 {
                return Err(Error::Parameter(format!("component {a} exceeds 20")));
            }
            acc = acc
                .checked_mul(factorial_u64(a) as u128)
                .ok_or_else(|| Error::Parameter(format!("{self:?}! overflows")))?;
        }
        Ok(acc)
    }
}

/// `a!` for `a ≤ 20`.
pub fn factorial_u64(a: usize) -> u64 {
    assert!(a <= 20, "{a}! overflows u64");
    (1..=a as u64).product()
}

pub fn factorial_f64(a: usize) -> f64 {
    (1..=a).map(|t| t as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Compositions of `total` into `parts` positive parts, lexicographic with
/// the largest first part first.
pub fn compositions(total: usize, parts: usize) -> Vec<MultiIndex> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if parts == 1 {
            prefix.push(total);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (1..=total - (parts - 1)).rev() {
            prefix.push(first);
            rec(total - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 || parts > total {
        return out;
    }
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}
