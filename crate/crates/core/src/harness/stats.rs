//! Reproducible Monte Carlo summaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::random::{stream_rng, SeededRng};

/// Sum in a fixed binary tree order, so the result depends only on the
/// input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// `sd / √N`.
    pub stderr: f64,
    pub samples: usize,
}

pub fn mean_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate {
            mean: f64::NAN,
            stderr: f64::NAN,
            samples: 0,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    let stderr = if n > 1 {
        let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&dev) / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Estimate { mean, stderr, samples: n }
}

/// Mean and standard error of `statistic` over `n` independent streams
/// `stream_rng(seed, i)`.
pub fn estimate_expectation<F>(statistic: F, n: usize, seed: u64) -> Result<Estimate>
where
    F: Fn(&mut SeededRng) -> Result<f64> + Sync,
{
    if n < 100 {
        return Err(Error::Parameter(format!("need at least 100 samples, got {n}")));
    }
    let values: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| statistic(&mut stream_rng(seed, i)))
        .collect::<Result<_>>()?;
    Ok(mean_stderr(&values))
}

/// `sup_x |F_n(x) − F(x)|` for the empirical distribution of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Asymptotic Kolmogorov p-value with the small-sample correction
/// `λ = (√n + 0.12 + 0.11/√n) d`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
