//! Scalar weights for the unitary remainder bound.

use num_complex::Complex64;

use super::multiindex::{compositions, MultiIndex};
use crate::error::{Error, Result};

/// `Σ_{m ≥ start} z^m / m!`, summed directly for moderate `|z|` so that small
/// tails keep their relative accuracy.
pub fn exp_tail_series(z: Complex64, start: usize) -> Complex64 {
    let r = z.norm();
    if r > 20.0 {
        let mut partial = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for m in 0..start {
            partial += term;
            term = term * z / (m + 1) as f64;
        }
        return z.exp() - partial;
    }
    // z^start / start!
    let mut term = Complex64::new(1.0, 0.0);
    for m in 1..=start {
        term = term * z / m as f64;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut m = start;
    loop {
        sum += term;
        m += 1;
        term = term * z / m as f64;
        if term.norm() <= 1e-18 * sum.norm() || term.norm() == 0.0 || m > start + 400 {
            break;
        }
    }
    sum
}

/// `ρ(H, i, ℓ) = (Σ_{m ≥ i_1} ‖H‖^m/m!)·Π_{p=2}^{ℓ} ‖H‖^{i_p}/i_p!`.
pub fn rho_bound(h_norm: f64, composition: &MultiIndex) -> Result<f64> {
    if !(h_norm >= 0.0 && h_norm.is_finite()) {
        return Err(Error::Parameter(format!("perturbation norm {h_norm} must be finite and nonnegative")));
    }
    let parts = composition.components();
    let Some((&first, rest)) = parts.split_first() else {
        return Err(Error::Parameter("empty composition".into()));
    };
    let mut value = exp_tail_series(Complex64::new(h_norm, 0.0), first).re;
    for &i in rest {
        value *= h_norm.powi(i as i32) / super::multiindex::factorial_f64(i);
    }
    Ok(value)
}

/// `Θ(k, ℓ) = Σ_{i ⊨ k, ℓ parts} ρ(H, i, ℓ)`.
pub fn theta_sum(h_norm: f64, k: usize, l: usize) -> Result<f64> {
    if l == 0 || l > k {
        return Err(Error::Parameter(format!("need 1 ≤ ℓ ≤ k, got ℓ = {l}, k = {k}")));
    }
    compositions(k, l).iter().map(|c| rho_bound(h_norm, c)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_matches_long_partial_sum() {
        for &x in &[0.0, 0.3, 1.7, 5.0] {
            for start in 0..6 {
                let z = Complex64::new(0.0, x);
                let mut full = Complex64::new(0.0, 0.0);
                let mut term = Complex64::new(1.0, 0.0);
                for m in 0..60 {
                    if m >= start {
                        full += term;
                    }
                    term = term * z / (m + 1) as f64;
                }
                assert!((exp_tail_series(z, start) - full).norm() < 1e-12, "x={x} start={start}");
            }
        }
    }

    #[test]
    fn small_tail_keeps_relative_accuracy() {
        // Σ_{m≥3} 1e-3^m/m! ≈ 1.6675e-10
        let t = exp_tail_series(Complex64::new(1e-3, 0.0), 3).re;
        let expected = 1e-9 / 6.0 + 1e-12 / 24.0 + 1e-15 / 120.0 + 1e-18 / 720.0;
        assert!((t - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn theta_single_part_is_tail() {
        let h: f64 = 0.4;
        let tail = h.exp() - 1.0 - h;
        assert!((theta_sum(h, 2, 1).unwrap() - tail).abs() < 1e-15);
        // ℓ = 2, k = 2: only (1, 1) → (e^h − 1)·h
        assert!((theta_sum(h, 2, 2).unwrap() - (h.exp() - 1.0) * h).abs() < 1e-15);
        assert!(theta_sum(h, 2, 3).is_err());
    }
}
