//! Random operators: Haar unitaries and Hermitian matrices with a random
//! spectrum in a Haar-distributed eigenbasis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use super::operator::{HermitianOperator, UnitaryOperator};
use crate::error::{Error, Result};

/// The generator used for every seeded stream in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `seed` and a stream index. Distinct
/// indices give statistically independent seeds.
pub fn mix64(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> SeededRng {
    rng_from_seed(mix64(seed, index))
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    // fill row-major so the stream order is independent of storage layout
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` moved into `Q`.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryOperator> {
    UnitaryOperator::new(haar_matrix(dim, rng)?)
}

/// The raw matrix of [`sample_haar_unitary`].
pub fn haar_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::Dimension("Haar sample of dimension 0".into()));
    }
    let qr = ginibre(dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let n = d.norm();
        let phase = if n > 0.0 { d / n } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    Ok(q)
}

/// Standard GUE-type Hermitian matrix `(G + G*)/2`.
pub fn gaussian_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random Hermitian matrix rescaled to operator norm `norm`.
pub fn hermitian_with_norm<R: Rng + ?Sized>(dim: usize, norm: f64, rng: &mut R) -> ComplexMatrix {
    let h = gaussian_hermitian(dim, rng);
    let s = super::norms::operator_norm(&h);
    if s == 0.0 {
        return h;
    }
    h * Complex64::new(norm / s, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EigenvalueLaw {
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, sd: f64 },
    Fixed { values: Vec<f64> },
}

impl EigenvalueLaw {
    /// Largest `|λ|` the law can produce, `∞` for the Gaussian.
    pub fn support_radius(&self) -> f64 {
        match self {
            EigenvalueLaw::Uniform { a, b } => a.abs().max(b.abs()),
            EigenvalueLaw::Gaussian { .. } => f64::INFINITY,
            EigenvalueLaw::Fixed { values } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }
}

/// Random Hermitian operator: i.i.d. eigenvalues from `law` in a Haar basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomOperatorModel {
    pub dim: usize,
    pub law: EigenvalueLaw,
    #[serde(default)]
    pub seed: u64,
}

impl RandomOperatorModel {
    pub fn new(dim: usize, law: EigenvalueLaw, seed: u64) -> Result<Self> {
        let m = Self { dim, law, seed };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(dim: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(dim, EigenvalueLaw::Uniform { a, b }, 0)
    }

    pub fn gaussian(dim: usize, mean: f64, sd: f64) -> Result<Self> {
        Self::new(dim, EigenvalueLaw::Gaussian { mean, sd }, 0)
    }

    pub fn fixed(values: Vec<f64>) -> Result<Self> {
        Self::new(values.len(), EigenvalueLaw::Fixed { values }, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Parameter("model dim must be positive".into()));
        }
        match &self.law {
            EigenvalueLaw::Uniform { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::Parameter(format!("uniform law needs a < b, got ({a}, {b})")));
                }
            }
            EigenvalueLaw::Gaussian { mean, sd } => {
                if !(mean.is_finite() && sd.is_finite() && *sd > 0.0) {
                    return Err(Error::Parameter(format!("gaussian law needs sd > 0, got {sd}")));
                }
            }
            EigenvalueLaw::Fixed { values } => {
                if values.len() != self.dim {
                    return Err(Error::Parameter(format!(
                        "fixed law has {} values for dim {}",
                        values.len(),
                        self.dim
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parameter("fixed law has a non-finite value".into()));
                }
            }
        }
        Ok(())
    }

    /// Draw `dim` eigenvalues, unsorted.
    pub fn draw_eigenvalues<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.law {
            EigenvalueLaw::Uniform { a, b } => (0..self.dim)
                .map(|_| a + (b - a) * rng.random::<f64>())
                .collect(),
            EigenvalueLaw::Gaussian { mean, sd } => {
                let normal = Normal::new(*mean, *sd).expect("validated sd");
                (0..self.dim).map(|_| normal.sample(rng)).collect()
            }
            EigenvalueLaw::Fixed { values } => values.clone(),
        }
    }

    /// Generator seeded with the model's own seed.
    pub fn rng(&self) -> SeededRng {
        rng_from_seed(self.seed)
    }
}

/// `A = U diag(λ) U*` with `λ` drawn from the model law and `U` Haar,
/// eigenvalues drawn first. The returned operator caches this decomposition.
pub fn sample_random_hermitian<R: Rng + ?Sized>(
    model: &RandomOperatorModel,
    rng: &mut R,
) -> Result<HermitianOperator> {
    model.validate()?;
    let lambda = model.draw_eigenvalues(rng);
    let u = haar_matrix(model.dim, rng)?;
    HermitianOperator::from_eigenpairs(&lambda, u)
}

/// Unitary `U diag(e^{ιλ}) U*` with phases `λ` drawn from the model law.
pub fn sample_random_unitary<R: Rng + ?Sized>(
    model: &RandomOperatorModel,
    rng: &mut R,
) -> Result<UnitaryOperator> {
    model.validate()?;
    let phases = model.draw_eigenvalues(rng);
    let u = haar_matrix(model.dim, rng)?;
    UnitaryOperator::from_phases(&phases, u)
}
