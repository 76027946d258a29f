use std::sync::OnceLock;

use num_complex::Complex64;

use super::matrix::{self, ComplexMatrix};
use super::spectral::{SpectralDecomposition, SpectrumKind};
use crate::error::{Error, Result};
use crate::integrand::ScalarFunction;

/// Relative hermiticity tolerance on `‖M - M*‖_max`.
pub const HERMITIAN_TOL: f64 = 1.0e-12;
/// Absolute tolerance on `‖U*U - I‖_max`.
pub const UNITARY_TOL: f64 = 1.0e-10;

/// Locate the worst violation of `M = M*`; returns `(row, col, |M_rc - conj(M_cr)|)`.
pub fn max_asymmetry(m: &ComplexMatrix) -> (usize, usize, f64) {
    let n = m.nrows();
    let mut worst = (0, 0, 0.0);
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.2 {
                worst = (i, j, d);
            }
        }
    }
    worst
}

pub fn unitarity_deviation(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    matrix::max_abs(&(m.adjoint() * m - matrix::identity(n)))
}

/// A self-adjoint matrix with a lazily computed spectral decomposition.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectral: OnceLock<SpectralDecomposition>,
}

impl HermitianOperator {
    /// Validate and store `m`. The stored matrix is the exact Hermitian part
    /// `(M + M*)/2`, which differs from `m` by at most the tolerance.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        matrix::ensure_square(&m)?;
        matrix::ensure_finite(&m)?;
        let (row, col, asymmetry) = max_asymmetry(&m);
        if asymmetry > HERMITIAN_TOL * matrix::max_abs(&m).max(1.0) {
            return Err(Error::NotHermitian {
                row,
                col,
                asymmetry,
            });
        }
        let sym = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self {
            matrix: sym,
            spectral: OnceLock::new(),
        })
    }

    /// Build `U diag(λ) U*` and keep the construction as the cached
    /// decomposition. `basis` must be unitary.
    pub fn from_eigenpairs(eigenvalues: &[f64], basis: ComplexMatrix) -> Result<Self> {
        let values: Vec<Complex64> = eigenvalues.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let spectral = SpectralDecomposition::from_parts(SpectrumKind::Hermitian, values, basis)?;
        let m = spectral.reconstruct();
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let cell = OnceLock::new();
        let _ = cell.set(spectral);
        Ok(Self {
            matrix: m,
            spectral: cell,
        })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self::new(matrix::diag_real(values)).expect("real diagonal is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectral(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let s = SpectralDecomposition::hermitian(&self.matrix)?;
        let _ = self.spectral.set(s);
        Ok(self.spectral.get().expect("just set"))
    }

    /// Fresh decomposition that ignores any cached one.
    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::hermitian(&self.matrix)
    }

    /// `f(A) = U diag(f(λ_i)) U*`.
    pub fn apply(&self, f: &ScalarFunction) -> Result<ComplexMatrix> {
        apply_scalar_function(f, self)
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.dim())));
        }
        HermitianOperator::new(&self.matrix + &other.matrix)
    }

    /// `self + t·other`.
    pub fn add_scaled(&self, other: &ComplexMatrix, t: f64) -> Result<HermitianOperator> {
        if self.dim() != other.nrows() {
            return Err(Error::Dimension(format!("{} vs {}", self.dim(), other.nrows())));
        }
        HermitianOperator::new(&self.matrix + other * Complex64::new(t, 0.0))
    }

    pub fn operator_norm(&self) -> Result<f64> {
        Ok(self.spectral()?.spectral_radius())
    }
}

/// A unitary matrix with a lazily computed spectral decomposition.
#[derive(Debug, Clone)]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
    spectral: OnceLock<SpectralDecomposition>,
}

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        matrix::ensure_square(&m)?;
        matrix::ensure_finite(&m)?;
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self {
            matrix: m,
            spectral: OnceLock::new(),
        })
    }

    /// `U diag(e^{ιθ}) U*` with the construction cached as the decomposition.
    pub fn from_phases(phases: &[f64], basis: ComplexMatrix) -> Result<Self> {
        let values = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let spectral = SpectralDecomposition::from_parts(SpectrumKind::Unitary, values, basis)?;
        let m = spectral.reconstruct();
        let out = Self::new(m)?;
        let _ = out.spectral.set(spectral);
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn spectral(&self) -> Result<&SpectralDecomposition> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let s = SpectralDecomposition::unitary(&self.matrix)?;
        let _ = self.spectral.set(s);
        Ok(self.spectral.get().expect("just set"))
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        SpectralDecomposition::unitary(&self.matrix)
    }
}

/// `f(A) = U diag(f(λ_1), …, f(λ_n)) U*`; fails naming the first eigenvalue
/// at which `f` is not finite.
pub fn apply_scalar_function(f: &ScalarFunction, op: &HermitianOperator) -> Result<ComplexMatrix> {
    let s = op.spectral()?;
    let mut values = Vec::with_capacity(s.dim());
    for &lambda in s.eigenvalues() {
        let v = f.eval(lambda.re);
        if !v.is_finite() {
            return Err(Error::Domain(format!(
                "f({}) = {} at an eigenvalue",
                lambda.re, v
            )));
        }
        values.push(Complex64::new(v, 0.0));
    }
    Ok(s.with_values(&values))
}
