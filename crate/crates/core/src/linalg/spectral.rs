//! Spectral decompositions `A = Σ_i λ_i P_i` of Hermitian and unitary matrices.
//!
//! Hermitian matrices go through Householder tridiagonalization followed by
//! implicit symmetric QR (nalgebra's `SymmetricEigen`). Unitary matrices use a
//! complex Schur factorization; for a normal matrix the triangular factor is
//! diagonal up to rounding, so its diagonal gives the eigenvalues and the
//! Schur vectors are an orthonormal eigenbasis. Eigenvalues are renormalized
//! onto the unit circle.

use nalgebra::{Schur, SymmetricEigen};
use num_complex::Complex64;

use super::matrix::{self, ComplexMatrix};
use crate::error::{Error, Result};

const EIGEN_EPS: f64 = 1.0e-15;
const EIGEN_MAX_ITER: usize = 10_000;
/// Relative reconstruction tolerance enforced on every decomposition.
pub const RECONSTRUCTION_TOL: f64 = 1.0e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Hermitian,
    Unitary,
}

/// Eigenvalues with an orthonormal eigenbasis (columns of `basis`).
///
/// Hermitian spectra are sorted ascending by value, unitary spectra ascending
/// by principal phase in `(-π, π]`. Ties keep the solver's order and basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    kind: SpectrumKind,
    eigenvalues: Vec<Complex64>,
    basis: ComplexMatrix,
}

/// Principal argument mapped into `(-π, π]`.
pub fn principal_phase(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        a
    }
}

impl SpectralDecomposition {
    /// Assemble a decomposition from eigenpairs, sorting them into canonical
    /// order. The caller guarantees orthonormality of `basis`.
    pub fn from_parts(
        kind: SpectrumKind,
        eigenvalues: Vec<Complex64>,
        basis: ComplexMatrix,
    ) -> Result<Self> {
        let n = eigenvalues.len();
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::Dimension(format!(
                "{} eigenvalues but basis is {}x{}",
                n,
                basis.nrows(),
                basis.ncols()
            )));
        }
        let key = |z: &Complex64| match kind {
            SpectrumKind::Hermitian => z.re,
            SpectrumKind::Unitary => principal_phase(*z),
        };
        let mut order: Vec<usize> = (0..n).collect();
        // stable: ties keep solver order
        order.sort_by(|&a, &b| key(&eigenvalues[a]).total_cmp(&key(&eigenvalues[b])));
        let sorted_values = order.iter().map(|&i| eigenvalues[i]).collect();
        let sorted_basis = ComplexMatrix::from_fn(n, n, |r, c| basis[(r, order[c])]);
        Ok(Self {
            kind,
            eigenvalues: sorted_values,
            basis: sorted_basis,
        })
    }

    /// Decompose a Hermitian matrix. The caller validates hermiticity.
    pub fn hermitian(m: &ComplexMatrix) -> Result<Self> {
        let n = matrix::ensure_square(m)?;
        let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or_else(|| {
            Error::Eigensolver {
                residual: hermitian_residual_estimate(m),
            }
        })?;
        let values = eig
            .eigenvalues
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let out = Self::from_parts(SpectrumKind::Hermitian, values, eig.eigenvectors)?;
        debug_assert_eq!(out.dim(), n);
        out.check_reconstruction(m)?;
        Ok(out)
    }

    /// Decompose a unitary matrix. The caller validates unitarity.
    pub fn unitary(m: &ComplexMatrix) -> Result<Self> {
        matrix::ensure_square(m)?;
        let schur = Schur::try_new(m.clone(), EIGEN_EPS, EIGEN_MAX_ITER).ok_or(
            Error::Eigensolver {
                residual: f64::NAN,
            },
        )?;
        let (q, t) = schur.unpack();
        let values = (0..t.nrows())
            .map(|i| {
                let z = t[(i, i)];
                let r = z.norm();
                if r > 0.0 {
                    z / r
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        let out = Self::from_parts(SpectrumKind::Unitary, values, q)?;
        out.check_reconstruction(m)?;
        Ok(out)
    }

    fn check_reconstruction(&self, m: &ComplexMatrix) -> Result<()> {
        let residual = matrix::frobenius(&(self.reconstruct() - m));
        let scale = matrix::frobenius(m).max(1.0);
        if residual > RECONSTRUCTION_TOL * scale {
            return Err(Error::Eigensolver { residual });
        }
        Ok(())
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Real parts of the eigenvalues; exact for Hermitian spectra.
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    /// Rank-one spectral projector `P_i = u_i u_i*`.
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let u = self.basis.column(i);
        &u * u.adjoint()
    }

    /// `Σ_i λ_i P_i`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply(|z| z)
    }

    /// `U diag(f(λ_1), …, f(λ_n)) U*`.
    pub fn apply(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let values: Vec<Complex64> = self.eigenvalues.iter().map(|&z| f(z)).collect();
        self.with_values(&values)
    }

    /// `U diag(values) U*` in this eigenbasis.
    pub fn with_values(&self, values: &[Complex64]) -> ComplexMatrix {
        assert_eq!(values.len(), self.dim());
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for (j, &w) in values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        scaled * self.basis.adjoint()
    }

    /// Largest eigenvalue modulus; the operator norm of a normal matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

fn hermitian_residual_estimate(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut off = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                off += m[(i, j)].norm_sqr();
            }
        }
    }
    off.sqrt()
}
