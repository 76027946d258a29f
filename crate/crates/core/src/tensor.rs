//! Dense complex tensors, the `⋆_k` contraction, and multiple tensor
//! integrals over Hermitian tensors.
//!
//! A `2N`-way tensor of shape `I_1×…×I_N×I_1×…×I_N` is identified with a
//! `P×P` matrix, `P = Π I_i`, by grouping the first and last `N` indices
//! row-major. Under this grouping `⋆_N` is the matrix product, so MTIs are
//! evaluated as matrix MOIs of the unfoldings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrand::MultivariateFunction;
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::HermitianOperator;
use crate::moi::evaluate_hermitian;

/// Row-major dense tensor. The empty shape is a scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Build from a function of the multi-index, visited in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> Complex64) -> Self {
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self { shape, data }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.shape.len());
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| {
            assert!(i < n, "index {i} out of range {n}");
            acc * n + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    /// Frobenius norm `⟨T, T⟩^{1/2}`.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨A, B⟩ = Σ conj(A) B`.
    pub fn inner(&self, other: &Tensor) -> Result<Complex64> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// Conjugate and move the first `split` indices behind the rest. For a
    /// `2N`-way tensor with `split = N` this is the Hermitian transpose; for
    /// `𝒰 ∈ ℂ^{I_1×…×I_N×1}` with `split = N` it gives `𝒰^H ∈ ℂ^{1×I_1×…×I_N}`.
    pub fn conj_swap(&self, split: usize) -> Tensor {
        assert!(split <= self.shape.len());
        let (head, tail) = self.shape.split_at(split);
        let p: usize = head.iter().product();
        let q: usize = tail.iter().product();
        let mut shape = tail.to_vec();
        shape.extend_from_slice(head);
        let mut data = vec![Complex64::new(0.0, 0.0); p * q];
        for r in 0..p {
            for c in 0..q {
                data[c * p + r] = self.data[r * q + c].conj();
            }
        }
        Tensor { shape, data }
    }

    /// Append a trailing unit mode.
    pub fn as_column(&self) -> Tensor {
        let mut shape = self.shape.clone();
        shape.push(1);
        Tensor {
            shape,
            data: self.data.clone(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!("{:?} vs {:?}", self.shape, other.shape)));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// View as a `rows × cols` matrix with row-major grouping; `rows` is the
    /// product of the first `split` dims.
    pub fn to_matrix(&self, split: usize) -> ComplexMatrix {
        let p: usize = self.shape[..split].iter().product();
        let q: usize = self.shape[split..].iter().product();
        ComplexMatrix::from_fn(p, q, |r, c| self.data[r * q + c])
    }

    pub fn from_matrix(m: &ComplexMatrix, shape: Vec<usize>) -> Result<Tensor> {
        let len: usize = shape.iter().product();
        if len != m.nrows() * m.ncols() {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot fold to {shape:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        let q = m.ncols();
        let mut data = vec![Complex64::new(0.0, 0.0); len];
        for r in 0..m.nrows() {
            for c in 0..q {
                data[r * q + c] = m[(r, c)];
            }
        }
        Tensor::new(shape, data)
    }
}

/// `A ⋆_k B`: contract the trailing `k` modes of `A` with the leading `k`
/// modes of `B`.
pub fn star_k(a: &Tensor, b: &Tensor, k: usize) -> Result<Tensor> {
    if k > a.shape.len() || k > b.shape.len() {
        return Err(Error::Dimension(format!(
            "cannot contract {k} modes of {:?} and {:?}",
            a.shape, b.shape
        )));
    }
    let split = a.shape.len() - k;
    if a.shape[split..] != b.shape[..k] {
        return Err(Error::Dimension(format!(
            "trailing modes {:?} of A differ from leading modes {:?} of B",
            &a.shape[split..],
            &b.shape[..k]
        )));
    }
    let prod = a.to_matrix(split) * b.to_matrix(k);
    let mut shape = a.shape[..split].to_vec();
    shape.extend_from_slice(&b.shape[k..]);
    Tensor::from_matrix(&prod, shape)
}

/// Tolerance on `|H - H^H|` entrywise, relative to `max(1, max|H|)`.
pub const TENSOR_HERMITIAN_TOL: f64 = 1e-12;

/// A `2N`-way tensor equal to its Hermitian transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianTensor {
    mode_dims: Vec<usize>,
    tensor: Tensor,
}

impl HermitianTensor {
    /// Validate conjugate symmetry and store the exact Hermitian part.
    pub fn new(mode_dims: Vec<usize>, tensor: Tensor) -> Result<Self> {
        if mode_dims.is_empty() || mode_dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid mode dims {mode_dims:?}")));
        }
        let mut expected = mode_dims.clone();
        expected.extend_from_slice(&mode_dims);
        if tensor.shape != expected {
            return Err(Error::Dimension(format!(
                "tensor shape {:?}, expected {expected:?}",
                tensor.shape
            )));
        }
        if let Some(p) = tensor.data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: p / mode_dims.iter().product::<usize>(),
                col: p % mode_dims.iter().product::<usize>(),
            });
        }
        let n = mode_dims.len();
        let h = tensor.conj_swap(n);
        let scale = tensor.data.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        let p: usize = mode_dims.iter().product();
        let mut worst = (0, 0.0_f64);
        for (i, (a, b)) in tensor.data.iter().zip(&h.data).enumerate() {
            let d = (a - b).norm();
            if d > worst.1 {
                worst = (i, d);
            }
        }
        if worst.1 > TENSOR_HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian {
                row: worst.0 / p,
                col: worst.0 % p,
                asymmetry: worst.1,
            });
        }
        let data = tensor
            .data
            .iter()
            .zip(&h.data)
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        Ok(Self {
            mode_dims,
            tensor: Tensor {
                shape: expected,
                data,
            },
        })
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    /// `Π I_i`.
    pub fn size(&self) -> usize {
        self.mode_dims.iter().product()
    }

    /// The `P×P` unfolding as a Hermitian operator.
    pub fn unfold(&self) -> Result<HermitianOperator> {
        HermitianOperator::new(self.unfold_matrix())
    }

    pub fn unfold_matrix(&self) -> ComplexMatrix {
        self.tensor.to_matrix(self.mode_dims.len())
    }

    pub fn identity(mode_dims: Vec<usize>) -> Self {
        let p: usize = mode_dims.iter().product();
        fold(&crate::linalg::matrix::identity(p), &mode_dims).expect("identity is Hermitian")
    }
}

/// Inverse of [`HermitianTensor::unfold`].
pub fn fold(m: &ComplexMatrix, mode_dims: &[usize]) -> Result<HermitianTensor> {
    let p: usize = mode_dims.iter().product();
    if m.nrows() != p || m.ncols() != p {
        return Err(Error::Dimension(format!(
            "{}x{} matrix cannot fold to modes {mode_dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut shape = mode_dims.to_vec();
    shape.extend_from_slice(mode_dims);
    HermitianTensor::new(mode_dims.to_vec(), Tensor::from_matrix(m, shape)?)
}

/// Fold a general `P×P` matrix to a `2N`-way tensor.
pub fn fold_general(m: &ComplexMatrix, mode_dims: &[usize]) -> Result<Tensor> {
    let mut shape = mode_dims.to_vec();
    shape.extend_from_slice(mode_dims);
    Tensor::from_matrix(m, shape)
}

#[derive(Debug, Clone)]
pub struct TensorEigenSystem {
    pub mode_dims: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Unit-norm eigentensors of shape `mode_dims`.
    pub eigentensors: Vec<Tensor>,
}

impl TensorEigenSystem {
    pub fn is_positive_semidefinite(&self) -> bool {
        self.eigenvalues.iter().all(|&l| l >= -1e-10)
    }

    /// `Σ λ_i 𝒰_i ⋆_1 𝒰_i^H`.
    pub fn reconstruct(&self) -> Result<Tensor> {
        let n = self.mode_dims.len();
        let mut shape = self.mode_dims.clone();
        shape.extend_from_slice(&self.mode_dims);
        let mut acc = Tensor::zeros(shape);
        for (&l, u) in self.eigenvalues.iter().zip(&self.eigentensors) {
            let col = u.as_column();
            let proj = star_k(&col, &col.conj_swap(n), 1)?;
            acc = acc.add(&proj.scale(Complex64::new(l, 0.0)))?;
        }
        Ok(acc)
    }
}

pub fn tensor_eigendecompose(h: &HermitianTensor) -> Result<TensorEigenSystem> {
    let op = h.unfold()?;
    let s = op.spectral()?;
    let p = h.size();
    let eigentensors = (0..p)
        .map(|i| {
            let col: Vec<Complex64> = s.basis().column(i).iter().copied().collect();
            Tensor::new(h.mode_dims.clone(), col)
        })
        .collect::<Result<_>>()?;
    Ok(TensorEigenSystem {
        mode_dims: h.mode_dims.clone(),
        eigenvalues: s.real_eigenvalues(),
        eigentensors,
    })
}

/// `Σ ψ(λ…) 𝒫_{1,i_1} ⋆_N 𝒳_1 ⋆_N ⋯ ⋆_N 𝒫_{m,i_m}` via unfolding.
pub fn mti_evaluate(
    tensors: &[&HermitianTensor],
    psi: &MultivariateFunction,
    args: &[&Tensor],
) -> Result<Tensor> {
    let first = tensors
        .first()
        .ok_or_else(|| Error::Dimension("no tensors".into()))?;
    let modes = first.mode_dims.clone();
    if let Some(t) = tensors.iter().find(|t| t.mode_dims != modes) {
        return Err(Error::Dimension(format!(
            "mode dims {:?} and {:?}",
            modes, t.mode_dims
        )));
    }
    let mut arg_shape = modes.clone();
    arg_shape.extend_from_slice(&modes);
    let mut mats = Vec::with_capacity(args.len());
    for x in args {
        if x.shape != arg_shape {
            return Err(Error::Dimension(format!(
                "argument shape {:?}, expected {arg_shape:?}",
                x.shape
            )));
        }
        mats.push(x.to_matrix(modes.len()));
    }
    let ops = tensors.iter().map(|t| t.unfold()).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&HermitianOperator> = ops.iter().collect();
    let value = evaluate_hermitian(&refs, psi, &mats)?;
    fold_general(&value, &modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn vector_contraction_is_scalar() {
        let u = Tensor::new(vec![3], vec![c(1.0), c(2.0), c(3.0)]).unwrap();
        let v = Tensor::new(vec![3], vec![c(-1.0), c(0.5), c(2.0)]).unwrap();
        let s = star_k(&u, &v, 1).unwrap();
        assert!(s.shape().is_empty());
        assert_eq!(s.data()[0], c(6.0));
    }

    #[test]
    fn order_two_contraction_is_matrix_product() {
        let a = matrix::from_real_rows(2, &[1.0, 2.0, 3.0, 4.0]);
        let b = matrix::from_real_rows(2, &[0.0, 1.0, -1.0, 2.0]);
        let ta = Tensor::from_matrix(&a, vec![2, 2]).unwrap();
        let tb = Tensor::from_matrix(&b, vec![2, 2]).unwrap();
        let p = star_k(&ta, &tb, 1).unwrap();
        assert_eq!(p.to_matrix(1), a * b);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Tensor::zeros(vec![2, 3]);
        let b = Tensor::zeros(vec![2, 2]);
        assert!(star_k(&a, &b, 1).is_err());
    }

    #[test]
    fn rank_one_unfolds_to_outer_product() {
        let u = Tensor::new(vec![2, 2], vec![c(0.5), Complex64::new(0.0, 0.5), c(-0.5), c(0.5)]).unwrap();
        let col = u.as_column();
        let h = star_k(&col, &col.conj_swap(2), 1).unwrap();
        let ht = HermitianTensor::new(vec![2, 2], h).unwrap();
        let v = ComplexMatrix::from_column_slice(4, 1, u.data());
        let expected = &v * v.adjoint();
        assert!(matrix::max_abs(&(ht.unfold_matrix() - &expected)) < 1e-15);
        let sys = tensor_eigendecompose(&ht).unwrap();
        assert!((sys.eigenvalues[3] - 1.0).abs() < 1e-12);
        assert!(sys.eigenvalues[..3].iter().all(|l| l.abs() < 1e-12));
        assert!(sys.is_positive_semidefinite());
    }

    #[test]
    fn identity_tensor_spectrum() {
        let h = HermitianTensor::identity(vec![2, 3]);
        let sys = tensor_eigendecompose(&h).unwrap();
        assert_eq!(sys.eigenvalues.len(), 6);
        assert!(sys.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_hermitian_tensor_rejected() {
        let m = matrix::from_real_rows(2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(fold(&m, &[2]).is_err());
    }

    #[test]
    fn mode_one_round_trip() {
        let m = matrix::from_real_rows(2, &[1.0, 2.0, 2.0, 1.0]);
        let h = fold(&m, &[2]).unwrap();
        assert_eq!(h.unfold().unwrap().matrix(), &m);
    }
}
