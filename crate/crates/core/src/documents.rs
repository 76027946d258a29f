//! Request and result documents exchanged as JSON files.
//!
//! Every document is a JSON object with a top-level `"kind"` naming its type
//! and `"schema_version": 1`. The payload fields are those of the Rust type.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::calculus::{
    adjacent_spread, compare_weighted_form, frechet_derivative, higher_difference, higher_difference_moi,
    kth_derivative, sa_remainder, unitary_remainder, RemainderFlavor, RemainderMethod, SeparableMultivariateFunction,
    WeightedFormComparison,
};
use crate::error::{Error, Result};
use crate::harness::{ConvergenceExperiment, ConvergenceReport, TailBoundExperiment, TailBoundReport};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::norms::operator_norm;
use crate::linalg::operator::unitarity_deviation;
use crate::linalg::random::{haar_matrix, stream_rng};
use crate::linalg::{HermitianOperator, SpectralDecomposition, UnitaryOperator};
use crate::moi::evaluate_spectral;
use crate::poly::decompose::PROBE_POINTS;
use crate::poly::monomial::for_each_grid_point;
use crate::poly::{decompose_inner_powers, to_linear_products, InnerPowerDecomposition, LinearProductForm, MonomialPolynomial};
use crate::schema::{self, IntegrandSpec, ScalarFunctionSpec};
use crate::tensor::{mti_evaluate, HermitianTensor, Tensor};

/// A JSON document type with a fixed `"kind"` tag.
pub trait Document: Serialize + DeserializeOwned {
    const KIND: &'static str;

    fn schema_version(&self) -> u32;

    /// Every structural problem found without running the computation.
    fn problems(&self) -> Vec<Error> {
        Vec::new()
    }

    /// Counts reported by `validate` for a valid document.
    fn summary(&self) -> BTreeMap<String, usize> {
        BTreeMap::new()
    }

    /// The first problem, if any.
    fn check(&self) -> Result<()> {
        schema::check_version(self.schema_version())?;
        match self.problems().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Serialize with the `"kind"` tag.
pub fn to_value<D: Document>(doc: &D) -> Result<Value> {
    let mut v = serde_json::to_value(doc).map_err(|e| Error::Schema(e.to_string()))?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("kind".into(), Value::String(D::KIND.into()));
            Ok(v)
        }
        None => Err(Error::Schema(format!("{} does not serialize to an object", D::KIND))),
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<D: Document>(doc: &D) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_value(doc)?).map_err(|e| Error::Schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parse a document of type `D`. A `"kind"` field, when present, must be
/// `D::KIND`.
pub fn from_json<D: Document>(text: &str) -> Result<D> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema(format!("invalid JSON: {e}")))?;
    from_document_value(value)
}

pub fn from_document_value<D: Document>(mut value: Value) -> Result<D> {
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::Schema("a document must be a JSON object".into()))?;
    if let Some(kind) = map.remove("kind") {
        if kind.as_str() != Some(D::KIND) {
            return Err(Error::Schema(format!("at kind: expected \"{}\", found {kind}", D::KIND)));
        }
    }
    schema::from_value(value)
}

fn counts(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn label_err(label: &str, e: Error) -> Error {
    match e {
        Error::Dimension(m) => Error::Dimension(format!("{label}: {m}")),
        Error::Parameter(m) => Error::Parameter(format!("{label}: {m}")),
        Error::Schema(m) => Error::Schema(format!("{label}: {m}")),
        Error::Capability(m) => Error::Capability(format!("{label}: {m}")),
        Error::NotHermitian { .. } | Error::NotUnitary { .. } | Error::NonFinite { .. } => {
            Error::Parameter(format!("{label}: {e}"))
        }
        other => other,
    }
}

fn hermitian(label: &str, m: &ComplexMatrix) -> Result<HermitianOperator> {
    HermitianOperator::new(m.clone()).map_err(|e| label_err(label, e))
}

fn unitary(label: &str, m: &ComplexMatrix) -> Result<UnitaryOperator> {
    UnitaryOperator::new(m.clone()).map_err(|e| label_err(label, e))
}

fn same_dim(label: &str, m: &ComplexMatrix, n: usize, out: &mut Vec<Error>) {
    if m.nrows() != n || m.ncols() != n {
        out.push(Error::Dimension(format!("{label} is {}x{}, expected {n}x{n}", m.nrows(), m.ncols())));
    }
}

fn build_function(label: &str, f: &ScalarFunctionSpec, out: &mut Vec<Error>) {
    if let Err(e) = f.build() {
        out.push(label_err(label, e));
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    #[default]
    Hermitian,
    Unitary,
}

/// `T^{A_1,…,A_m}_ψ(X_1,…,X_{m−1})`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoiRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub operator_kind: OperatorKind,
    #[serde(with = "schema::matrix_list")]
    pub operators: Vec<ComplexMatrix>,
    pub integrand: IntegrandSpec,
    #[serde(default, with = "schema::matrix_list")]
    pub arguments: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoiResultDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub value: ComplexMatrix,
    pub eigen_tuple_count: u64,
    pub wall_time_s: f64,
}

impl Document for MoiRequestDoc {
    const KIND: &'static str = "moi_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let m = self.operators.len();
        if m == 0 {
            out.push(Error::Dimension("no operators".into()));
            return out;
        }
        let n = self.operators[0].nrows();
        for (i, a) in self.operators.iter().enumerate() {
            let label = format!("operators[{i}]");
            same_dim(&label, a, n, &mut out);
            let r = match self.operator_kind {
                OperatorKind::Hermitian => hermitian(&label, a).map(|_| ()),
                OperatorKind::Unitary => unitary(&label, a).map(|_| ()),
            };
            if let Err(e) = r {
                out.push(e);
            }
        }
        if self.integrand.arity() != m {
            out.push(Error::Dimension(format!("integrand arity {} but {m} operators", self.integrand.arity())));
        }
        if self.arguments.len() + 1 != m {
            out.push(Error::Dimension(format!("{} arguments for {m} operators, expected {}", self.arguments.len(), m - 1)));
        }
        for (i, x) in self.arguments.iter().enumerate() {
            same_dim(&format!("arguments[{i}]"), x, n, &mut out);
        }
        if let Err(e) = self.integrand.build() {
            out.push(label_err("integrand", e));
        }
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("operators", self.operators.len()),
            ("dim", self.operators.first().map_or(0, |a| a.nrows())),
            ("arguments", self.arguments.len()),
        ])
    }
}

impl Document for MoiResultDoc {
    const KIND: &'static str = "moi_result";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.value.nrows())])
    }
}

impl MoiRequestDoc {
    pub fn run(&self) -> Result<MoiResultDoc> {
        self.check()?;
        let start = Instant::now();
        let spectra: Vec<SpectralDecomposition> = self
            .operators
            .iter()
            .map(|a| match self.operator_kind {
                OperatorKind::Hermitian => SpectralDecomposition::hermitian(a),
                OperatorKind::Unitary => SpectralDecomposition::unitary(a),
            })
            .collect::<Result<_>>()?;
        let refs: Vec<&SpectralDecomposition> = spectra.iter().collect();
        let psi = self.integrand.build()?;
        let value = evaluate_spectral(&refs, &psi, &self.arguments)?;
        let n = self.operators[0].nrows() as u64;
        Ok(MoiResultDoc {
            schema_version: schema::SCHEMA_VERSION,
            value,
            eigen_tuple_count: n.pow(refs.len() as u32),
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// A single matrix answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixResultDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub value: ComplexMatrix,
    pub norm: f64,
}

impl MatrixResultDoc {
    pub fn new(value: ComplexMatrix) -> Self {
        Self {
            schema_version: schema::SCHEMA_VERSION,
            norm: operator_norm(&value),
            value,
        }
    }
}

impl Document for MatrixResultDoc {
    const KIND: &'static str = "matrix_result";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.value.nrows())])
    }
}

/// `d/dt f(A + tV)|_{t=0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrechetRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub operator: ComplexMatrix,
    #[serde(with = "schema::matrix")]
    pub direction: ComplexMatrix,
    pub function: ScalarFunctionSpec,
}

impl Document for FrechetRequestDoc {
    const KIND: &'static str = "frechet_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if let Err(e) = hermitian("operator", &self.operator) {
            out.push(e);
        }
        same_dim("direction", &self.direction, self.operator.nrows(), &mut out);
        build_function("function", &self.function, &mut out);
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.operator.nrows())])
    }
}

impl FrechetRequestDoc {
    pub fn run(&self) -> Result<MatrixResultDoc> {
        self.check()?;
        let a = HermitianOperator::new(self.operator.clone())?;
        Ok(MatrixResultDoc::new(frechet_derivative(&self.function.build()?, &a, &self.direction)?))
    }
}

/// `d^k/dt^k f(A + tB)|_{t=0}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KthDerivativeRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub operator: ComplexMatrix,
    #[serde(with = "schema::matrix")]
    pub direction: ComplexMatrix,
    pub function: ScalarFunctionSpec,
    pub order: usize,
}

impl Document for KthDerivativeRequestDoc {
    const KIND: &'static str = "kth_derivative_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if let Err(e) = hermitian("operator", &self.operator) {
            out.push(e);
        }
        same_dim("direction", &self.direction, self.operator.nrows(), &mut out);
        build_function("function", &self.function, &mut out);
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.operator.nrows()), ("order", self.order)])
    }
}

impl KthDerivativeRequestDoc {
    pub fn run(&self) -> Result<MatrixResultDoc> {
        self.check()?;
        let a = HermitianOperator::new(self.operator.clone())?;
        Ok(MatrixResultDoc::new(kth_derivative(
            &self.function.build()?,
            &a,
            &self.direction,
            self.order,
        )?))
    }
}

/// `Δ^k_B f(A) = Σ_j (−1)^{k−j} C(k,j) f(A + jB)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HigherDifferenceRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub operator: ComplexMatrix,
    #[serde(with = "schema::matrix")]
    pub direction: ComplexMatrix,
    pub function: ScalarFunctionSpec,
    pub order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HigherDifferenceResultDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    /// The binomial sum.
    #[serde(with = "schema::matrix")]
    pub value: ComplexMatrix,
    pub norm: f64,
    /// `‖binomial sum − k! T^{A,A+B,…,A+kB}_{f^[k]}(B,…,B)‖`.
    pub moi_residual: f64,
    /// Largest eigenvalue displacement between consecutive `A + jB`.
    pub adjacent_spread: f64,
    /// The `(λ_{j+1} − λ_j)`-weighted representation against the binomial sum.
    pub weighted_form: WeightedFormComparison,
}

impl Document for HigherDifferenceRequestDoc {
    const KIND: &'static str = "higher_difference_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        if let Err(e) = hermitian("operator", &self.operator) {
            out.push(e);
        }
        same_dim("direction", &self.direction, self.operator.nrows(), &mut out);
        if let Err(e) = hermitian("direction", &self.direction) {
            out.push(e);
        }
        if self.order == 0 {
            out.push(Error::Parameter("order must be at least 1".into()));
        }
        build_function("function", &self.function, &mut out);
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.operator.nrows()), ("order", self.order)])
    }
}

impl Document for HigherDifferenceResultDoc {
    const KIND: &'static str = "higher_difference_result";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.value.nrows())])
    }
}

impl HigherDifferenceRequestDoc {
    pub fn run(&self) -> Result<HigherDifferenceResultDoc> {
        self.check()?;
        let f = self.function.build()?;
        let a = HermitianOperator::new(self.operator.clone())?;
        let b = HermitianOperator::new(self.direction.clone())?;
        let k = self.order;
        let value = higher_difference(&f, &a, &b, k)?;
        let moi = higher_difference_moi(&f, &a, &b, k)?;
        Ok(HigherDifferenceResultDoc {
            schema_version: schema::SCHEMA_VERSION,
            norm: operator_norm(&value),
            moi_residual: operator_norm(&(&value - &moi)),
            adjacent_spread: adjacent_spread(&a, &b, k)?,
            weighted_form: compare_weighted_form(&f, &a, &b, k)?,
            value,
        })
    }
}

/// Taylor remainder of `Σ_j φ_j(X_j)` (self-adjoint) or `Σ_j φ_j(X_j)`
/// along `X_j → e^{ιH_j} X_j` (unitary).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub order: usize,
    pub flavor: RemainderFlavor,
    /// `φ_j`, one per slot.
    pub functions: Vec<ScalarFunctionSpec>,
    #[serde(with = "schema::matrix_list")]
    pub bases: Vec<ComplexMatrix>,
    #[serde(with = "schema::matrix_list")]
    pub perturbations: Vec<ComplexMatrix>,
    #[serde(default = "default_method")]
    pub method: RemainderMethod,
}

fn default_method() -> RemainderMethod {
    RemainderMethod::Moi
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RemainderResultDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    #[serde(with = "schema::matrix")]
    pub value: ComplexMatrix,
    pub norm: f64,
    pub method: RemainderMethod,
    /// `‖value − other method‖`.
    pub cross_check_residual: f64,
}

impl Document for RemainderRequestDoc {
    const KIND: &'static str = "remainder_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let n = self.functions.len();
        if n == 0 {
            out.push(Error::Dimension("no functions".into()));
        }
        if self.bases.len() != n || self.perturbations.len() != n {
            out.push(Error::Dimension(format!(
                "{n} functions, {} bases and {} perturbations",
                self.bases.len(),
                self.perturbations.len()
            )));
        }
        let dim = self.bases.first().map_or(0, |b| b.nrows());
        for (j, x) in self.bases.iter().enumerate() {
            let label = format!("bases[{j}]");
            same_dim(&label, x, dim, &mut out);
            let r = match self.flavor {
                RemainderFlavor::SelfAdjoint => hermitian(&label, x).map(|_| ()),
                RemainderFlavor::Unitary => unitary(&label, x).map(|_| ()),
            };
            if let Err(e) = r {
                out.push(e);
            }
        }
        for (j, h) in self.perturbations.iter().enumerate() {
            let label = format!("perturbations[{j}]");
            same_dim(&label, h, dim, &mut out);
            if let Err(e) = hermitian(&label, h) {
                out.push(e);
            }
        }
        for (j, f) in self.functions.iter().enumerate() {
            build_function(&format!("functions[{j}]"), f, &mut out);
            if self.flavor == RemainderFlavor::Unitary && !f.is_polynomial() {
                out.push(Error::Capability(format!(
                    "functions[{j}]: unitary remainders need polynomial functions"
                )));
            }
        }
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("slots", self.functions.len()),
            ("dim", self.bases.first().map_or(0, |b| b.nrows())),
            ("order", self.order),
        ])
    }
}

impl Document for RemainderResultDoc {
    const KIND: &'static str = "remainder_result";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.value.nrows())])
    }
}

impl RemainderRequestDoc {
    pub fn run(&self) -> Result<RemainderResultDoc> {
        self.check()?;
        let f = SeparableMultivariateFunction::per_slot(
            self.functions.iter().map(|f| f.build()).collect::<Result<_>>()?,
        )?;
        let hs: Vec<HermitianOperator> = self
            .perturbations
            .iter()
            .map(|h| HermitianOperator::new(h.clone()))
            .collect::<Result<_>>()?;
        let eval = |method| match self.flavor {
            RemainderFlavor::SelfAdjoint => {
                let xs: Vec<HermitianOperator> =
                    self.bases.iter().map(|x| HermitianOperator::new(x.clone())).collect::<Result<_>>()?;
                sa_remainder(&f, &xs, &hs, self.order, method)
            }
            RemainderFlavor::Unitary => {
                let xs: Vec<UnitaryOperator> =
                    self.bases.iter().map(|x| UnitaryOperator::new(x.clone())).collect::<Result<_>>()?;
                unitary_remainder(&f, &xs, &hs, self.order, method)
            }
        };
        let other = match self.method {
            RemainderMethod::Moi => RemainderMethod::Direct,
            RemainderMethod::Direct => RemainderMethod::Moi,
        };
        let value = eval(self.method)?;
        let check = eval(other)?;
        Ok(RemainderResultDoc {
            schema_version: schema::SCHEMA_VERSION,
            norm: operator_norm(&value),
            cross_check_residual: operator_norm(&(&value - &check)),
            method: self.method,
            value,
        })
    }
}

/// `{"mode_dims": [I_1..I_N], "entries": [[re, im], …]}`, a `2N`-way tensor of
/// shape `I_1×…×I_N×I_1×…×I_N`, entries row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorJson {
    pub mode_dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl TensorJson {
    pub fn from_tensor(mode_dims: &[usize], t: &Tensor) -> Self {
        Self {
            mode_dims: mode_dims.to_vec(),
            entries: t.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_tensor(&self) -> Result<Tensor> {
        if self.mode_dims.is_empty() || self.mode_dims.contains(&0) {
            return Err(Error::Dimension(format!("invalid mode dims {:?}", self.mode_dims)));
        }
        let mut shape = self.mode_dims.clone();
        shape.extend_from_slice(&self.mode_dims);
        Tensor::new(shape, self.entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }

    pub fn to_hermitian(&self) -> Result<HermitianTensor> {
        HermitianTensor::new(self.mode_dims.clone(), self.to_tensor()?)
    }
}

/// MTI over Hermitian tensors `𝓐_1..𝓐_m` with arguments `𝓧_1..𝓧_{m−1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MtiRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub tensors: Vec<TensorJson>,
    pub integrand: IntegrandSpec,
    #[serde(default)]
    pub arguments: Vec<TensorJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorResultDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub value: TensorJson,
}

impl Document for MtiRequestDoc {
    const KIND: &'static str = "mti_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        let m = self.tensors.len();
        if m == 0 {
            out.push(Error::Dimension("no tensors".into()));
            return out;
        }
        let modes = &self.tensors[0].mode_dims;
        for (i, t) in self.tensors.iter().enumerate() {
            if &t.mode_dims != modes {
                out.push(Error::Dimension(format!("tensors[{i}] mode dims {:?}, expected {modes:?}", t.mode_dims)));
            }
            if let Err(e) = t.to_hermitian() {
                out.push(label_err(&format!("tensors[{i}]"), e));
            }
        }
        for (i, x) in self.arguments.iter().enumerate() {
            if &x.mode_dims != modes {
                out.push(Error::Dimension(format!("arguments[{i}] mode dims {:?}, expected {modes:?}", x.mode_dims)));
            }
            if let Err(e) = x.to_tensor() {
                out.push(label_err(&format!("arguments[{i}]"), e));
            }
        }
        if self.integrand.arity() != m {
            out.push(Error::Dimension(format!("integrand arity {} but {m} tensors", self.integrand.arity())));
        }
        if self.arguments.len() + 1 != m {
            out.push(Error::Dimension(format!("{} arguments for {m} tensors, expected {}", self.arguments.len(), m - 1)));
        }
        if let Err(e) = self.integrand.build() {
            out.push(label_err("integrand", e));
        }
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("tensors", self.tensors.len()),
            ("modes", self.tensors.first().map_or(0, |t| t.mode_dims.len())),
            ("arguments", self.arguments.len()),
        ])
    }
}

impl Document for TensorResultDoc {
    const KIND: &'static str = "tensor_result";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        self.value.to_tensor().err().into_iter().collect()
    }
}

impl MtiRequestDoc {
    pub fn run(&self) -> Result<TensorResultDoc> {
        self.check()?;
        let tensors: Vec<HermitianTensor> = self.tensors.iter().map(|t| t.to_hermitian()).collect::<Result<_>>()?;
        let args: Vec<Tensor> = self.arguments.iter().map(|t| t.to_tensor()).collect::<Result<_>>()?;
        let trefs: Vec<&HermitianTensor> = tensors.iter().collect();
        let arefs: Vec<&Tensor> = args.iter().collect();
        let value = mti_evaluate(&trefs, &self.integrand.build()?, &arefs)?;
        Ok(TensorResultDoc {
            schema_version: schema::SCHEMA_VERSION,
            value: TensorJson::from_tensor(&self.tensors[0].mode_dims, &value),
        })
    }
}

/// Decompose a polynomial into inner-product powers and linear products.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDecomposeRequestDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub polynomial: MonomialPolynomial,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyDecompositionDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub seed: u64,
    pub decomposition: InnerPowerDecomposition,
    /// Number of inner-power terms of each degree `0..=deg`.
    pub term_counts: Vec<usize>,
    pub linear_products: LinearProductForm,
    /// `sup |linear products − inner powers|` over the probe grid.
    pub product_residual: f64,
}

impl Document for PolyDecomposeRequestDoc {
    const KIND: &'static str = "poly_decompose_request";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let p = &self.polynomial;
        let mut out = Vec::new();
        if p.arity() > crate::poly::decompose::MAX_ARITY {
            out.push(Error::Parameter(format!("arity {} exceeds {}", p.arity(), crate::poly::decompose::MAX_ARITY)));
        }
        if p.degree() > crate::poly::decompose::MAX_DEGREE {
            out.push(Error::Parameter(format!("degree {} exceeds {}", p.degree(), crate::poly::decompose::MAX_DEGREE)));
        }
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("arity", self.polynomial.arity()),
            ("degree", self.polynomial.degree()),
            ("terms", self.polynomial.terms().len()),
        ])
    }
}

impl Document for PolyDecompositionDoc {
    const KIND: &'static str = "poly_decomposition";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("inner_power_terms", self.decomposition.form.terms.len())])
    }
}

impl PolyDecomposeRequestDoc {
    pub fn run(&self) -> Result<PolyDecompositionDoc> {
        self.check()?;
        let mut rng = crate::linalg::random::rng_from_seed(self.seed);
        let decomposition = decompose_inner_powers(&self.polynomial, &mut rng)?;
        let linear_products = to_linear_products(&decomposition.form)?;
        let mut product_residual = 0.0_f64;
        for_each_grid_point(self.polynomial.arity(), PROBE_POINTS, |x| {
            product_residual = product_residual.max((linear_products.eval(x) - decomposition.form.eval(x)).abs());
        });
        let term_counts = (0..=self.polynomial.degree())
            .map(|i| decomposition.form.count_of_degree(i))
            .collect();
        Ok(PolyDecompositionDoc {
            schema_version: schema::SCHEMA_VERSION,
            seed: self.seed,
            decomposition,
            term_counts,
            linear_products,
            product_residual,
        })
    }
}

/// Haar-distributed unitaries, sample `i` drawn from stream `i` of `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarSamplesDoc {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub dim: usize,
    pub seed: u64,
    #[serde(with = "schema::matrix_list")]
    pub samples: Vec<ComplexMatrix>,
    pub max_unitarity_deviation: f64,
}

pub fn haar_samples(dim: usize, count: usize, seed: u64) -> Result<HaarSamplesDoc> {
    if dim == 0 {
        return Err(Error::Parameter("dim must be positive".into()));
    }
    let samples: Vec<ComplexMatrix> = (0..count as u64)
        .map(|i| haar_matrix(dim, &mut stream_rng(seed, i)))
        .collect::<Result<_>>()?;
    let max_unitarity_deviation = samples.iter().map(unitarity_deviation).fold(0.0, f64::max);
    Ok(HaarSamplesDoc {
        schema_version: schema::SCHEMA_VERSION,
        dim,
        seed,
        samples,
        max_unitarity_deviation,
    })
}

impl Document for HaarSamplesDoc {
    const KIND: &'static str = "haar_samples";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        let mut out = Vec::new();
        for (i, u) in self.samples.iter().enumerate() {
            same_dim(&format!("samples[{i}]"), u, self.dim, &mut out);
            if let Err(e) = unitary(&format!("samples[{i}]"), u) {
                out.push(e);
            }
        }
        out
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("dim", self.dim), ("samples", self.samples.len())])
    }
}

impl Document for TailBoundExperiment {
    const KIND: &'static str = "tail_bound_experiment";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        self.validate().err().into_iter().collect()
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("operator_models", self.operator_models.len()),
            ("fixed_inputs", self.fixed_inputs.len()),
            ("theta_points", self.theta_grid.len()),
            ("samples", self.samples),
        ])
    }
}

impl Document for TailBoundReport {
    const KIND: &'static str = "tail_bound_report";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        self.rows
            .iter()
            .filter(|r| !(0.0..=1.0).contains(&r.empirical_prob))
            .map(|r| Error::Parameter(format!("empirical_prob {} at theta {} outside [0, 1]", r.empirical_prob, r.theta)))
            .collect()
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[
            ("rows", self.rows.len()),
            ("satisfied_rows", self.rows.iter().filter(|r| r.satisfied).count()),
        ])
    }
}

impl Document for ConvergenceExperiment {
    const KIND: &'static str = "convergence_experiment";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn problems(&self) -> Vec<Error> {
        self.validate().err().into_iter().collect()
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("steps", self.steps), ("samples", self.samples), ("order", self.order)])
    }
}

impl Document for ConvergenceReport {
    const KIND: &'static str = "convergence_report";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }

    fn summary(&self) -> BTreeMap<String, usize> {
        counts(&[("rows", self.rows.len())])
    }
}

/// Output of `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationReport {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub ok: bool,
    /// `"ok"` or the number of problems found.
    pub status: String,
    pub document_kind: Option<String>,
    pub diagnostics: Vec<String>,
    pub summary: BTreeMap<String, usize>,
}

impl Document for ValidationReport {
    const KIND: &'static str = "validation_report";

    fn schema_version(&self) -> u32 {
        self.schema_version
    }
}

/// All document kinds `validate` recognizes.
pub const KINDS: [&str; 19] = [
    MoiRequestDoc::KIND,
    MoiResultDoc::KIND,
    MatrixResultDoc::KIND,
    FrechetRequestDoc::KIND,
    KthDerivativeRequestDoc::KIND,
    HigherDifferenceRequestDoc::KIND,
    HigherDifferenceResultDoc::KIND,
    RemainderRequestDoc::KIND,
    RemainderResultDoc::KIND,
    MtiRequestDoc::KIND,
    TensorResultDoc::KIND,
    PolyDecomposeRequestDoc::KIND,
    PolyDecompositionDoc::KIND,
    HaarSamplesDoc::KIND,
    TailBoundExperiment::KIND,
    TailBoundReport::KIND,
    ConvergenceExperiment::KIND,
    ConvergenceReport::KIND,
    ValidationReport::KIND,
];

fn report(kind: Option<String>, diagnostics: Vec<String>, summary: BTreeMap<String, usize>) -> ValidationReport {
    let ok = diagnostics.is_empty();
    ValidationReport {
        schema_version: schema::SCHEMA_VERSION,
        ok,
        status: if ok { "ok".into() } else { format!("{} problem(s)", diagnostics.len()) },
        document_kind: kind,
        diagnostics,
        summary: if ok { summary } else { BTreeMap::new() },
    }
}

fn check_as<D: Document>(value: Value) -> ValidationReport {
    match from_document_value::<D>(value) {
        Err(e) => report(Some(D::KIND.into()), vec![e.to_string()], BTreeMap::new()),
        Ok(doc) => {
            let mut diags = Vec::new();
            if let Err(e) = schema::check_version(doc.schema_version()) {
                diags.push(e.to_string());
            }
            diags.extend(doc.problems().into_iter().map(|e| e.to_string()));
            report(Some(D::KIND.into()), diags, doc.summary())
        }
    }
}

/// Schema and invariant diagnostics for any document, without running it.
pub fn validate_document(text: &str) -> ValidationReport {
    let value: Value = match serde_json::from_str(text) {
        Ok(v) => v,
        Err(e) => return report(None, vec![format!("invalid JSON: {e}")], BTreeMap::new()),
    };
    let kind = match value.get("kind").and_then(Value::as_str) {
        Some(k) => k.to_string(),
        None => {
            return report(
                None,
                vec![format!("missing string field \"kind\"; expected one of {}", KINDS.join(", "))],
                BTreeMap::new(),
            )
        }
    };
    macro_rules! dispatch {
        ($($t:ty),*) => {
            $(if kind == <$t>::KIND { return check_as::<$t>(value); })*
        };
    }
    dispatch!(
        MoiRequestDoc,
        MoiResultDoc,
        MatrixResultDoc,
        FrechetRequestDoc,
        KthDerivativeRequestDoc,
        HigherDifferenceRequestDoc,
        HigherDifferenceResultDoc,
        RemainderRequestDoc,
        RemainderResultDoc,
        MtiRequestDoc,
        TensorResultDoc,
        PolyDecomposeRequestDoc,
        PolyDecompositionDoc,
        HaarSamplesDoc,
        TailBoundExperiment,
        TailBoundReport,
        ConvergenceExperiment,
        ConvergenceReport,
        ValidationReport
    );
    report(
        Some(kind.clone()),
        vec![format!("unknown kind \"{kind}\"; expected one of {}", KINDS.join(", "))],
        BTreeMap::new(),
    )
}
