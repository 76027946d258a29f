//! Markov-type tail bounds for random MOIs, checked by Monte Carlo.
//!
//! Each sample draws its operators from `stream_rng(seed, i)`, computes the
//! statistic and the per-sample bound numerator `w` (with `stat ≤ w` by the
//! norm estimates), and the report compares `P̂(stat > θ)` with `E[w]/θ`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean_stderr, Estimate};
use crate::calculus::{
    adjacent_spread, factorial_f64, frechet_derivative, higher_difference, kth_derivative, sa_remainder,
    theta_sum, unitary_remainder, RemainderMethod, SeparableMultivariateFunction,
};
use crate::error::{Error, Result};
use crate::integrand::separable::{polynomial_divided_projective_bound, sup_norm_on_grid};
use crate::integrand::{integrand_from_divided_difference, MultivariateFunction, ScalarFunction};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::norms::{operator_norm, SchattenP};
use crate::linalg::random::{sample_random_hermitian, sample_random_unitary, stream_rng, RandomOperatorModel, SeededRng};
use crate::linalg::{HermitianOperator, SpectralDecomposition};
use crate::moi::{moi_norm_bound, NormMode};
use crate::schema::{self, ScalarFunctionSpec, SeparableIntegrandSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    MoiNormA,
    MoiNormSchattenB,
    FirstDerivative,
    KthDerivative,
    HigherDifference,
    SaRemainder,
    UnitaryRemainder,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::MoiNormA,
        TheoremId::MoiNormSchattenB,
        TheoremId::FirstDerivative,
        TheoremId::KthDerivative,
        TheoremId::HigherDifference,
        TheoremId::SaRemainder,
        TheoremId::UnitaryRemainder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::MoiNormA => "moi_norm_a",
            TheoremId::MoiNormSchattenB => "moi_norm_schatten_b",
            TheoremId::FirstDerivative => "first_derivative",
            TheoremId::KthDerivative => "kth_derivative",
            TheoremId::HigherDifference => "higher_difference",
            TheoremId::SaRemainder => "sa_remainder",
            TheoremId::UnitaryRemainder => "unitary_remainder",
        }
    }

    /// The norm-estimate bounds are stated for `≥ θ`, the derivative and
    /// remainder bounds for `> θ`.
    pub fn inclusive(self) -> bool {
        matches!(self, TheoremId::MoiNormA | TheoremId::MoiNormSchattenB)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentIntegrand {
    Separable { arity: usize, terms: Vec<Vec<ScalarFunctionSpec>> },
    Scalar { function: ScalarFunctionSpec },
    PerSlot { functions: Vec<ScalarFunctionSpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailBoundExperiment {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub theorem_id: TheoremId,
    pub operator_models: Vec<RandomOperatorModel>,
    /// `X_1..X_{m−1}`, `V`, `B` or `H_1..H_n` as the theorem requires.
    #[serde(default, with = "schema::matrix_list")]
    pub fixed_inputs: Vec<ComplexMatrix>,
    pub integrand: ExperimentIntegrand,
    /// `k` for the derivative, difference and remainder theorems.
    #[serde(default)]
    pub order: Option<usize>,
    /// Schatten exponents of the arguments for `moi_norm_schatten_b`.
    #[serde(default)]
    pub schatten_p: Option<Vec<f64>>,
    /// Configured `κ` for the fixed-κ form of the difference bound.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// `Υ_X ≥ ‖dX/dt‖`; defaults to `‖V‖`.
    #[serde(default)]
    pub upsilon: Option<f64>,
    pub theta_grid: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub theta: f64,
    pub empirical_prob: f64,
    pub mc_stderr: f64,
    pub bound_rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimate {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedKappaReport {
    pub kappa: f64,
    /// Samples whose measured spread reached `κ`.
    pub excluded: usize,
    pub included: usize,
    pub rows: Vec<TailRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub samples: usize,
    pub theorem_id: TheoremId,
    pub aborted: usize,
    /// `"≥"` or `">"`.
    pub event: String,
    /// `projective` (closed-form projective bound of polynomial divided
    /// differences or separable integrands, radii from realized spectra) or
    /// `sup_on_realized_spectra`.
    pub surrogate: String,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub rows: Vec<TailRow>,
    pub expectation_estimates: Vec<NamedEstimate>,
    /// `E[w]`, the bound numerator.
    pub bound_numerator: NamedEstimate,
    pub statistic: NamedEstimate,
    #[serde(default)]
    pub fixed_kappa: Option<FixedKappaReport>,
    pub metadata: ReportMetadata,
    pub all_satisfied: bool,
}

struct Sample {
    stat: f64,
    weight: f64,
    terms: Vec<f64>,
    kappa: Option<f64>,
}

enum Functions {
    Separable(MultivariateFunction),
    Scalar(ScalarFunction),
    PerSlot(SeparableMultivariateFunction),
}

struct Prepared {
    functions: Functions,
    term_names: Vec<String>,
    /// Coefficient of each expectation term in `w`, except for the measured-κ
    /// difference bound.
    coefficients: Vec<f64>,
    hermitian_inputs: Vec<HermitianOperator>,
    constants: BTreeMap<String, f64>,
    certified: bool,
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Parameter(msg()))
    }
}

fn hermitian_input(m: &ComplexMatrix) -> Result<HermitianOperator> {
    HermitianOperator::new(m.clone())
}

/// `‖f^[k]‖` over the realized spectra: the projective closed form for
/// polynomials, otherwise the sup over the eigenvalue grid.
pub fn divided_difference_norm(f: &ScalarFunction, k: usize, spectra: &[Vec<f64>]) -> Result<f64> {
    match f.as_polynomial() {
        Some(p) => {
            let radii: Vec<f64> = spectra
                .iter()
                .map(|s| s.iter().fold(0.0_f64, |m, x| m.max(x.abs())))
                .collect();
            Ok(polynomial_divided_projective_bound(p, k, &radii))
        }
        None => sup_norm_on_grid(&integrand_from_divided_difference(f, k)?, spectra),
    }
}

impl TailBoundExperiment {
    pub fn order_or_err(&self) -> Result<usize> {
        match self.order {
            Some(k) if k >= 1 => Ok(k),
            _ => Err(Error::Parameter(format!("{} needs order ≥ 1", self.theorem_id.name()))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        schema::check_version(self.schema_version)?;
        require(self.samples >= 1000, || format!("samples must be at least 1000, got {}", self.samples))?;
        require(!self.theta_grid.is_empty(), || "theta_grid is empty".into())?;
        for (i, t) in self.theta_grid.iter().enumerate() {
            require(t.is_finite() && *t > 0.0, || format!("theta_grid[{i}] = {t} must be positive"))?;
            if i > 0 {
                require(*t > self.theta_grid[i - 1], || format!("theta_grid not strictly increasing at {i}"))?;
            }
        }
        require(!self.operator_models.is_empty(), || "no operator models".into())?;
        for m in &self.operator_models {
            m.validate()?;
        }
        let dim = self.operator_models[0].dim;
        if let Some(m) = self.operator_models.iter().find(|m| m.dim != dim) {
            return Err(Error::Dimension(format!("model dims {dim} and {}", m.dim)));
        }
        if let Some(x) = self.fixed_inputs.iter().find(|x| x.nrows() != dim) {
            return Err(Error::Dimension(format!("fixed input is {}x{}, models are {dim}", x.nrows(), x.ncols())));
        }
        let m = self.operator_models.len();
        let inputs = self.fixed_inputs.len();
        use TheoremId::*;
        match self.theorem_id {
            MoiNormA | MoiNormSchattenB => {
                require(m >= 2, || format!("need at least 2 operator models, got {m}"))?;
                let ExperimentIntegrand::Separable { arity, .. } = &self.integrand else {
                    return Err(Error::Parameter("norm bounds need a separable integrand".into()));
                };
                if *arity != m {
                    return Err(Error::Dimension(format!("integrand arity {arity} but {m} operator models")));
                }
                require(inputs == m - 1, || format!("{inputs} fixed inputs, expected {}", m - 1))?;
                if self.theorem_id == MoiNormSchattenB {
                    let ps = self
                        .schatten_p
                        .as_ref()
                        .ok_or_else(|| Error::Parameter("schatten_p is required".into()))?;
                    require(ps.len() == m - 1, || format!("{} Schatten exponents, expected {}", ps.len(), m - 1))?;
                    let recip: f64 = ps.iter().map(|&p| SchattenP::new(p).map(|p| p.reciprocal())).sum::<Result<f64>>()?;
                    require(recip <= 1.0 + 1e-12, || format!("Σ 1/p_i = {recip} exceeds 1"))?;
                }
            }
            FirstDerivative | KthDerivative | HigherDifference => {
                require(m == 1, || format!("one operator model expected, got {m}"))?;
                require(inputs == 1, || format!("one fixed input expected, got {inputs}"))?;
                require(matches!(self.integrand, ExperimentIntegrand::Scalar { .. }), || {
                    "a scalar function integrand is required".into()
                })?;
                if self.theorem_id != FirstDerivative {
                    self.order_or_err()?;
                }
                if self.theorem_id != KthDerivative {
                    hermitian_input(&self.fixed_inputs[0])?;
                }
                if let Some(u) = self.upsilon {
                    let v = operator_norm(&self.fixed_inputs[0]);
                    require(u.is_finite() && u >= v, || format!("upsilon {u} is below ‖dX/dt‖ = {v}"))?;
                }
                if let Some(kappa) = self.kappa {
                    require(kappa.is_finite() && kappa > 0.0, || format!("kappa {kappa} must be positive"))?;
                }
            }
            SaRemainder | UnitaryRemainder => {
                self.order_or_err()?;
                let ExperimentIntegrand::PerSlot { functions } = &self.integrand else {
                    return Err(Error::Parameter("remainders need a per_slot integrand".into()));
                };
                require(functions.len() == m && inputs == m, || {
                    format!("{} functions and {inputs} perturbations for {m} operator models", functions.len())
                })?;
                for h in &self.fixed_inputs {
                    hermitian_input(h)?;
                }
                if self.theorem_id == UnitaryRemainder {
                    if let Some(j) = functions.iter().position(|f| !f.is_polynomial()) {
                        return Err(Error::Capability(format!(
                            "unitary remainders need polynomial functions; slot {j} is not"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn prepare(&self) -> Result<Prepared> {
        use TheoremId::*;
        let mut constants = BTreeMap::new();
        let mut term_names = Vec::new();
        let mut coefficients = Vec::new();
        let mut hermitian_inputs = Vec::new();
        let mut certified = true;
        let functions = match &self.integrand {
            ExperimentIntegrand::Separable { arity, terms } => Functions::Separable(MultivariateFunction::from_separable(
                SeparableIntegrandSpec {
                    arity: *arity,
                    terms: terms.clone(),
                }
                .build()?,
            )),
            ExperimentIntegrand::Scalar { function } => {
                certified = function.is_polynomial();
                Functions::Scalar(function.build()?)
            }
            ExperimentIntegrand::PerSlot { functions } => {
                certified = functions.iter().all(|f| f.is_polynomial());
                Functions::PerSlot(SeparableMultivariateFunction::per_slot(
                    functions.iter().map(|f| f.build()).collect::<Result<_>>()?,
                )?)
            }
        };
        let n = self.operator_models.len();
        match self.theorem_id {
            MoiNormA => {
                let prod: f64 = self.fixed_inputs.iter().map(operator_norm).product();
                constants.insert("prod_x_norm".into(), prod);
                term_names.push("psi_projective_norm".into());
                coefficients.push(prod);
            }
            MoiNormSchattenB => {
                let ps = self.schatten_p.as_ref().expect("validated");
                let prod: f64 = self
                    .fixed_inputs
                    .iter()
                    .zip(ps)
                    .map(|(x, &p)| SchattenP::new(p).map(|p| crate::linalg::norms::schatten_norm(x, p)))
                    .product::<Result<f64>>()?;
                let recip: f64 = ps.iter().map(|&p| SchattenP::new(p).map(|p| p.reciprocal())).sum::<Result<f64>>()?;
                constants.insert("prod_x_schatten_norm".into(), prod);
                constants.insert("q_reciprocal".into(), recip);
                term_names.push("psi_projective_norm".into());
                coefficients.push(prod);
            }
            FirstDerivative => {
                let v = operator_norm(&self.fixed_inputs[0]);
                let upsilon = self.upsilon.unwrap_or(v);
                constants.insert("upsilon".into(), upsilon);
                constants.insert("direction_norm".into(), v);
                term_names.push("divided_difference_norm_1".into());
                coefficients.push(upsilon);
            }
            KthDerivative => {
                let k = self.order_or_err()?;
                let b = operator_norm(&self.fixed_inputs[0]);
                constants.insert("b_norm".into(), b);
                constants.insert("order".into(), k as f64);
                term_names.push(format!("divided_difference_norm_{k}"));
                coefficients.push(factorial_f64(k) * b.powi(k as i32));
            }
            HigherDifference => {
                let k = self.order_or_err()?;
                let b = operator_norm(&self.fixed_inputs[0]);
                constants.insert("b_norm".into(), b);
                constants.insert("order".into(), k as f64);
                if let Some(kappa) = self.kappa {
                    constants.insert("kappa".into(), kappa);
                }
                hermitian_inputs.push(hermitian_input(&self.fixed_inputs[0])?);
                term_names.push(format!("divided_difference_norm_{k}"));
                coefficients.push(k as f64 * b.powi(k as i32));
            }
            SaRemainder => {
                let k = self.order_or_err()?;
                constants.insert("order".into(), k as f64);
                constants.insert("slots".into(), n as f64);
                for (j, h) in self.fixed_inputs.iter().enumerate() {
                    let hn = operator_norm(h);
                    constants.insert(format!("h_norm_{j}"), hn);
                    hermitian_inputs.push(hermitian_input(h)?);
                    term_names.push(format!("slot_{j}_divided_difference_norm_{k}"));
                    coefficients.push(n as f64 * hn.powi(k as i32));
                }
            }
            UnitaryRemainder => {
                let k = self.order_or_err()?;
                constants.insert("order".into(), k as f64);
                constants.insert("slots".into(), n as f64);
                for (j, h) in self.fixed_inputs.iter().enumerate() {
                    let hn = operator_norm(h);
                    constants.insert(format!("h_norm_{j}"), hn);
                    hermitian_inputs.push(hermitian_input(h)?);
                    for l in 1..=k {
                        let theta = theta_sum(hn, k, l)?;
                        constants.insert(format!("Theta_{j}_{k}_{l}"), theta);
                        term_names.push(format!("slot_{j}_divided_difference_norm_{l}"));
                        coefficients.push((k * n) as f64 * theta);
                    }
                }
            }
        }
        Ok(Prepared {
            functions,
            term_names,
            coefficients,
            hermitian_inputs,
            constants,
            certified,
        })
    }

    fn sample(&self, prep: &Prepared, rng: &mut SeededRng) -> Result<Sample> {
        use TheoremId::*;
        let real = |s: &SpectralDecomposition| s.real_eigenvalues();
        let dot = |terms: &[f64]| terms.iter().zip(&prep.coefficients).map(|(t, c)| t * c).sum::<f64>();
        match (self.theorem_id, &prep.functions) {
            (MoiNormA | MoiNormSchattenB, Functions::Separable(psi)) => {
                let ops: Vec<HermitianOperator> = self
                    .operator_models
                    .iter()
                    .map(|m| sample_random_hermitian(m, rng))
                    .collect::<Result<_>>()?;
                let spectra: Vec<&SpectralDecomposition> = ops.iter().map(|o| o.spectral()).collect::<Result<_>>()?;
                let mode = match &self.schatten_p {
                    Some(ps) if self.theorem_id == MoiNormSchattenB => NormMode::Schatten(ps.clone()),
                    _ => NormMode::Operator,
                };
                let nb = moi_norm_bound(psi, &spectra, &self.fixed_inputs, &mode)?;
                Ok(Sample {
                    stat: nb.actual,
                    weight: nb.bound,
                    terms: vec![nb.projective_norm],
                    kappa: None,
                })
            }
            (FirstDerivative, Functions::Scalar(f)) => {
                let a = sample_random_hermitian(&self.operator_models[0], rng)?;
                let d = frechet_derivative(f, &a, &self.fixed_inputs[0])?;
                let s = real(a.spectral()?);
                let norm = divided_difference_norm(f, 1, &[s.clone(), s])?;
                Ok(Sample {
                    stat: operator_norm(&d),
                    weight: dot(&[norm]),
                    terms: vec![norm],
                    kappa: None,
                })
            }
            (KthDerivative, Functions::Scalar(f)) => {
                let k = self.order_or_err()?;
                let a = sample_random_hermitian(&self.operator_models[0], rng)?;
                let d = kth_derivative(f, &a, &self.fixed_inputs[0], k)?;
                let norm = divided_difference_norm(f, k, &vec![real(a.spectral()?); k + 1])?;
                Ok(Sample {
                    stat: operator_norm(&d),
                    weight: dot(&[norm]),
                    terms: vec![norm],
                    kappa: None,
                })
            }
            (HigherDifference, Functions::Scalar(f)) => {
                let k = self.order_or_err()?;
                let a = sample_random_hermitian(&self.operator_models[0], rng)?;
                let b = &prep.hermitian_inputs[0];
                let d = higher_difference(f, &a, b, k)?;
                let spectra: Vec<Vec<f64>> = (0..=k)
                    .map(|i| a.add_scaled(b.matrix(), i as f64).and_then(|o| o.spectral().map(real)))
                    .collect::<Result<_>>()?;
                let norm = divided_difference_norm(f, k, &spectra)?;
                let kappa = adjacent_spread(&a, b, k)?;
                Ok(Sample {
                    stat: operator_norm(&d),
                    weight: kappa * prep.coefficients[0] * norm,
                    terms: vec![norm],
                    kappa: Some(kappa),
                })
            }
            (SaRemainder, Functions::PerSlot(f)) => {
                let k = self.order_or_err()?;
                let xs: Vec<HermitianOperator> = self
                    .operator_models
                    .iter()
                    .map(|m| sample_random_hermitian(m, rng))
                    .collect::<Result<_>>()?;
                let r = sa_remainder(f, &xs, &prep.hermitian_inputs, k, RemainderMethod::Moi)?;
                let mut terms = Vec::with_capacity(xs.len());
                for ((j, phi), (x, h)) in f.terms().iter().zip(xs.iter().zip(&prep.hermitian_inputs)) {
                    debug_assert_eq!(*j, terms.len());
                    let mut spectra = vec![real(x.add(h)?.spectral()?)];
                    spectra.extend(std::iter::repeat_n(real(x.spectral()?), k));
                    terms.push(divided_difference_norm(phi, k, &spectra)?);
                }
                Ok(Sample {
                    stat: operator_norm(&r),
                    weight: dot(&terms),
                    terms,
                    kappa: None,
                })
            }
            (UnitaryRemainder, Functions::PerSlot(f)) => {
                let k = self.order_or_err()?;
                let xs = self
                    .operator_models
                    .iter()
                    .map(|m| sample_random_unitary(m, rng))
                    .collect::<Result<Vec<_>>>()?;
                let q = unitary_remainder(f, &xs, &prep.hermitian_inputs, k, RemainderMethod::Moi)?;
                let mut terms = Vec::new();
                for (_, phi) in f.terms() {
                    let p = phi.as_polynomial().expect("validated polynomial");
                    for l in 1..=k {
                        // unitary spectra lie on the unit circle
                        terms.push(polynomial_divided_projective_bound(p, l, &vec![1.0; l + 1]));
                    }
                }
                Ok(Sample {
                    stat: operator_norm(&q),
                    weight: dot(&terms),
                    terms,
                    kappa: None,
                })
            }
            _ => unreachable!("integrand kind checked by validate"),
        }
    }
}

fn tail_rows(stats: &[f64], weights: &[f64], thetas: &[f64], inclusive: bool) -> (Vec<TailRow>, Estimate) {
    let n = stats.len() as f64;
    let w = mean_stderr(weights);
    let rows = thetas
        .iter()
        .map(|&theta| {
            let hits = stats.iter().filter(|&&s| if inclusive { s >= theta } else { s > theta }).count();
            let p = hits as f64 / n;
            let bound_rhs = w.mean / theta;
            let mc_stderr = (p * (1.0 - p) / n + (w.stderr / theta).powi(2)).sqrt();
            TailRow {
                theta,
                empirical_prob: p,
                mc_stderr,
                bound_rhs,
                satisfied: p <= bound_rhs + 3.0 * mc_stderr,
            }
        })
        .collect();
    (rows, w)
}

fn named(name: &str, e: Estimate) -> NamedEstimate {
    NamedEstimate {
        name: name.into(),
        mean: e.mean,
        stderr: e.stderr,
    }
}

pub fn run_tail_bound(exp: &TailBoundExperiment) -> Result<TailBoundReport> {
    exp.validate()?;
    let prep = exp.prepare()?;
    let results: Vec<Result<Sample>> = (0..exp.samples as u64)
        .into_par_iter()
        .map(|i| exp.sample(&prep, &mut stream_rng(exp.seed, i)))
        .collect();
    let aborted = results.iter().filter(|r| r.is_err()).count();
    if aborted * 100 > exp.samples {
        let first = results
            .iter()
            .find_map(|r| r.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        return Err(Error::TooManyAborted {
            aborted,
            total: exp.samples,
            first,
        });
    }
    let samples: Vec<Sample> = results.into_iter().filter_map(|r| r.ok()).collect();
    let stats: Vec<f64> = samples.iter().map(|s| s.stat).collect();
    let weights: Vec<f64> = samples.iter().map(|s| s.weight).collect();
    let inclusive = exp.theorem_id.inclusive();
    let (rows, w) = tail_rows(&stats, &weights, &exp.theta_grid, inclusive);

    let expectation_estimates = prep
        .term_names
        .iter()
        .enumerate()
        .map(|(t, name)| {
            let xs: Vec<f64> = samples.iter().map(|s| s.terms[t]).collect();
            named(name, mean_stderr(&xs))
        })
        .collect();

    let fixed_kappa = match (exp.theorem_id, exp.kappa) {
        (TheoremId::HigherDifference, Some(kappa)) => {
            let kept: Vec<&Sample> = samples.iter().filter(|s| s.kappa.is_some_and(|k| k < kappa)).collect();
            let st: Vec<f64> = kept.iter().map(|s| s.stat).collect();
            let wt: Vec<f64> = kept.iter().map(|s| kappa * prep.coefficients[0] * s.terms[0]).collect();
            let rows = if kept.is_empty() { Vec::new() } else { tail_rows(&st, &wt, &exp.theta_grid, false).0 };
            Some(FixedKappaReport {
                kappa,
                excluded: samples.len() - kept.len(),
                included: kept.len(),
                rows,
            })
        }
        _ => None,
    };
    let mut constants = prep.constants.clone();
    if exp.theorem_id == TheoremId::HigherDifference {
        let ks: Vec<f64> = samples.iter().filter_map(|s| s.kappa).collect();
        let e = mean_stderr(&ks);
        constants.insert("measured_kappa_mean".into(), e.mean);
        constants.insert("measured_kappa_max".into(), ks.iter().cloned().fold(0.0, f64::max));
    }
    let all_satisfied = rows.iter().all(|r| r.satisfied)
        && fixed_kappa.as_ref().is_none_or(|f| f.rows.iter().all(|r| r.satisfied));
    Ok(TailBoundReport {
        schema_version: schema::SCHEMA_VERSION,
        rows,
        expectation_estimates,
        bound_numerator: named("bound_numerator", w),
        statistic: named("statistic", mean_stderr(&stats)),
        fixed_kappa,
        metadata: ReportMetadata {
            seed: exp.seed,
            samples: exp.samples,
            theorem_id: exp.theorem_id,
            aborted,
            event: if inclusive { "≥".into() } else { ">".into() },
            surrogate: if prep.certified { "projective".into() } else { "sup_on_realized_spectra".into() },
            constants,
        },
        all_satisfied,
    })
}

/// [`run_tail_bound`] on a dedicated pool of `workers` threads.
pub fn run_tail_bound_with_workers(exp: &TailBoundExperiment, workers: usize) -> Result<TailBoundReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    pool.install(|| run_tail_bound(exp))
}

impl TailBoundReport {
    /// One line per θ: `theta,empirical_prob,mc_stderr,bound_rhs,satisfied`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,empirical_prob,mc_stderr,bound_rhs,satisfied\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.theta, r.empirical_prob, r.mc_stderr, r.bound_rhs, r.satisfied
            ));
        }
        out
    }
}
