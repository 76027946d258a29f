//! Convergence in the r-th mean of `T^{A,…,A}_{f^[n−1]}(X̲)` under
//! `A → A + ε_m E`, `ε_m = ε₀/m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean_stderr;
use crate::error::{Error, Result};
use crate::linalg::matrix::ComplexMatrix;
use crate::linalg::random::{hermitian_with_norm, sample_random_hermitian, stream_rng, RandomOperatorModel};
use crate::moi::continuity_modulus;
use crate::schema::{self, ScalarFunctionSpec};

pub const MAX_STEPS: usize = 64;
/// The last mean must fall below this fraction of the first.
pub const DECAY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceExperiment {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub model: RandomOperatorModel,
    pub function: ScalarFunctionSpec,
    /// Number of operator slots `n`; the integrand is `f^[n−1]`.
    pub order: usize,
    /// The `n − 1` fixed arguments.
    #[serde(default, with = "schema::matrix_list")]
    pub arguments: Vec<ComplexMatrix>,
    pub eps0: f64,
    pub steps: usize,
    pub r: u32,
    /// `‖E‖`.
    pub perturbation_norm: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub eps: f64,
    /// `E‖T(A^{(m)}) − T(A)‖^r`.
    pub mean: f64,
    pub stderr: f64,
    /// `E[bound^r]` of the continuity estimate.
    pub bound_mean: f64,
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    #[serde(default = "schema::schema_version")]
    pub schema_version: u32,
    pub seed: u64,
    pub samples: usize,
    pub r: u32,
    pub rows: Vec<ConvergenceRow>,
    pub monotone_decreasing: bool,
    /// Last mean ≤ `DECAY_THRESHOLD` × first mean.
    pub reaches_threshold: bool,
    pub all_dominated: bool,
    /// Bounds use a projective surrogate rather than a grid sup.
    pub certified: bool,
    pub aborted: usize,
}

impl ConvergenceExperiment {
    pub fn validate(&self) -> Result<()> {
        schema::check_version(self.schema_version)?;
        self.model.validate()?;
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.r == 1 || self.r == 2) {
            return bad(format!("r must be 1 or 2, got {}", self.r));
        }
        if self.steps == 0 || self.steps > MAX_STEPS {
            return bad(format!("steps must be in 1..={MAX_STEPS}, got {}", self.steps));
        }
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        if self.arguments.len() != self.order - 1 {
            return Err(Error::Dimension(format!(
                "{} arguments for order {}, expected {}",
                self.arguments.len(),
                self.order,
                self.order - 1
            )));
        }
        if let Some(x) = self.arguments.iter().find(|x| x.nrows() != self.model.dim) {
            return Err(Error::Dimension(format!("argument is {}x{}, model dim {}", x.nrows(), x.ncols(), self.model.dim)));
        }
        if !(self.eps0.is_finite() && self.eps0 >= 0.0) {
            return bad(format!("eps0 must be finite and non-negative, got {}", self.eps0));
        }
        if !(self.perturbation_norm.is_finite() && self.perturbation_norm >= 0.0) {
            return bad(format!("perturbation_norm {}", self.perturbation_norm));
        }
        if self.samples < 100 {
            return bad(format!("samples must be at least 100, got {}", self.samples));
        }
        self.function.build().map(|_| ())
    }
}

struct SampleRun {
    lhs: Vec<f64>,
    bound: Vec<f64>,
    certified: bool,
}

pub fn convergence_in_mean_check(exp: &ConvergenceExperiment) -> Result<ConvergenceReport> {
    exp.validate()?;
    let f = exp.function.build()?;
    let n = exp.order;
    let r = exp.r as i32;
    let run = |i: u64| -> Result<SampleRun> {
        let mut rng = stream_rng(exp.seed, i);
        let a = sample_random_hermitian(&exp.model, &mut rng)?;
        let e = hermitian_with_norm(exp.model.dim, exp.perturbation_norm, &mut rng);
        let base = vec![&a; n];
        let mut lhs = Vec::with_capacity(exp.steps);
        let mut bound = Vec::with_capacity(exp.steps);
        let mut certified = true;
        for m in 1..=exp.steps {
            let eps = exp.eps0 / m as f64;
            let am = if eps == 0.0 { a.clone() } else { a.add_scaled(&e, eps)? };
            let c = continuity_modulus(&f, &base, &vec![&am; n], &exp.arguments)?;
            lhs.push(c.lhs.powi(r));
            bound.push(c.bound.powi(r));
            certified &= c.certified;
        }
        Ok(SampleRun { lhs, bound, certified })
    };
    let results: Vec<Result<SampleRun>> = (0..exp.samples as u64).into_par_iter().map(run).collect();
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
    let runs: Vec<SampleRun> = results.into_iter().filter_map(|r| r.ok()).collect();
    let rows: Vec<ConvergenceRow> = (0..exp.steps)
        .map(|j| {
            let l: Vec<f64> = runs.iter().map(|s| s.lhs[j]).collect();
            let b: Vec<f64> = runs.iter().map(|s| s.bound[j]).collect();
            let le = mean_stderr(&l);
            let be = mean_stderr(&b);
            ConvergenceRow {
                m: j + 1,
                eps: exp.eps0 / (j + 1) as f64,
                mean: le.mean,
                stderr: le.stderr,
                bound_mean: be.mean,
                dominated: le.mean <= be.mean * (1.0 + 1e-12) + 1e-300,
            }
        })
        .collect();
    let monotone_decreasing = rows.windows(2).all(|w| w[1].mean <= w[0].mean);
    let first = rows.first().map_or(0.0, |r| r.mean);
    let last = rows.last().map_or(0.0, |r| r.mean);
    Ok(ConvergenceReport {
        schema_version: schema::SCHEMA_VERSION,
        seed: exp.seed,
        samples: exp.samples,
        r: exp.r,
        all_dominated: rows.iter().all(|r| r.dominated),
        rows,
        monotone_decreasing,
        reaches_threshold: last <= DECAY_THRESHOLD * first,
        certified: runs.iter().all(|s| s.certified),
        aborted,
    })
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,eps,mean,stderr,bound_mean,dominated\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.m, r.eps, r.mean, r.stderr, r.bound_mean, r.dominated
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix;

    fn exp(order: usize, coeffs: Vec<f64>, r: u32) -> ConvergenceExperiment {
        ConvergenceExperiment {
            schema_version: 1,
            model: RandomOperatorModel::uniform(3, -1.0, 1.0).unwrap(),
            function: ScalarFunctionSpec::Polynomial { coeffs },
            order,
            arguments: vec![matrix::identity(3); order - 1],
            eps0: 0.1,
            steps: 8,
            r,
            perturbation_norm: 1.0,
            samples: 200,
            seed: 9,
        }
    }

    #[test]
    fn zero_eps_gives_zero() {
        let mut e = exp(2, vec![0.0, 0.0, 0.0, 1.0], 1);
        e.eps0 = 0.0;
        let rep = convergence_in_mean_check(&e).unwrap();
        assert!(rep.rows.iter().all(|r| r.mean == 0.0));
    }

    #[test]
    fn identity_function_decays_as_one_over_m() {
        let rep = convergence_in_mean_check(&exp(1, vec![0.0, 1.0], 1)).unwrap();
        // ‖ε_m E‖ = ε₀/m exactly
        for row in &rep.rows {
            assert!((row.mean - 0.1 / row.m as f64).abs() < 1e-12);
        }
        assert!(rep.monotone_decreasing && rep.all_dominated);
    }

    #[test]
    fn cubic_second_mean_is_dominated() {
        let rep = convergence_in_mean_check(&exp(2, vec![0.0, 0.0, 0.0, 1.0], 2)).unwrap();
        assert!(rep.monotone_decreasing && rep.all_dominated && rep.certified);
    }

    #[test]
    fn validation() {
        let mut e = exp(2, vec![1.0], 3);
        assert!(e.validate().is_err());
        e.r = 1;
        e.steps = 65;
        assert!(e.validate().is_err());
        e.steps = 4;
        e.arguments.clear();
        assert!(matches!(e.validate(), Err(Error::Dimension(_))));
    }
}
