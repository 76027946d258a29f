//! JSON building blocks shared by all documents.
//!
//! Matrices are `{"dim": n, "entries": [[[re, im], …], …]}` (row-major rows);
//! scalar functions are `{"kind": "polynomial", "coeffs": [...]}` or
//! `{"kind": "builtin", "name": "exp"}`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::integrand::{
    integrand_from_divided_difference, MultivariateFunction, Polynomial, ScalarFunction, SeparableIntegrand,
};
use crate::linalg::matrix::ComplexMatrix;
use num_complex::Complex64;

pub const SCHEMA_VERSION: u32 = 1;

pub fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.nrows(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Dimension("matrix dim must be at least 1".into()));
        }
        if self.entries.len() != n {
            return Err(Error::Dimension(format!("dim {n} but {} rows", self.entries.len())));
        }
        if let Some((i, row)) = self.entries.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!("row {i} has {} entries, dim is {n}", row.len())));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i][j];
            Complex64::new(re, im)
        });
        crate::linalg::matrix::ensure_finite(&m)?;
        Ok(m)
    }
}

/// `#[serde(with = "matrix")]` for a `ComplexMatrix` field.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ComplexMatrix, D::Error> {
        MatrixJson::deserialize(d)?
            .to_matrix()
            .map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "matrix_list")]` for a `Vec<ComplexMatrix>` field.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[ComplexMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(MatrixJson::from_matrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<ComplexMatrix>, D::Error> {
        Vec::<MatrixJson>::deserialize(d)?
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_matrix().map_err(|e| serde::de::Error::custom(format!("matrix {i}: {e}"))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFunctionSpec {
    /// Coefficients in ascending degree.
    Polynomial { coeffs: Vec<f64> },
    /// One of `exp`, `sin`, `cos`, `abs`.
    Builtin { name: String },
}

impl ScalarFunctionSpec {
    pub fn build(&self) -> Result<ScalarFunction> {
        match self {
            Self::Polynomial { coeffs } => {
                if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
                    return Err(Error::Parameter(format!("polynomial coefficient {c}")));
                }
                Ok(ScalarFunction::Polynomial(Polynomial::new(coeffs.clone())))
            }
            Self::Builtin { name } => ScalarFunction::builtin(name),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, Self::Polynomial { .. })
    }
}

/// `Σ_t Π_i f_{t,i}(λ_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableIntegrandSpec {
    pub arity: usize,
    pub terms: Vec<Vec<ScalarFunctionSpec>>,
}

impl SeparableIntegrandSpec {
    pub fn build(&self) -> Result<SeparableIntegrand> {
        let terms = self
            .terms
            .iter()
            .map(|t| t.iter().map(|f| f.build()).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SeparableIntegrand::new(self.arity, terms)
    }
}

/// Integrands accepted in requests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandSpec {
    Separable { arity: usize, terms: Vec<Vec<ScalarFunctionSpec>> },
    /// `f^[order]`, arity `order + 1`.
    DividedDifference { function: ScalarFunctionSpec, order: usize },
    Constant { arity: usize, value: f64 },
}

impl IntegrandSpec {
    pub fn arity(&self) -> usize {
        match self {
            Self::Separable { arity, .. } | Self::Constant { arity, .. } => *arity,
            Self::DividedDifference { order, .. } => order + 1,
        }
    }

    pub fn build(&self) -> Result<MultivariateFunction> {
        match self {
            Self::Separable { arity, terms } => Ok(MultivariateFunction::from_separable(
                SeparableIntegrandSpec {
                    arity: *arity,
                    terms: terms.clone(),
                }
                .build()?,
            )),
            Self::DividedDifference { function, order } => {
                integrand_from_divided_difference(&function.build()?, *order)
            }
            Self::Constant { arity, value } => {
                if *arity == 0 {
                    return Err(Error::Dimension("integrand arity must be at least 1".into()));
                }
                Ok(MultivariateFunction::constant(*arity, *value))
            }
        }
    }
}

/// Parses `text` as `T`, reporting the JSON path of the first failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema(format!("at {path}: {}", e.into_inner()))
    })
}

/// As [`parse_json`] from an already parsed value.
pub fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema(format!("at {path}: {}", e.into_inner()))
    })
}

pub fn check_version(version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize)]
    struct Wrap {
        #[serde(with = "matrix")]
        m: ComplexMatrix,
    }

    #[test]
    fn matrix_round_trip() {
        let json = r#"{"m":{"dim":2,"entries":[[[1.0,0.0],[0.0,2.0]],[[0.0,-2.0],[3.0,0.0]]]}}"#;
        let w: Wrap = parse_json(json).unwrap();
        assert_eq!(w.m[(0, 1)], Complex64::new(0.0, 2.0));
        assert_eq!(serde_json::to_string(&w).unwrap(), json);
    }

    #[test]
    fn errors_carry_paths() {
        let json = r#"{"m":{"dim":2,"entries":[[[1.0,0.0]],[[0.0,-2.0],[3.0,0.0]]]}}"#;
        let err = parse_json::<Wrap>(json).unwrap_err().to_string();
        assert!(err.contains("row 0"), "{err}");
        let json = r#"{"m":{"dim":"two","entries":[]}}"#;
        let err = parse_json::<Wrap>(json).unwrap_err().to_string();
        assert!(err.contains("m.dim"), "{err}");
    }

    #[test]
    fn function_specs() {
        let f: ScalarFunctionSpec = parse_json(r#"{"kind":"polynomial","coeffs":[0,0,1]}"#).unwrap();
        assert_eq!(f.build().unwrap().eval(3.0), 9.0);
        let g: ScalarFunctionSpec = parse_json(r#"{"kind":"builtin","name":"exp"}"#).unwrap();
        assert!((g.build().unwrap().eval(1.0) - std::f64::consts::E).abs() < 1e-15);
        let bad: ScalarFunctionSpec = parse_json(r#"{"kind":"builtin","name":"tan"}"#).unwrap();
        assert!(bad.build().is_err());
        let i: IntegrandSpec =
            parse_json(r#"{"kind":"divided_difference","function":{"kind":"polynomial","coeffs":[0,0,0,1]},"order":1}"#)
                .unwrap();
        assert_eq!(i.arity(), 2);
        assert_eq!(i.build().unwrap().eval(&[1.0, 2.0]).unwrap(), 7.0);
    }
}
