//! Model-config documents.
//!
//! A document either names a built-in family
//!
//! ```toml
//! family = "phase_squeezed"
//! params = { r = 1.0, nu = 1.0 }
//! theta = 0.0
//! derivative = "analytic"   # or "fd"
//! h = 1e-5                  # fd step, optional
//! ```
//!
//! or gives one point explicitly (matrices are row-major nested arrays):
//!
//! ```json
//! {"explicit": {"n": 1, "d": [0, 0], "Gamma": [[2, 0], [0, 2]],
//!               "dd": [0, 0], "dGamma": [[1, 0], [0, 1]]}}
//! ```
//!
//! JSON is detected by a leading `{`; anything else is parsed as TOML.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::{builtin_family, DerivativeMode, GaussianModelPoint, ModelFamily};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    family: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    theta: Option<f64>,
    derivative: Option<String>,
    h: Option<f64>,
    explicit: Option<RawExplicit>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExplicit {
    n: usize,
    d: Vec<f64>,
    #[serde(rename = "Gamma")]
    gamma: Vec<Vec<f64>>,
    dd: Vec<f64>,
    #[serde(rename = "dGamma")]
    dgamma: Vec<Vec<f64>>,
}

/// A parsed config: a family and the parameter value it is evaluated at.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub family: ModelFamily,
    pub theta: f64,
}

fn matrix(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Dimension(format!("{what} must be {dim}x{dim}")));
    }
    Ok(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
}

fn vector(v: &[f64], dim: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != dim {
        return Err(Error::Dimension(format!("{what} must have length {dim}, got {}", v.len())));
    }
    Ok(DVector::from_column_slice(v))
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        let theta = raw.theta.unwrap_or(0.0);
        if let Some(h) = raw.h.filter(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Config(format!("`h` must be positive, got {h}")));
        }
        let derivative = match raw.derivative.as_deref() {
            None if raw.h.is_some() => DerivativeMode::FiniteDifference { h: raw.h },
            None | Some("analytic") => {
                if raw.h.is_some() {
                    return Err(Error::Config("`h` only applies to derivative = \"fd\"".into()));
                }
                DerivativeMode::Analytic
            }
            Some("fd") => DerivativeMode::FiniteDifference { h: raw.h },
            Some(other) => {
                return Err(Error::Config(format!(
                    "derivative must be \"analytic\" or \"fd\", got \"{other}\""
                )))
            }
        };
        let family = match (raw.family, raw.explicit) {
            (Some(name), None) => builtin_family(&name, &raw.params)?,
            (None, Some(e)) => {
                if !raw.params.is_empty() {
                    return Err(Error::Config("`params` cannot be combined with `explicit`".into()));
                }
                if e.n == 0 {
                    return Err(Error::Dimension("explicit.n must be at least 1".into()));
                }
                let dim = 2 * e.n;
                let point = GaussianModelPoint::new(
                    vector(&e.d, dim, "explicit.d")?,
                    matrix(&e.gamma, dim, "explicit.Gamma")?,
                    vector(&e.dd, dim, "explicit.dd")?,
                    matrix(&e.dgamma, dim, "explicit.dGamma")?,
                )?;
                ModelFamily::explicit(&point, theta)
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `family` or `explicit`, not both".into()))
            }
            (None, None) => return Err(Error::Config("config needs `family` or `explicit`".into())),
        };
        Ok(Self {
            family: family.with_derivative(derivative),
            theta,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The model point at the configured `θ`.
    pub fn point(&self) -> Result<GaussianModelPoint> {
        self.family.evaluate(self.theta)
    }
}
