//! Single-parameter Gaussian families and their derivatives.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{check_finite, check_square, max_abs, phase_space_direct_sum, phase_space_vector_sum, symmetrize};
use crate::symplectic::{omega, williamson, CovarianceMatrix, DisplacementVector, DEFAULT_TOL};

/// A model evaluated at one parameter value: `(d, Γ, ∂d, ∂Γ)`.
#[derive(Clone, Debug)]
pub struct GaussianModelPoint {
    n: usize,
    d: DisplacementVector,
    gamma: CovarianceMatrix,
    dd: DVector<f64>,
    dgamma: DMatrix<f64>,
}

impl GaussianModelPoint {
    /// Validates dimensions, finiteness, state validity and symmetry of `∂Γ`.
    pub fn new(d: DVector<f64>, gamma: DMatrix<f64>, dd: DVector<f64>, dgamma: DMatrix<f64>) -> Result<Self> {
        if !gamma.nrows().is_multiple_of(2) || gamma.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix must have even positive dimension, got {}",
                gamma.nrows()
            )));
        }
        let n = gamma.nrows() / 2;
        let gamma = CovarianceMatrix::new(n, gamma)?;
        Self::from_parts(DisplacementVector::new(n, d)?, gamma, dd, dgamma)
    }

    pub fn from_parts(d: DisplacementVector, gamma: CovarianceMatrix, dd: DVector<f64>, dgamma: DMatrix<f64>) -> Result<Self> {
        let n = gamma.n();
        if d.vector().len() != 2 * n {
            return Err(Error::Dimension(format!("d must have length {}", 2 * n)));
        }
        let dd = DisplacementVector::new(n, dd)?.vector().clone();
        check_square(&dgamma, 2 * n, "∂Γ")?;
        check_finite(&dgamma, "∂Γ")?;
        if max_abs(&(&dgamma - dgamma.transpose())) > DEFAULT_TOL * (1.0 + max_abs(&dgamma)) {
            return Err(Error::InvalidArgument("∂Γ must be symmetric".into()));
        }
        Ok(Self {
            n,
            d,
            gamma,
            dd,
            dgamma: symmetrize(&dgamma),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> &DVector<f64> {
        self.d.vector()
    }

    pub fn gamma(&self) -> &CovarianceMatrix {
        &self.gamma
    }

    pub fn dd(&self) -> &DVector<f64> {
        &self.dd
    }

    pub fn dgamma(&self) -> &DMatrix<f64> {
        &self.dgamma
    }

    /// The point seen after the Gaussian unitary with symplectic matrix `S`:
    /// `(Sd, SΓSᵀ, S∂d, S∂ΓSᵀ)`.
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        check_square(s, 2 * self.n, "symplectic transformation")?;
        Self::new(
            s * self.d(),
            s * self.gamma.matrix() * s.transpose(),
            s * &self.dd,
            s * &self.dgamma * s.transpose(),
        )
    }

    /// Derivatives with respect to `φ` where `θ = cφ`.
    pub fn reparametrized(&self, c: f64) -> Self {
        Self {
            dd: &self.dd * c,
            dgamma: &self.dgamma * c,
            ..self.clone()
        }
    }

    /// Joint point of this system and an independent, θ-independent ancilla.
    pub fn with_ancilla(&self, ancilla: &CovarianceMatrix) -> Self {
        let m = ancilla.n();
        let gamma = phase_space_direct_sum(self.gamma.matrix(), ancilla.matrix());
        let zeros_v = DVector::zeros(2 * m);
        Self {
            n: self.n + m,
            d: DisplacementVector::new(self.n + m, phase_space_vector_sum(self.d(), &zeros_v))
                .expect("direct sum has matching length"),
            gamma: CovarianceMatrix::trusted(self.n + m, gamma),
            dd: phase_space_vector_sum(&self.dd, &zeros_v),
            dgamma: phase_space_direct_sum(&self.dgamma, &DMatrix::zeros(2 * m, 2 * m)),
        }
    }
}

/// How a family produces `∂d`, `∂Γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Symmetric central difference; `None` selects `10⁻⁵ · max(1, |θ|)`.
    FiniteDifference { h: Option<f64> },
}

pub fn default_step(theta: f64) -> f64 {
    1e-5 * theta.abs().max(1.0)
}

#[derive(Clone, Debug)]
enum Kind {
    Displacement { nu: f64 },
    Thermal,
    Squeezing { nu: f64 },
    PhaseSqueezed { r: f64, nu: f64 },
    TwoModeSqueezedPhase { r: f64, nu: f64 },
    /// `Γ(θ) = Γ₀ + (θ − θ₀)∂Γ`, `d(θ) = d₀ + (θ − θ₀)∂d`.
    Linear {
        theta0: f64,
        d: DVector<f64>,
        gamma: DMatrix<f64>,
        dd: DVector<f64>,
        dgamma: DMatrix<f64>,
    },
}

/// Names accepted by [`builtin_family`].
pub const BUILTIN_FAMILIES: [&str; 5] = [
    "displacement",
    "thermal",
    "squeezing",
    "phase_squeezed",
    "two_mode_squeezed_phase",
];

/// A single-parameter family `θ ↦ (d, Γ)`.
#[derive(Clone, Debug)]
pub struct ModelFamily {
    name: String,
    params: BTreeMap<String, f64>,
    derivative: DerivativeMode,
    kind: Kind,
}

fn take_param(
    params: &BTreeMap<String, f64>,
    key: &str,
    default: Option<f64>,
    family: &str,
) -> Result<f64> {
    match (params.get(key), default) {
        (Some(v), _) if v.is_finite() => Ok(*v),
        (Some(v), _) => Err(Error::Domain(format!("{family}: parameter `{key}` = {v} is not finite"))),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(Error::Config(format!("{family}: missing parameter `{key}`"))),
    }
}

fn check_nu(nu: f64, family: &str) -> Result<f64> {
    if nu < 1.0 {
        return Err(Error::Domain(format!(
            "{family}: symplectic eigenvalue nu = {nu} violates nu >= 1"
        )));
    }
    Ok(nu)
}

/// Built-in family by name. Unknown parameter names are rejected.
///
/// | family | parameters | θ |
/// |---|---|---|
/// | `displacement` | `nu` (default 1) | `d = (θ, 0)`, `Γ = νI` |
/// | `thermal` | none | `Γ = θI`, `θ ≥ 1` |
/// | `squeezing` | `nu` (default 1) | `Γ = ν diag(e^{2θ}, e^{−2θ})` |
/// | `phase_squeezed` | `r`, `nu` (default 1) | `Γ = R(θ) ν diag(e^{2r}, e^{−2r}) R(θ)ᵀ` |
/// | `two_mode_squeezed_phase` | `r`, `nu` (default 1) | two-mode squeezed state, mode 1 rotated by θ |
pub fn builtin_family(name: &str, params: &BTreeMap<String, f64>) -> Result<ModelFamily> {
    let allowed: &[&str] = match name {
        "displacement" | "squeezing" => &["nu"],
        "thermal" => &[],
        "phase_squeezed" | "two_mode_squeezed_phase" => &["r", "nu"],
        other => return Err(Error::UnknownFamily(other.to_string())),
    };
    if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Config(format!("{name}: unknown parameter `{bad}`")));
    }
    let kind = match name {
        "displacement" => Kind::Displacement {
            nu: check_nu(take_param(params, "nu", Some(1.0), name)?, name)?,
        },
        "thermal" => Kind::Thermal,
        "squeezing" => Kind::Squeezing {
            nu: check_nu(take_param(params, "nu", Some(1.0), name)?, name)?,
        },
        "phase_squeezed" => Kind::PhaseSqueezed {
            r: take_param(params, "r", None, name)?,
            nu: check_nu(take_param(params, "nu", Some(1.0), name)?, name)?,
        },
        _ => Kind::TwoModeSqueezedPhase {
            r: take_param(params, "r", None, name)?,
            nu: check_nu(take_param(params, "nu", Some(1.0), name)?, name)?,
        },
    };
    Ok(ModelFamily {
        name: name.to_string(),
        params: params.clone(),
        derivative: DerivativeMode::Analytic,
        kind,
    })
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Generator `[[0, −1], [1, 0]]` of a rotation of mode `k`, acting on `(q_k, p_k)`.
fn rotation_generator(n: usize, k: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    j[(k, n + k)] = -1.0;
    j[(n + k, k)] = 1.0;
    j
}

impl ModelFamily {
    /// Family moving along the straight line through `point` in direction `(∂d, ∂Γ)`;
    /// `theta0` labels the parameter value of `point`.
    pub fn explicit(point: &GaussianModelPoint, theta0: f64) -> Self {
        Self {
            name: "explicit".into(),
            params: BTreeMap::new(),
            derivative: DerivativeMode::Analytic,
            kind: Kind::Linear {
                theta0,
                d: point.d().clone(),
                gamma: point.gamma().matrix().clone(),
                dd: point.dd().clone(),
                dgamma: point.dgamma().clone(),
            },
        }
    }

    pub fn with_derivative(mut self, mode: DerivativeMode) -> Self {
        self.derivative = mode;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.derivative
    }

    pub fn n(&self) -> usize {
        match &self.kind {
            Kind::TwoModeSqueezedPhase { .. } => 2,
            Kind::Linear { d, .. } => d.len() / 2,
            _ => 1,
        }
    }

    /// Rejects parameter values outside the family's domain.
    pub fn check_domain(&self, theta: f64) -> Result<()> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("theta = {theta} is not finite")));
        }
        if let Kind::Thermal = self.kind {
            if theta < 1.0 {
                return Err(Error::Domain(format!(
                    "thermal: theta = nu = {theta} violates nu >= 1"
                )));
            }
        }
        Ok(())
    }

    /// Non-fatal remarks about `θ`, e.g. the pure thermal point `θ = 1`.
    pub fn warnings(&self, theta: f64) -> Vec<&'static str> {
        match self.kind {
            Kind::Thermal if theta <= 1.0 + DEFAULT_TOL => vec!["near-singular"],
            _ => Vec::new(),
        }
    }

    /// Raw moments `(d, Γ)` at `θ` (domain-checked, not state-validated).
    pub fn moments(&self, theta: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        self.check_domain(theta)?;
        Ok(match &self.kind {
            Kind::Displacement { nu } => (DVector::from_vec(vec![theta, 0.0]), DMatrix::identity(2, 2) * *nu),
            Kind::Thermal => (DVector::zeros(2), DMatrix::identity(2, 2) * theta),
            Kind::Squeezing { nu } => (
                DVector::zeros(2),
                DMatrix::from_diagonal(&DVector::from_vec(vec![
                    nu * (2.0 * theta).exp(),
                    nu * (-2.0 * theta).exp(),
                ])),
            ),
            Kind::PhaseSqueezed { r, nu } => {
                let z = DMatrix::from_diagonal(&DVector::from_vec(vec![
                    nu * (2.0 * r).exp(),
                    nu * (-2.0 * r).exp(),
                ]));
                let rot = rotation(theta);
                (DVector::zeros(2), &rot * z * rot.transpose())
            }
            Kind::TwoModeSqueezedPhase { r, nu } => {
                let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
                let base = DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        c, s, 0.0, 0.0, //
                        s, c, 0.0, 0.0, //
                        0.0, 0.0, c, -s, //
                        0.0, 0.0, -s, c,
                    ],
                ) * *nu;
                let rot = mode_rotation(2, 0, theta);
                (DVector::zeros(4), &rot * base * rot.transpose())
            }
            Kind::Linear {
                theta0,
                d,
                gamma,
                dd,
                dgamma,
            } => {
                let t = theta - theta0;
                (d + dd * t, gamma + dgamma * t)
            }
        })
    }

    /// Analytic `(∂d, ∂Γ)` at `θ`.
    pub fn analytic_derivative(&self, theta: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (_, gamma) = self.moments(theta)?;
        let n = self.n();
        Ok(match &self.kind {
            Kind::Displacement { .. } => (DVector::from_vec(vec![1.0, 0.0]), DMatrix::zeros(2, 2)),
            Kind::Thermal => (DVector::zeros(2), DMatrix::identity(2, 2)),
            Kind::Squeezing { nu } => (
                DVector::zeros(2),
                DMatrix::from_diagonal(&DVector::from_vec(vec![
                    2.0 * nu * (2.0 * theta).exp(),
                    -2.0 * nu * (-2.0 * theta).exp(),
                ])),
            ),
            Kind::PhaseSqueezed { .. } | Kind::TwoModeSqueezedPhase { .. } => {
                let j = rotation_generator(n, 0);
                (DVector::zeros(2 * n), &j * &gamma + &gamma * j.transpose())
            }
            Kind::Linear { dd, dgamma, .. } => (dd.clone(), dgamma.clone()),
        })
    }

    /// Evaluates the family at `θ` using its derivative mode.
    pub fn evaluate(&self, theta: f64) -> Result<GaussianModelPoint> {
        match self.derivative {
            DerivativeMode::Analytic => {
                let (d, gamma) = self.moments(theta)?;
                let (dd, dgamma) = self.analytic_derivative(theta)?;
                GaussianModelPoint::new(d, gamma, dd, dgamma)
            }
            DerivativeMode::FiniteDifference { h } => {
                finite_difference_point(self, theta, h.unwrap_or_else(|| default_step(theta)))
            }
        }
    }
}

/// Orthogonal symplectic rotation of mode `k` by angle `theta`.
pub(crate) fn mode_rotation(n: usize, k: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut m = DMatrix::identity(2 * n, 2 * n);
    m[(k, k)] = c;
    m[(k, n + k)] = -s;
    m[(n + k, k)] = s;
    m[(n + k, n + k)] = c;
    m
}

/// `∂Γ ≈ (Γ(θ+h) − Γ(θ−h)) / 2h` (symmetrized) and likewise for `∂d`.
pub fn finite_difference_point(family: &ModelFamily, theta: f64, h: f64) -> Result<GaussianModelPoint> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let (d, gamma) = family.moments(theta)?;
    let (dp, gp) = family.moments(theta + h)?;
    let (dm, gm) = family.moments(theta - h)?;
    let dd = (dp - dm) / (2.0 * h);
    let dgamma = symmetrize(&((gp - gm) / (2.0 * h)));
    GaussianModelPoint::new(d, gamma, dd, dgamma)
}

/// Outcome of [`check_isothermal`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsothermalCheck {
    /// `(Γω)² = −ν² I`: all symplectic eigenvalues equal.
    pub is_isothermal: bool,
    /// The common symplectic eigenvalue when `is_isothermal`.
    pub nu: Option<f64>,
    /// `W = S⁻¹ ∂Γ S⁻ᵀ` anticommutes with `ω`, so `θ` does not change `ν` to first order.
    pub derivative_preserves_nu: bool,
}

impl IsothermalCheck {
    /// Both flags hold.
    pub fn passes(&self) -> bool {
        self.is_isothermal && self.derivative_preserves_nu
    }

    /// Converts a failed check into a rejection naming the first failed flag.
    pub fn require(&self) -> Result<f64> {
        if !self.is_isothermal {
            return Err(Error::precondition(
                "is_isothermal",
                "symplectic eigenvalues are not all equal",
            ));
        }
        if !self.derivative_preserves_nu {
            return Err(Error::precondition(
                "derivative_preserves_nu",
                "the parameter derivative changes the symplectic eigenvalues",
            ));
        }
        Ok(self.nu.expect("isothermal check carries nu"))
    }
}

/// Tests `(Γω)² + ν² I ≈ 0` and whether `∂Γ` preserves `ν`.
///
/// Tolerances are scaled by the size of the matrices involved.
pub fn check_isothermal(point: &GaussianModelPoint, tol: f64) -> Result<IsothermalCheck> {
    let n = point.n();
    let g = point.gamma().matrix();
    let w = williamson(point.gamma(), tol.max(DEFAULT_TOL))?;
    let nu = w.nu[0];
    let gw = g * omega(n);
    let dev = max_abs(&(&gw * &gw + DMatrix::identity(2 * n, 2 * n) * (nu * nu)));
    let is_isothermal = dev < tol * (1.0 + max_abs(g)).powi(2);

    let s_inv = w.s_inverse();
    let wm = &s_inv * point.dgamma() * s_inv.transpose();
    let om = omega(n);
    let anti = max_abs(&(&wm * &om + &om * &wm));
    let derivative_preserves_nu = anti < tol * (1.0 + max_abs(&wm));
    Ok(IsothermalCheck {
        is_isothermal,
        nu: is_isothermal.then_some(nu),
        derivative_preserves_nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn displacement_derivatives() {
        let f = builtin_family("displacement", &params(&[])).unwrap();
        let p = f.evaluate(0.7).unwrap();
        assert_eq!(p.dd().as_slice(), &[1.0, 0.0]);
        assert_eq!(p.dgamma(), &DMatrix::zeros(2, 2));
        let fd = finite_difference_point(&f, 0.7, 0.3).unwrap();
        assert_abs_diff_eq!(fd.dd()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn thermal_domain_and_derivative() {
        let f = builtin_family("thermal", &params(&[])).unwrap();
        assert_eq!(f.evaluate(2.0).unwrap().dgamma(), &DMatrix::identity(2, 2));
        assert!(matches!(f.evaluate(0.9), Err(Error::Domain(_))));
        assert!(f.evaluate(1.0).is_ok());
        assert_eq!(f.warnings(1.0), vec!["near-singular"]);
        let fd = finite_difference_point(&f, 2.0, 1e-3).unwrap();
        assert!(max_abs(&(fd.dgamma() - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn phase_squeezed_derivative_is_sigma_x() {
        let r: f64 = 0.5;
        let f = builtin_family("phase_squeezed", &params(&[("r", r)])).unwrap();
        let p = f.evaluate(0.0).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]) * (2.0 * (2.0 * r).sinh());
        assert!(max_abs(&(p.dgamma() - &expected)) < 1e-14);
        let fd = finite_difference_point(&f, 0.0, 1e-4).unwrap();
        assert!(max_abs(&(fd.dgamma() - &expected)) < 1e-6);
    }

    #[test]
    fn unknown_names_rejected() {
        assert!(matches!(builtin_family("coherent", &params(&[])), Err(Error::UnknownFamily(_))));
        assert!(matches!(builtin_family("thermal", &params(&[("r", 1.0)])), Err(Error::Config(_))));
        assert!(matches!(builtin_family("phase_squeezed", &params(&[])), Err(Error::Config(_))));
        assert!(matches!(builtin_family("squeezing", &params(&[("nu", 0.5)])), Err(Error::Domain(_))));
    }

    #[test]
    fn isothermal_examples() {
        let pure = builtin_family("phase_squeezed", &params(&[("r", 0.8)])).unwrap().evaluate(0.3).unwrap();
        let c = check_isothermal(&pure, 1e-9).unwrap();
        assert!(c.passes());
        assert_abs_diff_eq!(c.nu.unwrap(), 1.0, epsilon = 1e-9);

        let th = builtin_family("thermal", &params(&[])).unwrap().evaluate(2.0).unwrap();
        let c = check_isothermal(&th, 1e-9).unwrap();
        assert!(c.is_isothermal && !c.derivative_preserves_nu);
        assert!(matches!(c.require(), Err(Error::Precondition { flag: "derivative_preserves_nu", .. })));

        let mixed = GaussianModelPoint::new(
            DVector::zeros(4),
            crate::linalg::paired_diagonal(&[1.0, 3.0]),
            DVector::zeros(4),
            DMatrix::zeros(4, 4),
        )
        .unwrap();
        let c = check_isothermal(&mixed, 1e-9).unwrap();
        assert!(!c.is_isothermal && c.nu.is_none());
        assert!(matches!(c.require(), Err(Error::Precondition { flag: "is_isothermal", .. })));
    }

    #[test]
    fn two_mode_family_is_pure() {
        let f = builtin_family("two_mode_squeezed_phase", &params(&[("r", 0.6)])).unwrap();
        for theta in [0.0, 0.4, 2.0] {
            let p = f.evaluate(theta).unwrap();
            let nu = p.gamma().symplectic_eigenvalues().unwrap();
            assert!(nu.iter().all(|v| (v - 1.0).abs() < 1e-9));
            let fd = finite_difference_point(&f, theta, 1e-5).unwrap();
            assert!(max_abs(&(fd.dgamma() - p.dgamma())) < 1e-7);
        }
    }

    #[test]
    fn ancilla_direct_sum() {
        let p = builtin_family("squeezing", &params(&[])).unwrap().evaluate(0.2).unwrap();
        let ext = p.with_ancilla(&CovarianceMatrix::vacuum(1));
        assert_eq!(ext.n(), 2);
        assert_abs_diff_eq!(ext.dgamma()[(0, 0)], p.dgamma()[(0, 0)]);
        assert_abs_diff_eq!(ext.dgamma()[(2, 2)], p.dgamma()[(1, 1)]);
        assert_eq!(ext.gamma().matrix()[(1, 1)], 1.0);
        assert_eq!(ext.dgamma()[(1, 1)], 0.0);
    }
}
