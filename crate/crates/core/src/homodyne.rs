//! Homodyne detection for isothermal models with fixed first moments.
//!
//! For such models there are canonical coordinates `R' = TR` in which
//! `TΓTᵀ = ν I` and `T∂ΓTᵀ = diag(νλ, −νλ)` with `λ ≥ 0`. Measuring the `Q'`
//! quadratures then gives classical Fisher information `½ Σ λₖ²`, the best any
//! homodyne measurement can do.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::models::{check_isothermal, GaussianModelPoint};
use crate::sld::gaussian_fisher;
use crate::symplectic::{is_symplectic, paired_eigenbasis, williamson, CovarianceMatrix, DEFAULT_TOL};

/// `(T, λ, ν)` normal form of an isothermal point.
#[derive(Clone, Debug)]
pub struct IsothermalFrame {
    pub t: DMatrix<f64>,
    /// Non-negative, descending.
    pub lambda: Vec<f64>,
    pub nu: f64,
}

impl IsothermalFrame {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }
}

/// Builds the normal form from the Williamson frame `S` and an orthogonal
/// symplectic eigenbasis of the Hamiltonian matrix `W = S⁻¹∂ΓS⁻ᵀ`.
pub fn isothermal_frame(point: &GaussianModelPoint, tol: f64) -> Result<IsothermalFrame> {
    let nu = check_isothermal(point, tol)?.require()?;
    let scale_d = 1.0 + point.d().amax();
    if point.dd().amax() > tol * scale_d {
        return Err(Error::precondition(
            "fixed_first_moments",
            "homodyne analysis requires ∂d = 0",
        ));
    }
    let n = point.n();
    let w = williamson(point.gamma(), tol.max(DEFAULT_TOL))?;
    let s_inv = w.s_inverse();
    let wm = crate::linalg::symmetrize(&(&s_inv * point.dgamma() * s_inv.transpose()));
    let o = paired_eigenbasis(&wm, n, 1e-9)?;

    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|k| {
            let mut q = o.column(k).into_owned();
            if let Some(first) = q.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    q = -q;
                }
            }
            let sigma = (q.transpose() * &wm * &q)[(0, 0)];
            (sigma.max(0.0) / nu, q)
        })
        .collect();
    let scale = pairs.iter().fold(1.0_f64, |m, p| m.max(p.0));
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() > 1e-9 * scale {
            b.0.total_cmp(&a.0)
        } else {
            a.1.iter()
                .zip(b.1.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        }
    });

    let omega = crate::symplectic::omega(n);
    let mut frame = DMatrix::zeros(2 * n, 2 * n);
    for (k, (_, q)) in pairs.iter().enumerate() {
        frame.set_column(k, q);
        frame.set_column(n + k, &(-(&omega * q)));
    }
    Ok(IsothermalFrame {
        t: frame.transpose() * s_inv,
        lambda: pairs.into_iter().map(|p| p.0).collect(),
        nu,
    })
}

/// `I*_cl = ½ Σ λₖ²`.
pub fn optimal_homodyne_fisher(frame: &IsothermalFrame) -> f64 {
    0.5 * frame.lambda.iter().map(|l| l * l).sum::<f64>()
}

/// Classical Fisher information of measuring the `Q` quadratures of `U R'`,
/// where `R'` are the frame coordinates. Only the top blocks `(a b)` of `U`
/// enter: `γ̂ = ν(aaᵀ + bbᵀ)`, `∂γ̂ = ν(aλaᵀ − bλbᵀ)`.
pub fn homodyne_fisher(frame: &IsothermalFrame, u: &DMatrix<f64>) -> Result<f64> {
    let n = frame.n();
    crate::linalg::check_square(u, 2 * n, "measurement symplectic")?;
    let scale = 1.0 + max_abs(u).powi(2);
    if !is_symplectic(u, 1e-9 * scale) {
        return Err(Error::InvalidArgument("measurement matrix is not symplectic".into()));
    }
    let a = u.view((0, 0), (n, n)).into_owned();
    let b = u.view((0, n), (n, n)).into_owned();
    let abt = &a * b.transpose();
    if max_abs(&(&abt - abt.transpose())) > 1e-10 * scale {
        return Err(Error::InvalidArgument("top blocks violate abᵀ = baᵀ".into()));
    }
    let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&frame.lambda));
    let cov = (&a * a.transpose() + &b * b.transpose()) * frame.nu;
    let dcov = (&a * &lam * a.transpose() - &b * &lam * b.transpose()) * frame.nu;
    gaussian_fisher(&cov, &dcov, &DVector::zeros(n))
}

/// Passive network turning the estimator `Θ = αᵀR` into a gain-weighted sum
/// of `Q` quadratures.
#[derive(Clone, Debug)]
pub struct HomodynePlan {
    /// Orthogonal symplectic; `(Vα)_p = 0`.
    pub v: DMatrix<f64>,
    pub gains: Vec<f64>,
    pub alpha: DVector<f64>,
}

/// Per-mode rotations with `cₖ = α_qₖ/|α_qₖ + iα_pₖ|`, `sₖ = α_pₖ/|…|`.
/// Modes with `α_qₖ = α_pₖ = 0` are left alone.
pub fn homodyne_plan(alpha: &DVector<f64>) -> Result<HomodynePlan> {
    if alpha.is_empty() || !alpha.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "estimator coefficients must have even positive length, got {}",
            alpha.len()
        )));
    }
    if alpha.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidArgument("estimator coefficients are all zero".into()));
    }
    let n = alpha.len() / 2;
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    let mut gains = Vec::with_capacity(n);
    for k in 0..n {
        let (aq, ap) = (alpha[k], alpha[n + k]);
        let norm = aq.hypot(ap);
        let (c, s) = if norm == 0.0 { (1.0, 0.0) } else { (aq / norm, ap / norm) };
        v[(k, k)] = c;
        v[(k, n + k)] = s;
        v[(n + k, k)] = -s;
        v[(n + k, n + k)] = c;
        gains.push(c * aq + s * ap);
    }
    Ok(HomodynePlan {
        v,
        gains,
        alpha: alpha.clone(),
    })
}

/// Adds a θ-independent ancilla in state `γ_anc`: `Γ ⊕ γ`, `∂Γ ⊕ 0`.
pub fn ancilla_extend(point: &GaussianModelPoint, ancilla: &CovarianceMatrix) -> GaussianModelPoint {
    point.with_ancilla(ancilla)
}
