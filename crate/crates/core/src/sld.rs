//! Symmetric logarithmic derivative and Fisher information of Gaussian models.
//!
//! The SLD of a Gaussian model is the quadratic operator
//! `L̂ = Σ Lᵢⱼ (Rⁱ−dⁱ)∘(Rʲ−dʲ) + Σ bᵢ (Rⁱ−dⁱ) + c` with
//! `b = 2Γ⁻¹∂d`, `L = D_Γ⁻(∂Γ)` and `c = −½ tr[LΓ]`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::dgamma::{dgamma_spectrum, InverseKind};
use crate::error::{Error, Result};
use crate::linalg::{check_square, frobenius_dot, max_abs, paired_diagonal, sorted_symmetric_eigen, spd_inverse, symmetrize};
use crate::models::{check_isothermal, GaussianModelPoint};
use crate::symplectic::{williamson_unchecked, DEFAULT_TOL};

/// Warning attached to results whose `∂Γ` is not in the range of `D_Γ`.
pub const KERNEL_OVERLAP: &str = "kernel-overlap";

/// SLD in centered form.
#[derive(Clone, Debug)]
pub struct SldCoefficients {
    pub l: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
    /// `‖D_Γ(L) − ∂Γ‖_F`.
    pub range_residual: f64,
    pub kernel_overlap: bool,
}

/// SLD as `Σ L⁽²⁾ᵢⱼ Rⁱ∘Rʲ + Σ L⁽¹⁾ᵢ Rⁱ + L⁽⁰⁾` in the uncentered operators.
#[derive(Clone, Debug, PartialEq)]
pub struct UncenteredSld {
    pub l2: DMatrix<f64>,
    pub l1: DVector<f64>,
    pub l0: f64,
}

impl SldCoefficients {
    /// Expands the centered form around displacement `d`.
    pub fn uncentered(&self, d: &DVector<f64>) -> UncenteredSld {
        let ld = &self.l * d;
        UncenteredSld {
            l2: self.l.clone(),
            l1: &self.b - &ld * 2.0,
            l0: d.dot(&ld) - self.b.dot(d) + self.c,
        }
    }

    /// Inverse of [`Self::uncentered`].
    pub fn from_uncentered(u: &UncenteredSld, d: &DVector<f64>) -> Self {
        let ld = &u.l2 * d;
        let b = &u.l1 + &ld * 2.0;
        let c = u.l0 - d.dot(&ld) + b.dot(d);
        Self {
            l: u.l2.clone(),
            b,
            c,
            range_residual: 0.0,
            kernel_overlap: false,
        }
    }
}

/// SLD coefficients with the default (Williamson-frame) generalized inverse.
pub fn sld_coefficients(point: &GaussianModelPoint, tol: f64) -> Result<SldCoefficients> {
    sld_coefficients_with(point, tol, InverseKind::Frame)
}

pub fn sld_coefficients_with(point: &GaussianModelPoint, tol: f64, kind: InverseKind) -> Result<SldCoefficients> {
    let gamma = point.gamma().matrix();
    let g_inv = spd_inverse(gamma)?;
    let b = &g_inv * point.dd() * 2.0;
    let spectrum = dgamma_spectrum(point.gamma(), tol)?;
    let sol = spectrum.pseudoinverse_apply(point.dgamma(), kind, tol)?;
    let l = symmetrize(&sol.y);
    let c = -0.5 * frobenius_dot(&l, gamma);
    Ok(SldCoefficients {
        l,
        b,
        c,
        range_residual: sol.residual,
        kernel_overlap: sol.kernel_overlap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    General,
    Isothermal,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::General => "general",
            Method::Isothermal => "isothermal",
        })
    }
}

/// Fisher information of one model point.
#[derive(Clone, Debug)]
pub struct FisherReport {
    pub qfi: f64,
    pub wigner_fisher: f64,
    /// `2 ∂dᵀ Γ⁻¹ ∂d`.
    pub first_moment_term: f64,
    /// The `∂Γ` contribution.
    pub second_moment_term: f64,
    pub method: Method,
    pub range_residual: f64,
    pub warnings: Vec<&'static str>,
}

impl FisherReport {
    /// `qfi / wigner_fisher`; NaN when the Wigner Fisher information vanishes.
    pub fn ratio(&self) -> f64 {
        if self.wigner_fisher == 0.0 {
            f64::NAN
        } else {
            self.qfi / self.wigner_fisher
        }
    }
}

fn first_moment_term(point: &GaussianModelPoint, g_inv: &DMatrix<f64>) -> f64 {
    2.0 * point.dd().dot(&(g_inv * point.dd()))
}

/// QFI through the generalized inverse of `D_Γ`, with [`DEFAULT_TOL`].
pub fn qfi_general(point: &GaussianModelPoint) -> Result<FisherReport> {
    qfi_general_with(point, DEFAULT_TOL)
}

/// `I_Q = ½ tr[L D_Γ(L)] + 2∂dᵀΓ⁻¹∂d` with `L = D_Γ⁻(∂Γ)`.
///
/// When `∂Γ` lies in the range of `D_Γ` the first trace equals
/// `½ tr[∂Γ D_Γ⁻(∂Γ)]`; otherwise the range-projected value is returned and the
/// report carries [`KERNEL_OVERLAP`].
pub fn qfi_general_with(point: &GaussianModelPoint, tol: f64) -> Result<FisherReport> {
    let coeffs = sld_coefficients(point, tol)?;
    let gamma = point.gamma().matrix();
    let g_inv = spd_inverse(gamma)?;
    let dl = crate::dgamma::apply_map(gamma, &coeffs.l);
    let second = (0.5 * frobenius_dot(&coeffs.l, &dl)).max(0.0);
    let first = first_moment_term(point, &g_inv);
    let mut warnings = Vec::new();
    if coeffs.kernel_overlap {
        warnings.push(KERNEL_OVERLAP);
    }
    Ok(FisherReport {
        qfi: first + second,
        wigner_fisher: wigner_fisher(point)?,
        first_moment_term: first,
        second_moment_term: second,
        method: Method::General,
        range_residual: coeffs.range_residual,
        warnings,
    })
}

/// Fisher information of a Gaussian distribution whose covariance is `cov / 2`:
/// `½ tr[(cov⁻¹ ∂cov)²] + 2 ∂meanᵀ cov⁻¹ ∂mean`.
pub fn gaussian_fisher(cov: &DMatrix<f64>, dcov: &DMatrix<f64>, dmean: &DVector<f64>) -> Result<f64> {
    let dim = cov.nrows();
    check_square(cov, dim, "covariance")?;
    check_square(dcov, dim, "covariance derivative")?;
    if dmean.len() != dim {
        return Err(Error::Dimension(format!("mean derivative must have length {dim}")));
    }
    let inv = spd_inverse(cov)?;
    let a = &inv * dcov;
    let trace = frobenius_dot(&a.transpose(), &a);
    Ok(0.5 * trace + 2.0 * dmean.dot(&(&inv * dmean)))
}

/// Fisher information of the Wigner distribution of the state.
pub fn wigner_fisher(point: &GaussianModelPoint) -> Result<f64> {
    gaussian_fisher(point.gamma().matrix(), point.dgamma(), point.dd())
}

/// Isothermal closed form with [`DEFAULT_TOL`].
pub fn qfi_isothermal(point: &GaussianModelPoint) -> Result<FisherReport> {
    qfi_isothermal_with(point, DEFAULT_TOL)
}

/// `I_Q = ½ ν²/(1+ν²) tr[(∂ΓΓ⁻¹)²] + 2∂dᵀΓ⁻¹∂d` for points whose symplectic
/// eigenvalues are all equal and unchanged by `θ`. Other points are rejected
/// with the failed flag named.
pub fn qfi_isothermal_with(point: &GaussianModelPoint, tol: f64) -> Result<FisherReport> {
    let nu = check_isothermal(point, tol)?.require()?;
    let gamma = point.gamma().matrix();
    let g_inv = spd_inverse(gamma)?;
    let a = point.dgamma() * &g_inv;
    let trace = frobenius_dot(&a.transpose(), &a);
    let second = 0.5 * nu * nu / (1.0 + nu * nu) * trace;
    let first = first_moment_term(point, &g_inv);
    Ok(FisherReport {
        qfi: first + second,
        wigner_fisher: wigner_fisher(point)?,
        first_moment_term: first,
        second_moment_term: second,
        method: Method::Isothermal,
        range_residual: 0.0,
        warnings: Vec::new(),
    })
}

/// `L = Tᵀ diag(α, α) T` with `T` symplectic, so that in the modes `R' = TR`
/// the SLD reads `Σₖ 2αₖ (Nₖ − ⟨Nₖ⟩)`, `Nₖ` the photon number of the centered
/// mode `k`.
#[derive(Clone, Debug)]
pub struct PhotonCountingForm {
    pub t: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub mean_photon: Vec<f64>,
}

/// Result of [`photon_counting_form`].
#[derive(Clone, Debug)]
pub enum PhotonCounting {
    Available(PhotonCountingForm),
    Absent { reason: &'static str },
}

impl PhotonCounting {
    pub fn form(&self) -> Option<&PhotonCountingForm> {
        match self {
            PhotonCounting::Available(f) => Some(f),
            PhotonCounting::Absent { .. } => None,
        }
    }
}

/// Photon-counting normal form of the SLD, available when `∂Γ⁻¹` is
/// semidefinite (either sign), `b = 0` and `L` is definite.
pub fn photon_counting_form(coeffs: &SldCoefficients, point: &GaussianModelPoint, tol: f64) -> Result<PhotonCounting> {
    let n = point.n();
    check_square(&coeffs.l, 2 * n, "L")?;
    if coeffs.kernel_overlap {
        return Ok(PhotonCounting::Absent { reason: KERNEL_OVERLAP });
    }
    let scale = 1.0 + max_abs(&coeffs.l);
    if max_abs(&coeffs.l) <= tol * scale {
        return Ok(PhotonCounting::Absent { reason: "linear model" });
    }
    if coeffs.b.amax() > tol * (1.0 + coeffs.b.amax() + max_abs(&coeffs.l)) {
        return Ok(PhotonCounting::Absent { reason: "nonzero linear term" });
    }
    let g_inv = spd_inverse(point.gamma().matrix())?;
    let d_inv = -(&g_inv * point.dgamma() * &g_inv);
    let (vals, _) = sorted_symmetric_eigen(&d_inv);
    let norm = vals.amax();
    let threshold = tol * norm;
    if vals[0] < -threshold && vals[vals.len() - 1] > threshold {
        return Ok(PhotonCounting::Absent { reason: "indefinite" });
    }
    let (lvals, _) = sorted_symmetric_eigen(&coeffs.l);
    let lthreshold = tol * lvals.amax();
    let sign = if lvals[0] > lthreshold {
        1.0
    } else if lvals[lvals.len() - 1] < -lthreshold {
        -1.0
    } else {
        return Ok(PhotonCounting::Absent { reason: "singular L" });
    };
    let w = williamson_unchecked(&symmetrize(&(&coeffs.l * sign)))?;
    let t = w.s.transpose();
    let alpha: Vec<f64> = w.nu.iter().map(|a| a * sign).collect();
    let reconstructed = t.transpose() * paired_diagonal(&alpha) * &t;
    if max_abs(&(reconstructed - &coeffs.l)) > 1e3 * tol * scale {
        return Err(Error::Numerical("photon-counting frame does not reproduce L".into()));
    }
    let gp = &t * point.gamma().matrix() * t.transpose();
    let mean_photon = (0..n)
        .map(|k| 0.5 * (0.5 * (gp[(k, k)] + gp[(n + k, n + k)]) - 1.0))
        .collect();
    Ok(PhotonCounting::Available(PhotonCountingForm { t, alpha, mean_photon }))
}
