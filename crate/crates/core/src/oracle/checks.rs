//! QFI, SLD residual and moment identities evaluated on truncated states.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fock::{expmv, weyl_generator, SparseOp};
use super::state::{build_state_from_moments, Frame, OracleOptions, TruncatedState};
use crate::error::{Error, Result};
use crate::models::{GaussianModelPoint, ModelFamily};
use crate::sld::SldCoefficients;
use crate::symplectic::{omega, validate_covariance, CovarianceMatrix};

/// Default finite-difference step in `θ`.
pub const ORACLE_STEP: f64 = 1e-4;

/// QFI computed from the truncated density matrices.
#[derive(Clone, Debug)]
pub struct OracleQfi {
    pub qfi: f64,
    /// `Σ |∂ρ_mn|²` over eigenpairs dropped because `p_m + p_n ≤ 10⁻¹² max p`.
    pub excluded_weight: f64,
    pub tail_mass: f64,
    pub cutoff: usize,
}

fn hermitian(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `Σ 2|⟨m|∂ρ|n⟩|² / (p_m + p_n)` in the eigenbasis of `ρ`.
pub fn qfi_from_derivative(rho: &DMatrix<Complex64>, drho: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(hermitian(rho));
    let p = eig.eigenvalues;
    let v = eig.eigenvectors;
    let dr = v.adjoint() * hermitian(drho) * &v;
    let eps = 1e-12 * p.iter().copied().fold(0.0, f64::max);
    let mut qfi = 0.0;
    let mut excluded = 0.0;
    for m in 0..p.len() {
        for n in 0..p.len() {
            let s = p[m] + p[n];
            let w = dr[(m, n)].norm_sqr();
            if s > eps {
                qfi += 2.0 * w / s;
            } else {
                excluded += w;
            }
        }
    }
    (qfi, excluded)
}

/// Oracle QFI of a family at `θ` with central difference step `h`.
pub fn qfi_fock(family: &ModelFamily, theta: f64, cutoff: usize, h: f64) -> Result<OracleQfi> {
    qfi_fock_with(family, theta, cutoff, h, OracleOptions::default())
}

pub fn qfi_fock_with(family: &ModelFamily, theta: f64, cutoff: usize, h: f64, opts: OracleOptions) -> Result<OracleQfi> {
    check_step(h)?;
    let moments = |t: f64| -> Result<(DVector<f64>, CovarianceMatrix)> {
        let (d, gamma) = family.moments(t)?;
        Ok((d, CovarianceMatrix::from_matrix(gamma)?))
    };
    let (d, gamma) = moments(theta)?;
    let frame = Frame::new(&gamma, cutoff, opts)?;
    let center = frame.build(&d, &gamma)?;
    let (dp, gp) = moments(theta + h)?;
    let (dm, gm) = moments(theta - h)?;
    let drho = (frame.build(&dp, &gp)?.rho - frame.build(&dm, &gm)?.rho) / Complex64::new(2.0 * h, 0.0);
    let (qfi, excluded_weight) = qfi_from_derivative(&center.rho, &drho);
    Ok(OracleQfi {
        qfi,
        excluded_weight,
        tail_mass: center.tail_mass,
        cutoff,
    })
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    Ok(())
}

/// `∂ρ` of a bare model point, taken along `d + t∂d`, `(1+δ)Γ + t∂Γ`.
///
/// `δ` starts at zero and grows from `h²` until both `t = ±h` ends are valid
/// states; it shifts the derivative by `O(δ)`, the same order as the
/// central-difference error.
pub fn point_derivative(point: &GaussianModelPoint, cutoff: usize, h: f64, opts: OracleOptions) -> Result<DMatrix<Complex64>> {
    check_step(h)?;
    let n = point.n();
    let g = point.gamma().matrix();
    let mut delta = 0.0;
    for _ in 0..40 {
        let base = g * (1.0 + delta);
        let ends = [&base + point.dgamma() * h, &base - point.dgamma() * h];
        let ok = ends.iter().all(|e| {
            validate_covariance(n, e, 0.0).map(|d| d.nu_min >= 1.0).unwrap_or(false)
        });
        if ok {
            let frame = Frame::new(point.gamma(), cutoff, opts)?;
            let mut rhos = Vec::with_capacity(2);
            for (sign, e) in [(1.0, &ends[0]), (-1.0, &ends[1])] {
                let d = point.d() + point.dd() * (sign * h);
                let gamma = CovarianceMatrix::new(n, e.clone())?;
                rhos.push(frame.build(&d, &gamma)?.rho);
            }
            return Ok((&rhos[0] - &rhos[1]) / Complex64::new(2.0 * h, 0.0));
        }
        delta = if delta == 0.0 { h * h } else { delta * 4.0 };
    }
    Err(Error::Numerical("could not find a physical difference curve".into()))
}

/// Oracle QFI of a bare model point.
pub fn qfi_fock_point(point: &GaussianModelPoint, cutoff: usize, h: f64) -> Result<OracleQfi> {
    let opts = OracleOptions::default();
    let center = build_state_from_moments(point.d(), point.gamma(), cutoff, opts)?;
    let drho = point_derivative(point, cutoff, h, opts)?;
    let (qfi, excluded_weight) = qfi_from_derivative(&center.rho, &drho);
    Ok(OracleQfi {
        qfi,
        excluded_weight,
        tail_mass: center.tail_mass,
        cutoff,
    })
}

/// Sensitivity of [`qfi_fock`] to the cutoff and the step.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub qfi: f64,
    /// Value at cutoff `D + 10`.
    pub qfi_larger_cutoff: f64,
    /// Value with step `h/2`.
    pub qfi_half_step: f64,
    /// `|qfi_larger_cutoff − qfi|`.
    pub cutoff_shift: f64,
    /// `|qfi_half_step − qfi|`.
    pub step_shift: f64,
}

pub fn convergence_probe(family: &ModelFamily, theta: f64, cutoff: usize, h: f64) -> Result<ConvergenceReport> {
    let base = qfi_fock(family, theta, cutoff, h)?.qfi;
    let larger = qfi_fock(family, theta, cutoff + 10, h)?.qfi;
    let half = qfi_fock(family, theta, cutoff, h / 2.0)?.qfi;
    Ok(ConvergenceReport {
        qfi: base,
        qfi_larger_cutoff: larger,
        qfi_half_step: half,
        cutoff_shift: (larger - base).abs(),
        step_shift: (half - base).abs(),
    })
}

/// `L̂ = Σ Lᵢⱼ R̃ⁱR̃ʲ + Σ bᵢ R̃ⁱ + c` with `R̃ = R − d`, on the padded space.
pub fn sld_operator(state: &TruncatedState, d: &DVector<f64>, coeffs: &SldCoefficients) -> SparseOp {
    let ops = centered(state, d);
    let dim = ops[0].dim();
    let one = Complex64::new(1.0, 0.0);
    let mut l = SparseOp::identity(dim).scaled(Complex64::new(coeffs.c, 0.0));
    for (i, ri) in ops.iter().enumerate() {
        if coeffs.b[i] != 0.0 {
            l = l.add_scaled(ri, Complex64::new(coeffs.b[i], 0.0));
        }
        for (j, rj) in ops.iter().enumerate() {
            if coeffs.l[(i, j)] != 0.0 {
                l = l.add_scaled(&ri.mul(rj), one * coeffs.l[(i, j)]);
            }
        }
    }
    l
}

fn centered(state: &TruncatedState, d: &DVector<f64>) -> Vec<SparseOp> {
    let dim = state.padded_space().total();
    let id = SparseOp::identity(dim);
    state
        .quadratures()
        .iter()
        .zip(d.iter())
        .map(|(r, di)| r.add_scaled(&id, Complex64::new(-di, 0.0)))
        .collect()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(hermitian(m))
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .sum()
}

/// `‖∂ρ − ½(ρL̂ + L̂ρ)‖₁` over the cutoff window.
pub fn sld_residual(point: &GaussianModelPoint, coeffs: &SldCoefficients, cutoff: usize, h: f64) -> Result<f64> {
    let opts = OracleOptions::default();
    let state = build_state_from_moments(point.d(), point.gamma(), cutoff, opts)?;
    let drho = point_derivative(point, cutoff, h, opts)?;
    let l = sld_operator(&state, point.d(), coeffs);
    let rl = state.rho_times(&l);
    let jordan = (&rl + rl.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(trace_norm(&(drho - jordan)))
}

/// `(tr[ρL̂], tr[ρL̂²])`.
pub fn sld_moments(point: &GaussianModelPoint, coeffs: &SldCoefficients, cutoff: usize) -> Result<(f64, f64)> {
    let state = build_state_from_moments(point.d(), point.gamma(), cutoff, OracleOptions::default())?;
    let l = sld_operator(&state, point.d(), coeffs);
    Ok((state.expectation(&l).re, state.pair_expectation(&l, &l).re))
}

/// Largest absolute deviations found by [`identity_checks`].
#[derive(Clone, Debug)]
pub struct IdentityReport {
    /// `tr[ρRⁱ]` against `dⁱ`.
    pub first_moments: f64,
    /// `tr[ρ{R̃ⁱ, R̃ʲ}]` against `Γⁱʲ`.
    pub second_moments: f64,
    /// `tr[ρW(ξ)]` against `exp(iξᵀd̄ − ¼ξᵀΓ̄ξ)` on sampled `|ξ| ≤ 2`.
    pub characteristic: f64,
    /// `tr[ρ(R̃ⁱ∘R̃ʲ)∘(R̃ᵏ∘R̃ˡ)]` against the Gaussian fourth-moment formula.
    pub fourth_moments: f64,
    pub tail_mass: f64,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        [self.first_moments, self.second_moments, self.characteristic, self.fourth_moments]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Number of sampled `ξ` in the characteristic-function check.
pub const CHARACTERISTIC_SAMPLES: usize = 12;

/// Gaussian fourth moment
/// `¼[ΓᵢⱼΓₖₗ + ΓᵢₖΓⱼₗ − ωᵢₖωⱼₗ + ΓᵢₗΓⱼₖ − ωᵢₗωⱼₖ]`.
pub fn gaussian_fourth_moment(gamma: &DMatrix<f64>, i: usize, j: usize, k: usize, l: usize) -> f64 {
    let w = omega(gamma.nrows() / 2);
    0.25 * (gamma[(i, j)] * gamma[(k, l)] + gamma[(i, k)] * gamma[(j, l)] - w[(i, k)] * w[(j, l)]
        + gamma[(i, l)] * gamma[(j, k)]
        - w[(i, l)] * w[(j, k)])
}

pub fn identity_checks(point: &GaussianModelPoint, cutoff: usize) -> Result<IdentityReport> {
    let state = build_state_from_moments(point.d(), point.gamma(), cutoff, OracleOptions::default())?;
    let n = point.n();
    let d = point.d();
    let g = point.gamma().matrix();
    let raw = state.quadratures();
    let ops = centered(&state, d);

    let first_moments = (0..2 * n)
        .map(|i| (state.expectation(&raw[i]).re - d[i]).abs())
        .fold(0.0, f64::max);

    let mut second_moments: f64 = 0.0;
    for i in 0..2 * n {
        for j in 0..2 * n {
            let v = 2.0 * state.pair_expectation(&ops[i], &ops[j]).re;
            second_moments = second_moments.max((v - g[(i, j)]).abs());
        }
    }

    let w = omega(n);
    let d_bar = -(&w * d);
    let g_bar = &w * g * w.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut characteristic: f64 = 0.0;
    for _ in 0..CHARACTERISTIC_SAMPLES {
        let dir = DVector::from_fn(2 * n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let radius = 2.0 * rng.random::<f64>();
        let xi = dir.normalize() * radius;
        let gen = weyl_generator(&raw, &xi);
        let chi: Complex64 = state
            .components
            .iter()
            .map(|(p, psi)| (psi.adjoint() * expmv(&gen, psi))[(0, 0)] * *p)
            .sum();
        let expected = Complex64::new(-0.25 * (xi.transpose() * &g_bar * &xi)[(0, 0)], xi.dot(&d_bar)).exp();
        characteristic = characteristic.max((chi - expected).norm());
    }

    // pair operators P_ij = R̃ⁱ∘R̃ʲ; tr[ρ P_ij ∘ P_kl] = Re tr[ρ P_ij P_kl]
    let dim2 = 2 * n;
    let mut pairs = Vec::with_capacity(dim2 * dim2);
    for i in 0..dim2 {
        for j in 0..dim2 {
            let p = ops[i].mul(&ops[j]).add_scaled(&ops[j].mul(&ops[i]), Complex64::new(1.0, 0.0));
            pairs.push(p.scaled(Complex64::new(0.5, 0.0)));
        }
    }
    let mut fourth_moments: f64 = 0.0;
    for i in 0..dim2 {
        for j in i..dim2 {
            for k in 0..dim2 {
                for l in k..dim2 {
                    let v = state.pair_expectation(&pairs[i * dim2 + j], &pairs[k * dim2 + l]).re;
                    let expected = gaussian_fourth_moment(g, i, j, k, l);
                    fourth_moments = fourth_moments.max((v - expected).abs());
                }
            }
        }
    }

    Ok(IdentityReport {
        first_moments,
        second_moments,
        characteristic,
        fourth_moments,
        tail_mass: state.tail_mass,
    })
}
