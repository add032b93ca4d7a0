//! The superoperator `D_Γ(Y) = ΓYΓᵀ − ωYωᵀ` and its inverses.
//!
//! With `Γ = S N Sᵀ` (Williamson, `N = diag(ν, ν)`) one has
//! `D_Γ(S⁻ᵀ Z S⁻¹) = S D_N(Z) Sᵀ`, and `D_N` acts on each 2×2 mode block
//! `(i, j)` of `Z` separately: on `span{1, ω₂}` it multiplies by `νᵢνⱼ − 1`, on
//! `span{σ_z, σ_x}` by `νᵢνⱼ + 1`. Everything here is built on that frame.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::linalg::{check_finite, check_square, frobenius_dot, max_abs, mode_block, set_mode_block, symmetrize};
use crate::symplectic::{omega, williamson, CovarianceMatrix, Williamson, DEFAULT_TOL};

/// Applies `D_Γ(Y) = ΓYΓᵀ − ωYωᵀ`.
pub fn apply_dgamma(gamma: &CovarianceMatrix, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(y, 2 * gamma.n(), "argument of D_Γ")?;
    Ok(apply_map(gamma.matrix(), y))
}

/// `XYXᵀ − ωYωᵀ` for any square `X` of even dimension (no validity checks).
pub(crate) fn apply_map(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let w = omega(x.nrows() / 2);
    x * y * x.transpose() - &w * y * w.transpose()
}

/// Explicit matrix of a superoperator acting on column-major vectorized
/// `2n×2n` matrices. Memory grows like `(2n)⁴`, so construction is limited to
/// small `n`.
#[derive(Clone, Debug)]
pub struct MatrixSuperoperator {
    pub n: usize,
    pub rep: DMatrix<f64>,
}

/// Largest mode count for which [`MatrixSuperoperator::dgamma`] builds a dense rep.
pub const MAX_DENSE_MODES: usize = 4;

impl MatrixSuperoperator {
    /// `Γ⊗Γ − ω⊗ω`.
    pub fn dgamma(gamma: &CovarianceMatrix) -> Result<Self> {
        Self::dgamma_of(gamma.matrix())
    }

    /// Same as [`Self::dgamma`] for an arbitrary (possibly unphysical) matrix.
    pub fn dgamma_of(x: &DMatrix<f64>) -> Result<Self> {
        let n = x.nrows() / 2;
        if n > MAX_DENSE_MODES {
            return Err(Error::InvalidArgument(format!(
                "dense superoperator limited to {MAX_DENSE_MODES} modes, got {n}"
            )));
        }
        let w = omega(n);
        Ok(Self {
            n,
            rep: x.kronecker(x) - w.kronecker(&w),
        })
    }

    pub fn apply(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let dim = 2 * self.n;
        let v = &self.rep * DMatrix::from_column_slice(dim * dim, 1, y.as_slice());
        DMatrix::from_column_slice(dim, dim, v.as_slice())
    }
}

/// Which 2-dimensional block subspace an eigenvalue belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// `span{1, ω₂}`, eigenvalue `νᵢνⱼ − 1`.
    Plus,
    /// `span{σ_z, σ_x}`, eigenvalue `νᵢνⱼ + 1`.
    Minus,
}

/// One eigenvalue of `D_Γ` together with its frame eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub value: f64,
    pub multiplicity: usize,
    /// Ordered mode pair `(i, j)` whose 2×2 block carries the eigenvectors.
    pub modes: (usize, usize),
    pub parity: Parity,
    /// `X = S⁻ᵀ E S⁻¹` with `D_Γ(X) = value · S E Sᵀ`.
    pub primal: Vec<DMatrix<f64>>,
    /// `S E Sᵀ` for each basis element `E`.
    pub dual: Vec<DMatrix<f64>>,
    pub in_kernel: bool,
}

/// Spectral decomposition of `D_Γ` in the Williamson frame.
#[derive(Clone, Debug)]
pub struct DGammaSpectrum {
    pub williamson: Williamson,
    pub entries: Vec<SpectrumEntry>,
    pub kernel_dimension: usize,
    /// Eigenvalues with `|λ|` below this are treated as zero.
    pub threshold: f64,
    s_inv: DMatrix<f64>,
}

/// Choice of generalized inverse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InverseKind {
    /// `S⁻ᵀ D_N⁺(S⁻¹ X S⁻ᵀ) S⁻¹`: inverts the frame spectrum, dropping kernel
    /// components measured in the Williamson frame.
    #[default]
    Frame,
    /// Frobenius Moore–Penrose inverse: projects `X` onto `range D_Γ` and the
    /// result onto `(ker D_Γ)^⊥` orthogonally in `tr[XᵀY]`.
    MoorePenrose,
}

/// Output of the pseudoinverse solve.
#[derive(Clone, Debug)]
pub struct PseudoinverseSolution {
    pub y: DMatrix<f64>,
    /// `‖D_Γ(Y) − X‖_F`.
    pub residual: f64,
    /// Set when the residual exceeds `tol · (1 + ‖X‖_F)`: `X` is not in the range.
    pub kernel_overlap: bool,
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn block_basis(parity: Parity) -> [Matrix2<f64>; 2] {
    match parity {
        Parity::Plus => [
            Matrix2::new(SQRT_HALF, 0.0, 0.0, SQRT_HALF),
            Matrix2::new(0.0, SQRT_HALF, -SQRT_HALF, 0.0),
        ],
        Parity::Minus => [
            Matrix2::new(SQRT_HALF, 0.0, 0.0, -SQRT_HALF),
            Matrix2::new(0.0, SQRT_HALF, SQRT_HALF, 0.0),
        ],
    }
}

/// Kernel threshold `tol · (1 + ν_max²)`.
pub fn kernel_threshold(nu: &[f64], tol: f64) -> f64 {
    let nu_max = nu.iter().copied().fold(0.0, f64::max);
    tol * (1.0 + nu_max * nu_max)
}

/// Full spectrum of `D_Γ`: `(2n)²` eigenvalues in `2n²` labeled pairs.
pub fn dgamma_spectrum(gamma: &CovarianceMatrix, tol: f64) -> Result<DGammaSpectrum> {
    let w = williamson(gamma, tol.max(DEFAULT_TOL))?;
    Ok(DGammaSpectrum::from_williamson(w, tol))
}

impl DGammaSpectrum {
    pub fn from_williamson(williamson: Williamson, tol: f64) -> Self {
        let n = williamson.n();
        let threshold = kernel_threshold(&williamson.nu, tol);
        let s = williamson.s.clone();
        let s_inv = williamson.s_inverse();
        let mut entries = Vec::with_capacity(2 * n * n);
        let mut kernel_dimension = 0;
        for i in 0..n {
            for j in 0..n {
                let prod = williamson.nu[i] * williamson.nu[j];
                for (parity, value) in [(Parity::Plus, prod - 1.0), (Parity::Minus, prod + 1.0)] {
                    let mut primal = Vec::with_capacity(2);
                    let mut dual = Vec::with_capacity(2);
                    for b in block_basis(parity) {
                        let mut e = DMatrix::zeros(2 * n, 2 * n);
                        set_mode_block(&mut e, n, i, j, &b);
                        primal.push(s_inv.transpose() * &e * &s_inv);
                        dual.push(&s * &e * s.transpose());
                    }
                    let in_kernel = value.abs() < threshold;
                    if in_kernel {
                        kernel_dimension += 2;
                    }
                    entries.push(SpectrumEntry {
                        value,
                        multiplicity: 2,
                        modes: (i, j),
                        parity,
                        primal,
                        dual,
                        in_kernel,
                    });
                }
            }
        }
        Self {
            williamson,
            entries,
            kernel_dimension,
            threshold,
            s_inv,
        }
    }

    pub fn n(&self) -> usize {
        self.williamson.n()
    }

    /// All `(2n)²` eigenvalues with multiplicity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Frobenius-orthonormal basis of `ker D_Γ`.
    pub fn kernel_basis(&self) -> Vec<DMatrix<f64>> {
        let mut basis: Vec<DMatrix<f64>> = Vec::with_capacity(self.kernel_dimension);
        for m in self.entries.iter().filter(|e| e.in_kernel).flat_map(|e| e.primal.iter()) {
            let mut v = m.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = frobenius_dot(b, &v);
                    v -= b * c;
                }
            }
            let norm = v.norm();
            if norm > 1e-12 * m.norm() {
                basis.push(v / norm);
            }
        }
        basis
    }

    /// `D_N⁺` applied in the frame, where `Z = S⁻¹ X S⁻ᵀ`.
    fn frame_inverse(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.n();
        let nu = &self.williamson.nu;
        let z = &self.s_inv * x * self.s_inv.transpose();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let b = mode_block(&z, n, i, j);
                let a = 0.5 * (b[(0, 0)] + b[(1, 1)]);
                let w = 0.5 * (b[(0, 1)] - b[(1, 0)]);
                let c = 0.5 * (b[(0, 0)] - b[(1, 1)]);
                let e = 0.5 * (b[(0, 1)] + b[(1, 0)]);
                let prod = nu[i] * nu[j];
                let plus = prod - 1.0;
                let inv_plus = if plus.abs() < self.threshold { 0.0 } else { 1.0 / plus };
                let inv_minus = 1.0 / (prod + 1.0);
                let (a, w) = (a * inv_plus, w * inv_plus);
                let (c, e) = (c * inv_minus, e * inv_minus);
                let block = Matrix2::new(a + c, w + e, e - w, a - c);
                set_mode_block(&mut out, n, i, j, &block);
            }
        }
        self.s_inv.transpose() * out * &self.s_inv
    }

    fn project_off_kernel(&self, m: &DMatrix<f64>, kernel: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut out = m.clone();
        for k in kernel {
            out -= k * frobenius_dot(k, m);
        }
        out
    }

    /// Generalized inverse of `D_Γ` applied to `X`, with residual reporting.
    pub fn pseudoinverse_apply(&self, x: &DMatrix<f64>, kind: InverseKind, tol: f64) -> Result<PseudoinverseSolution> {
        let n = self.n();
        check_square(x, 2 * n, "argument of D_Γ⁻")?;
        check_finite(x, "argument of D_Γ⁻")?;
        let y = match kind {
            InverseKind::Frame => self.frame_inverse(x),
            InverseKind::MoorePenrose => {
                let kernel = self.kernel_basis();
                let projected = self.project_off_kernel(x, &kernel);
                self.project_off_kernel(&self.frame_inverse(&projected), &kernel)
            }
        };
        let gamma = self.williamson.reconstruct();
        let residual = (apply_map(&gamma, &y) - x).norm();
        Ok(PseudoinverseSolution {
            y,
            residual,
            kernel_overlap: residual > tol * (1.0 + x.norm()),
        })
    }
}

/// `Y = D_Γ⁻(X)` with the default (frame) generalized inverse.
///
/// `X` must be symmetric; the result then is symmetric as well.
pub fn dgamma_pseudoinverse_apply(gamma: &CovarianceMatrix, x: &DMatrix<f64>, tol: f64) -> Result<PseudoinverseSolution> {
    check_square(x, 2 * gamma.n(), "argument of D_Γ⁻")?;
    if max_abs(&(x - x.transpose())) > DEFAULT_TOL * (1.0 + max_abs(x)) {
        return Err(Error::InvalidArgument("argument of D_Γ⁻ must be symmetric".into()));
    }
    let spectrum = dgamma_spectrum(gamma, tol)?;
    let mut sol = spectrum.pseudoinverse_apply(x, InverseKind::Frame, tol)?;
    sol.y = symmetrize(&sol.y);
    Ok(sol)
}

/// Solves `Y − FYFᵀ = Γ⁻¹ ∂Γ Γ⁻¹` with `F = Γ⁻¹ω` by summing `Σₖ Fᵏ C Fᵀᵏ`.
///
/// The solution coincides with `D_Γ⁻¹(∂Γ)`. The series converges
/// geometrically with ratio `1/ν_min²`, so states with `ν_min ≤ 1 + tol` are
/// refused.
pub fn stein_series_solve(gamma: &CovarianceMatrix, dgamma: &DMatrix<f64>, tol: f64, max_terms: usize) -> Result<DMatrix<f64>> {
    let n = gamma.n();
    check_square(dgamma, 2 * n, "∂Γ")?;
    check_finite(dgamma, "∂Γ")?;
    let nu_min = gamma
        .symplectic_eigenvalues()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if nu_min <= 1.0 + tol {
        return Err(Error::precondition(
            "nu_min > 1",
            format!("Stein series needs a nonsingular state, got ν_min = {nu_min}"),
        ));
    }
    let g_inv = crate::linalg::spd_inverse(gamma.matrix())?;
    let f = &g_inv * omega(n);
    let ft = f.transpose();
    let mut term = &g_inv * dgamma * &g_inv;
    let mut y = DMatrix::zeros(2 * n, 2 * n);
    for _ in 0..max_terms {
        y += &term;
        if term.norm() <= tol * y.norm() {
            return Ok(symmetrize(&y));
        }
        term = &f * term * &ft;
    }
    Err(Error::Numerical(format!(
        "Stein series did not reach tolerance {tol:e} within {max_terms} terms"
    )))
}
