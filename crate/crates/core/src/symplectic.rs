//! Phase-space conventions and symplectic primitives.
//!
//! Canonical operators are ordered `R = (Q₁..Q_n, P₁..P_n)` with
//! `[Rⁱ, Rʲ] = i ωⁱʲ` and `ω = [[0, I], [−I, 0]]`. Covariance matrices are
//! normalized so that the vacuum has `Γ = I`, i.e. `Γⁱʲ = 2 tr[(Rⁱ−dⁱ)∘(Rʲ−dʲ) ρ]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    check_finite, check_square, inverse, max_abs, paired_diagonal, sorted_symmetric_eigen,
    symmetric_function, symmetrize,
};

/// Default tolerance used when a caller does not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The symplectic form `ω` of `n` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticForm {
    n: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `Ω = ω⁻¹ = −ω`.
    pub fn inverse(&self) -> DMatrix<f64> {
        -&self.matrix
    }
}

/// Returns `ω` for `n ≥ 1` modes.
pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    Ok(SymplecticForm {
        n,
        matrix: omega(n),
    })
}

pub(crate) fn omega(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if c == r + n {
            1.0
        } else if r == c + n {
            -1.0
        } else {
            0.0
        }
    })
}

/// Second moments of an `n`-mode state. Construction guarantees a symmetric,
/// finite matrix obeying the uncertainty relation `Γ + iω ⪰ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    gamma: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Validates `gamma` against the uncertainty relation with [`DEFAULT_TOL`].
    pub fn new(n: usize, gamma: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(n, gamma, DEFAULT_TOL)
    }

    pub fn with_tolerance(n: usize, gamma: DMatrix<f64>, tol: f64) -> Result<Self> {
        let diag = validate_covariance(n, &gamma, tol)?;
        if !diag.valid {
            return Err(Error::InvalidState {
                nu_min: diag.nu_min,
                asymmetry: diag.asymmetry,
            });
        }
        Ok(Self {
            n,
            gamma: symmetrize(&gamma),
        })
    }

    /// Infers `n` from the matrix dimension.
    pub fn from_matrix(gamma: DMatrix<f64>) -> Result<Self> {
        if !gamma.nrows().is_multiple_of(2) || gamma.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance matrix must have even positive dimension, got {}",
                gamma.nrows()
            )));
        }
        Self::new(gamma.nrows() / 2, gamma)
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            n,
            gamma: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Product of thermal modes with the given symplectic eigenvalues.
    pub fn thermal(nu: &[f64]) -> Result<Self> {
        Self::new(nu.len(), paired_diagonal(nu))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.gamma
    }

    /// Symplectic eigenvalues, descending.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(williamson_unchecked(&self.gamma)?.nu)
    }

    /// `S Γ Sᵀ` for a symplectic `S` (not checked).
    pub fn transformed(&self, s: &DMatrix<f64>) -> Result<Self> {
        check_square(s, 2 * self.n, "symplectic transformation")?;
        Self::new(self.n, s * &self.gamma * s.transpose())
    }

    /// Crate-internal constructor for matrices already known to be valid.
    pub(crate) fn trusted(n: usize, gamma: DMatrix<f64>) -> Self {
        Self {
            n,
            gamma: symmetrize(&gamma),
        }
    }
}

/// First moments `d` (length `2n`, finite).
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementVector(DVector<f64>);

impl DisplacementVector {
    pub fn new(n: usize, d: DVector<f64>) -> Result<Self> {
        if d.len() != 2 * n {
            return Err(Error::Dimension(format!(
                "displacement must have length {}, got {}",
                2 * n,
                d.len()
            )));
        }
        if !d.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("displacement has non-finite entries".into()));
        }
        Ok(Self(d))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DVector::zeros(2 * n))
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Outcome of [`validate_covariance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceDiagnostics {
    pub valid: bool,
    /// Smallest symplectic eigenvalue (0 when Γ is not positive definite).
    pub nu_min: f64,
    /// Largest entry of `|Γ − Γᵀ|`.
    pub asymmetry: f64,
}

/// Checks symmetry and the uncertainty relation (`ν_min ≥ 1 − tol`).
pub fn validate_covariance(n: usize, gamma: &DMatrix<f64>, tol: f64) -> Result<CovarianceDiagnostics> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    check_square(gamma, 2 * n, "covariance matrix")?;
    check_finite(gamma, "covariance matrix")?;
    let asymmetry = max_abs(&(gamma - gamma.transpose()));
    let sym = symmetrize(gamma);
    let (values, _) = sorted_symmetric_eigen(&sym);
    let nu_min = if values[0] <= 0.0 {
        0.0
    } else {
        williamson_unchecked(&sym)?
            .nu
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    let scale = 1.0 + max_abs(gamma);
    Ok(CovarianceDiagnostics {
        valid: asymmetry <= tol * scale && nu_min >= 1.0 - tol,
        nu_min,
        asymmetry,
    })
}

/// `Γ = S · diag(ν, ν) · Sᵀ` with `S` symplectic and `ν` descending.
#[derive(Clone, Debug)]
pub struct Williamson {
    pub s: DMatrix<f64>,
    pub nu: Vec<f64>,
}

impl Williamson {
    pub fn n(&self) -> usize {
        self.nu.len()
    }

    /// `S diag(ν, ν) Sᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.s * paired_diagonal(&self.nu) * self.s.transpose()
    }

    /// `S⁻¹`, computed from the symplectic identity `S⁻¹ = −ω Sᵀ ω`.
    pub fn s_inverse(&self) -> DMatrix<f64> {
        let w = omega(self.n());
        -(&w * self.s.transpose() * &w)
    }

    /// Max-entry errors of `SωSᵀ − ω` and `S diag(ν,ν) Sᵀ − Γ`.
    pub fn errors(&self, gamma: &DMatrix<f64>) -> (f64, f64) {
        let w = omega(self.n());
        let symp = max_abs(&(&self.s * &w * self.s.transpose() - &w));
        let rec = max_abs(&(self.reconstruct() - gamma));
        (symp, rec)
    }
}

/// Williamson decomposition of a valid covariance matrix.
///
/// The symplectic eigenvalues are the moduli of the spectrum of `Γω`; the
/// frame is built from the Hermitian matrix `i Γ^{-1/2} ω Γ^{-1/2}`, whose
/// positive-eigenvalue eigenvectors `x + iy` give the canonical pairs
/// `(√2 x, −√2 y)`. Degenerate clusters come out orthonormal from the Hermitian
/// solver, so no extra pairing step is needed. When the reconstruction misses
/// `tol`, the decomposition is repeated once on `S⁻¹ Γ S⁻ᵀ` and composed.
pub fn williamson(gamma: &CovarianceMatrix, tol: f64) -> Result<Williamson> {
    let diag = validate_covariance(gamma.n(), gamma.matrix(), tol)?;
    if !diag.valid {
        return Err(Error::InvalidState {
            nu_min: diag.nu_min,
            asymmetry: diag.asymmetry,
        });
    }
    let g = gamma.matrix();
    let scale = 1.0 + max_abs(g);
    let mut w = williamson_unchecked(g)?;
    let within = |w: &Williamson| {
        let (symp, rec) = w.errors(g);
        let s_scale = 1.0 + max_abs(&w.s).powi(2);
        symp <= tol * s_scale && rec <= tol * scale
    };
    if !within(&w) {
        let s_inv = inverse(&w.s)?;
        let inner = williamson_unchecked(&symmetrize(&(&s_inv * g * s_inv.transpose())))?;
        w = Williamson {
            s: &w.s * inner.s,
            nu: inner.nu,
        };
        if !within(&w) {
            let (symp, rec) = w.errors(g);
            return Err(Error::Numerical(format!(
                "Williamson decomposition missed tolerance {tol:e} after refinement \
                 (symplecticity {symp:e}, reconstruction {rec:e})"
            )));
        }
    }
    Ok(w)
}

/// Decomposition for any symmetric positive-definite matrix; no validity check.
pub(crate) fn williamson_unchecked(g: &DMatrix<f64>) -> Result<Williamson> {
    let dim = g.nrows();
    let n = dim / 2;
    let (values, vectors) = sorted_symmetric_eigen(g);
    if values[0] <= 0.0 {
        return Err(Error::Numerical(format!(
            "covariance matrix is not positive definite (smallest eigenvalue {:e})",
            values[0]
        )));
    }
    let sqrt_of = |f: fn(f64) -> f64| {
        let scaled = DMatrix::from_fn(dim, dim, |r, c| vectors[(r, c)] * f(values[c]));
        symmetrize(&(scaled * vectors.transpose()))
    };
    let sqrt = sqrt_of(f64::sqrt);
    let inv_sqrt = sqrt_of(|x| 1.0 / x.sqrt());
    let a = &inv_sqrt * omega(n) * &inv_sqrt;
    let h: DMatrix<Complex64> = a.map(|x| Complex64::new(0.0, x));
    let eig = nalgebra::SymmetricEigen::new(h);

    let mut positive: Vec<usize> = (0..dim).collect();
    positive.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    positive.truncate(n);
    // ascending μ = 1/ν, i.e. descending ν
    positive.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

    let mut frame = DMatrix::zeros(dim, dim);
    let mut nu = Vec::with_capacity(n);
    for (k, &idx) in positive.iter().enumerate() {
        let mu = eig.eigenvalues[idx];
        if mu <= 0.0 {
            return Err(Error::Numerical("degenerate symplectic spectrum".into()));
        }
        nu.push(1.0 / mu);
        let col = eig.eigenvectors.column(idx);
        for r in 0..dim {
            frame[(r, k)] = std::f64::consts::SQRT_2 * col[r].re;
            frame[(r, n + k)] = -std::f64::consts::SQRT_2 * col[r].im;
        }
    }
    let inv_sqrt_nu: Vec<f64> = nu.iter().map(|v| 1.0 / v.sqrt()).collect();
    let s = sqrt * frame * paired_diagonal(&inv_sqrt_nu);
    Ok(Williamson { s, nu })
}

/// Orthogonal symplectic matrix `[[X, −Y], [Y, X]]` of the unitary `u = X + iY`.
pub fn passive_from_unitary(u: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = u.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r % n, c % n);
        match (r < n, c < n) {
            (true, true) | (false, false) => u[(i, j)].re,
            (true, false) => -u[(i, j)].im,
            (false, true) => u[(i, j)].im,
        }
    })
}

/// Inverse of [`passive_from_unitary`]: reads `u = X + iY` off the blocks.
pub fn unitary_from_passive(o: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = o.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| Complex64::new(o[(i, j)], o[(n + i, j)]))
}

/// Seeded random symplectic matrix `O₁ · diag(e^z, e^{−z}) · O₂` with Haar-random
/// passive `O₁, O₂` and squeezings `|z_k| ≤ squeeze_cap`.
pub fn random_symplectic(n: usize, seed: u64, squeeze_cap: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("mode count must be at least 1".into()));
    }
    if !(squeeze_cap >= 0.0) || !squeeze_cap.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "squeeze_cap must be finite and non-negative, got {squeeze_cap}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o1 = passive_from_unitary(&haar_unitary(n, &mut rng));
    let o2 = passive_from_unitary(&haar_unitary(n, &mut rng));
    let z: Vec<f64> = (0..n)
        .map(|_| squeeze_cap * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    Ok(o1 * squeezer(&z) * o2)
}

/// `diag(e^{z₁}..e^{z_n}, e^{−z₁}..e^{−z_n})`.
pub fn squeezer(z: &[f64]) -> DMatrix<f64> {
    let n = z.len();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        if r != c {
            0.0
        } else if r < n {
            z[r].exp()
        } else {
            (-z[r - n]).exp()
        }
    })
}

fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let ginibre = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = ginibre.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// Is `SωSᵀ = ω` within `tol` (max entry)?
pub fn is_symplectic(s: &DMatrix<f64>, tol: f64) -> bool {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return false;
    }
    let w = omega(s.nrows() / 2);
    max_abs(&(s * &w * s.transpose() - &w)) <= tol
}

/// `S = left · diag(e^z, e^{−z}) · right`, with `left`, `right` orthogonal symplectic.
#[derive(Clone, Debug)]
pub struct EulerDecomposition {
    pub left: DMatrix<f64>,
    pub squeeze: Vec<f64>,
    pub right: DMatrix<f64>,
}

impl EulerDecomposition {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.left * squeezer(&self.squeeze) * &self.right
    }
}

/// Euler (Bloch–Messiah) decomposition via the polar form `S = P O`.
pub fn euler_decomposition(s: &DMatrix<f64>) -> Result<EulerDecomposition> {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) || s.nrows() == 0 {
        return Err(Error::Dimension("symplectic matrix must be square of even dimension".into()));
    }
    let n = s.nrows() / 2;
    let p = symmetrize(&symmetric_function(&(s * s.transpose()), f64::sqrt));
    let p_inv = symmetrize(&symmetric_function(&(s * s.transpose()), |x| 1.0 / x.sqrt()));
    let orth = &p_inv * s;
    let left = paired_eigenbasis(&p, n, 1e-9)?;
    let squeeze: Vec<f64> = (0..n)
        .map(|k| {
            let q = left.column(k);
            (q.transpose() * &p * q)[(0, 0)].ln()
        })
        .collect();
    let right = left.transpose() * orth;
    Ok(EulerDecomposition {
        left,
        squeeze,
        right,
    })
}

/// Orthogonal symplectic eigenbasis of a symmetric matrix whose eigenspaces are
/// exchanged by `v ↦ ωv` (symmetric symplectic or symmetric Hamiltonian matrices).
///
/// Columns `0..n` are eigenvectors picked in descending eigenvalue order; column
/// `n + k` is the partner `−ω q_k`. Clusters closer than `cluster_tol` (relative)
/// are treated as one eigenspace and paired greedily.
pub(crate) fn paired_eigenbasis(m: &DMatrix<f64>, n: usize, cluster_tol: f64) -> Result<DMatrix<f64>> {
    let dim = 2 * n;
    let w = omega(n);
    let (values, vectors) = sorted_symmetric_eigen(m);
    let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut remaining: Vec<usize> = (0..dim).rev().collect();
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut span: Vec<DVector<f64>> = Vec::with_capacity(dim);

    let residual = |v: DVector<f64>, span: &[DVector<f64>]| {
        let mut r = v;
        for _ in 0..2 {
            for b in span {
                let c = b.dot(&r);
                r -= b * c;
            }
        }
        r
    };

    while chosen.len() < n && !remaining.is_empty() {
        let lead = values[remaining[0]];
        let cluster: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&i| (values[i] - lead).abs() <= cluster_tol * scale)
            .collect();
        let best = cluster
            .iter()
            .map(|&i| (i, residual(vectors.column(i).into_owned(), &span)))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("cluster contains the lead index");
        if best.1.norm() <= 1e-3 {
            remaining.retain(|i| !cluster.contains(i));
            continue;
        }
        let q = best.1.normalize();
        let p = -(&w * &q);
        remaining.retain(|&i| i != best.0);
        span.push(q.clone());
        span.push(p);
        chosen.push(q);
    }
    if chosen.len() < n {
        return Err(Error::Numerical(
            "could not assemble a symplectic eigenbasis".into(),
        ));
    }
    let mut o = DMatrix::zeros(dim, dim);
    for (k, q) in chosen.iter().enumerate() {
        let p = -(&w * q);
        o.set_column(k, q);
        o.set_column(n + k, &p);
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_mode_form() {
        let w = symplectic_form(1).unwrap();
        assert_eq!(w.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        let sq = w.matrix() * w.matrix();
        assert_eq!(sq, -DMatrix::<f64>::identity(2, 2));
        assert_eq!(w.inverse(), w.matrix().transpose());
    }

    #[test]
    fn two_mode_form_blocks() {
        let w = symplectic_form(2).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(w.matrix(), &expected);
    }

    #[test]
    fn zero_modes_rejected() {
        assert!(symplectic_form(0).is_err());
        assert!(random_symplectic(0, 1, 0.1).is_err());
    }

    #[test]
    fn validate_examples() {
        let vac = validate_covariance(1, &DMatrix::identity(2, 2), 1e-9).unwrap();
        assert!(vac.valid);
        assert_abs_diff_eq!(vac.nu_min, 1.0, epsilon = 1e-12);

        let half = validate_covariance(1, &(DMatrix::identity(2, 2) * 0.5), 1e-9).unwrap();
        assert!(!half.valid);
        assert_abs_diff_eq!(half.nu_min, 0.5, epsilon = 1e-12);

        let e = std::f64::consts::E;
        let sq = DMatrix::from_row_slice(2, 2, &[e, 0.0, 0.0, 1.0 / e]);
        let d = validate_covariance(1, &sq, 1e-9).unwrap();
        assert!(d.valid);
        assert_abs_diff_eq!(d.nu_min, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn validate_dimension_mismatch() {
        assert!(matches!(
            validate_covariance(2, &DMatrix::identity(2, 2), 1e-9),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn asymmetric_matrix_is_invalid() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 2.0]);
        let d = validate_covariance(1, &m, 1e-9).unwrap();
        assert!(!d.valid);
        assert_abs_diff_eq!(d.asymmetry, 0.5);
    }

    #[test]
    fn williamson_of_thermal_is_passive() {
        let g = CovarianceMatrix::new(1, DMatrix::identity(2, 2) * 3.0).unwrap();
        let w = williamson(&g, 1e-12).unwrap();
        assert_abs_diff_eq!(w.nu[0], 3.0, epsilon = 1e-12);
        let sst = &w.s * w.s.transpose();
        assert_abs_diff_eq!(max_abs(&(sst - DMatrix::identity(2, 2))), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_abs(&(w.reconstruct() - g.matrix())), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn williamson_of_pure_squeezer() {
        let r: f64 = 0.5;
        let g = CovarianceMatrix::new(
            1,
            DMatrix::from_row_slice(2, 2, &[(2.0 * r).exp(), 0.0, 0.0, (-2.0 * r).exp()]),
        )
        .unwrap();
        let w = williamson(&g, 1e-12).unwrap();
        assert_abs_diff_eq!(w.nu[0], 1.0, epsilon = 1e-12);
        // S is diag(e^r, e^-r) up to a rotation: S Sᵀ is invariant
        let sst = &w.s * w.s.transpose();
        assert_abs_diff_eq!(max_abs(&(sst - g.matrix())), 0.0, epsilon = 1e-12);
        assert!(is_symplectic(&w.s, 1e-12));
    }

    #[test]
    fn williamson_round_trip_two_modes() {
        let s0 = random_symplectic(2, 7, 0.8).unwrap();
        let gamma = &s0 * paired_diagonal(&[2.5, 1.3]) * s0.transpose();
        let g = CovarianceMatrix::new(2, gamma.clone()).unwrap();
        let w = williamson(&g, 1e-10).unwrap();
        assert_abs_diff_eq!(w.nu[0], 2.5, epsilon = 1e-10);
        assert_abs_diff_eq!(w.nu[1], 1.3, epsilon = 1e-10);
        let (symp, rec) = w.errors(&gamma);
        assert!(symp < 1e-10 && rec < 1e-10, "{symp:e} {rec:e}");
    }

    #[test]
    fn williamson_degenerate_cluster() {
        let s0 = random_symplectic(3, 11, 0.6).unwrap();
        let gamma = &s0 * paired_diagonal(&[2.0, 2.0, 1.0]) * s0.transpose();
        let g = CovarianceMatrix::new(3, gamma.clone()).unwrap();
        let w = williamson(&g, 1e-10).unwrap();
        let (symp, rec) = w.errors(&gamma);
        assert!(symp < 1e-10 && rec < 1e-10, "{symp:e} {rec:e}");
        assert_abs_diff_eq!(w.nu[1], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(w.nu[2], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn williamson_rejects_invalid() {
        let g = CovarianceMatrix::trusted(1, DMatrix::identity(2, 2) * 0.5);
        assert!(matches!(williamson(&g, 1e-9), Err(Error::InvalidState { .. })));
    }

    #[test]
    fn random_symplectic_contracts() {
        let a = random_symplectic(3, 42, 1.0).unwrap();
        let b = random_symplectic(3, 42, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(is_symplectic(&a, 1e-12));
        let rot = random_symplectic(1, 5, 0.0).unwrap();
        let oot = &rot * rot.transpose();
        assert_abs_diff_eq!(max_abs(&(oot - DMatrix::identity(2, 2))), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn euler_round_trip() {
        for seed in 0..10 {
            let s = random_symplectic(2, seed, 1.2).unwrap();
            let e = euler_decomposition(&s).unwrap();
            assert!(max_abs(&(e.reconstruct() - &s)) < 1e-10);
            for o in [&e.left, &e.right] {
                assert!(is_symplectic(o, 1e-10));
                assert!(max_abs(&(o * o.transpose() - DMatrix::identity(4, 4))) < 1e-10);
            }
        }
        // unsqueezed: self-partnered eigenspace of P = I
        let rot = random_symplectic(2, 3, 0.0).unwrap();
        let e = euler_decomposition(&rot).unwrap();
        assert!(max_abs(&(e.reconstruct() - &rot)) < 1e-10);
        assert!(e.squeeze.iter().all(|z| z.abs() < 1e-10));
    }

    #[test]
    fn unitary_round_trip() {
        let o = random_symplectic(2, 9, 0.0).unwrap();
        let u = unitary_from_passive(&o);
        assert_abs_diff_eq!(max_abs(&(passive_from_unitary(&u) - &o)), 0.0, epsilon = 1e-14);
    }
}
