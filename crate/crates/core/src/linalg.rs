//! Small dense helpers shared by the phase-space modules.
//!
//! Phase-space matrices use the ordering (Q₁..Q_n, P₁..P_n): mode `k` owns
//! rows/columns `k` and `n + k`.

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let dim = m.nrows();
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(dim, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn symmetric_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = sorted_symmetric_eigen(m);
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| vectors[(r, c)] * f(values[c]));
    scaled * vectors.transpose()
}

pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "cannot invert a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular matrix".into()))
}

/// Inverse of a symmetric positive-definite matrix through its spectrum.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, _) = sorted_symmetric_eigen(m);
    if values[0] <= 0.0 {
        return Err(Error::Numerical(format!(
            "matrix is not positive definite (smallest eigenvalue {:e})",
            values[0]
        )));
    }
    Ok(symmetrize(&symmetric_function(m, |x| 1.0 / x)))
}

/// 2×2 block of `m` coupling mode `i` (rows) with mode `j` (columns).
pub fn mode_block(m: &DMatrix<f64>, n: usize, i: usize, j: usize) -> Matrix2<f64> {
    Matrix2::new(
        m[(i, j)],
        m[(i, n + j)],
        m[(n + i, j)],
        m[(n + i, n + j)],
    )
}

pub fn set_mode_block(m: &mut DMatrix<f64>, n: usize, i: usize, j: usize, b: &Matrix2<f64>) {
    m[(i, j)] = b[(0, 0)];
    m[(i, n + j)] = b[(0, 1)];
    m[(n + i, j)] = b[(1, 0)];
    m[(n + i, n + j)] = b[(1, 1)];
}

/// Block-diagonal matrix of per-mode diagonal values: `diag(v₁..v_n, v₁..v_n)`.
pub fn paired_diagonal(values: &[f64]) -> DMatrix<f64> {
    let n = values.len();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| if r == c { values[r % n] } else { 0.0 })
}

/// Direct sum of two phase-space matrices, keeping the (Q.., P..) ordering of
/// the combined system.
pub fn phase_space_direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let na = a.nrows() / 2;
    let nb = b.nrows() / 2;
    let n = na + nb;
    let index = |k: usize, first: bool, local_n: usize| -> usize {
        // maps a local phase-space index to the global one
        let (mode, is_p) = (k % local_n, k >= local_n);
        let offset = if first { 0 } else { na };
        mode + offset + if is_p { n } else { 0 }
    };
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..2 * na {
        for c in 0..2 * na {
            out[(index(r, true, na), index(c, true, na))] = a[(r, c)];
        }
    }
    for r in 0..2 * nb {
        for c in 0..2 * nb {
            out[(index(r, false, nb), index(c, false, nb))] = b[(r, c)];
        }
    }
    out
}

pub fn phase_space_vector_sum(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let na = a.len() / 2;
    let nb = b.len() / 2;
    let mut out = DVector::zeros(2 * (na + nb));
    for k in 0..na {
        out[k] = a[k];
        out[na + nb + k] = a[na + k];
    }
    for k in 0..nb {
        out[na + k] = b[k];
        out[2 * na + nb + k] = b[nb + k];
    }
    out
}

/// Frobenius inner product `tr[XᵀY]`.
pub fn frobenius_dot(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

pub(crate) fn check_square(m: &DMatrix<f64>, dim: usize, what: &str) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension(format!(
            "{what} must be {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} has non-finite entries")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_sum_interleaves_quadratures() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let b = DMatrix::from_row_slice(2, 2, &[4.0, 5.0, 5.0, 6.0]);
        let s = phase_space_direct_sum(&a, &b);
        // ordering (q1, q2, p1, p2)
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 2.0, 0.0, //
                0.0, 4.0, 0.0, 5.0, //
                2.0, 0.0, 3.0, 0.0, //
                0.0, 5.0, 0.0, 6.0,
            ],
        );
        assert_eq!(s, expected);
        let v = phase_space_vector_sum(&DVector::from_vec(vec![1.0, 2.0]), &DVector::from_vec(vec![3.0, 4.0]));
        assert_eq!(v.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn spd_inverse_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(spd_inverse(&m).is_err());
    }
}
