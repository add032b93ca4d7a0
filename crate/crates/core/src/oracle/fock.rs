//! Truncated Fock spaces, sparse ladder operators and exponentials of
//! quadratic generators acting on vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::symplectic::unitary_from_passive;

pub(crate) type CVector = DVector<Complex64>;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Product basis `|m₁…m_n⟩`, `0 ≤ m_k < dim`, mode 1 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    pub n: usize,
    pub dim: usize,
}

impl FockSpace {
    pub fn new(n: usize, dim: usize) -> Self {
        Self { n, dim }
    }

    pub fn total(&self) -> usize {
        self.dim.pow(self.n as u32)
    }

    pub fn index(&self, occ: &[usize]) -> usize {
        occ.iter().fold(0, |acc, m| acc * self.dim + m)
    }

    pub fn occupations(&self, mut idx: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n];
        for k in (0..self.n).rev() {
            occ[k] = idx % self.dim;
            idx /= self.dim;
        }
        occ
    }

    /// Indices of this space whose occupations all lie below `cutoff`, in the
    /// order of the smaller space `FockSpace::new(n, cutoff)`.
    pub fn window(&self, cutoff: usize) -> Vec<usize> {
        let small = FockSpace::new(self.n, cutoff);
        (0..small.total())
            .map(|i| self.index(&small.occupations(i)))
            .collect()
    }
}

/// Row-sparse complex matrix.
#[derive(Clone, Debug)]
pub struct SparseOp {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl SparseOp {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rows: (0..dim).map(|i| vec![(i, Complex64::new(1.0, 0.0))]).collect(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { rows: vec![Vec::new(); dim] }
    }

    /// Annihilation operator of mode `k`.
    pub fn lowering(space: &FockSpace, k: usize) -> Self {
        let rows = (0..space.total())
            .map(|i| {
                let mut occ = space.occupations(i);
                if occ[k] + 1 < space.dim {
                    let value = ((occ[k] + 1) as f64).sqrt();
                    occ[k] += 1;
                    vec![(space.index(&occ), Complex64::new(value, 0.0))]
                } else {
                    Vec::new()
                }
            })
            .collect();
        Self { rows }
    }

    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                rows[j].push((i, v.conj()));
            }
        }
        Self { rows }
    }

    fn compress(row: Vec<(usize, Complex64)>) -> Vec<(usize, Complex64)> {
        let mut row = row;
        row.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
        for (j, v) in row {
            match out.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => out.push((j, v)),
            }
        }
        out.retain(|e| e.1.norm() != 0.0);
        out
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, other: &SparseOp, c: Complex64) -> Self {
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let mut row = a.clone();
                row.extend(b.iter().map(|&(j, v)| (j, v * c)));
                Self::compress(row)
            })
            .collect();
        Self { rows }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| (j, v * c)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, other: &SparseOp) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|a| {
                let mut row = Vec::new();
                for &(j, va) in a {
                    row.extend(other.rows[j].iter().map(|&(k, vb)| (k, va * vb)));
                }
                Self::compress(row)
            })
            .collect();
        Self { rows }
    }

    pub fn mul_vec(&self, v: &CVector) -> CVector {
        CVector::from_iterator(
            self.dim(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(j, a)| a * v[j]).sum::<Complex64>()),
        )
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.iter().map(|e| e.1.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Canonical operators `(Q₁..Q_n, P₁..P_n)` with `Q = (a + a†)/√2`,
/// `P = (a − a†)/(i√2)`.
pub fn quadratures(space: &FockSpace) -> Vec<SparseOp> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut qs = Vec::with_capacity(space.n);
    let mut ps = Vec::with_capacity(space.n);
    for k in 0..space.n {
        let a = SparseOp::lowering(space, k);
        let ad = a.adjoint();
        qs.push(a.add_scaled(&ad, Complex64::new(1.0, 0.0)).scaled(Complex64::new(s, 0.0)));
        ps.push(a.add_scaled(&ad, Complex64::new(-1.0, 0.0)).scaled(Complex64::new(0.0, -s)));
    }
    qs.extend(ps);
    qs
}

/// `exp(G) v` by scaled Taylor series; `G` is expected anti-Hermitian.
pub fn expmv(g: &SparseOp, v: &CVector) -> CVector {
    let steps = g.inf_norm().ceil().max(1.0) as usize;
    let mut out = v.clone();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..=200 {
            term = g.mul_vec(&term) / Complex64::new((k * steps) as f64, 0.0);
            acc += &term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Generator of the passive unitary with `U†aU = u a` for `u` read off the
/// orthogonal symplectic `o`: `G = i Σ H_kl a_k† a_l` with `e^{iH} = u`.
pub fn passive_generator(space: &FockSpace, o: &DMatrix<f64>) -> SparseOp {
    let u = unitary_from_passive(o);
    let h = unitary_log(&u);
    let n = space.n;
    let lowers: Vec<SparseOp> = (0..n).map(|k| SparseOp::lowering(space, k)).collect();
    let mut g = SparseOp::zeros(space.total());
    for k in 0..n {
        let raise = lowers[k].adjoint();
        for l in 0..n {
            if h[(k, l)].norm() > 0.0 {
                g = g.add_scaled(&raise.mul(&lowers[l]), I * h[(k, l)]);
            }
        }
    }
    g
}

/// `exp(G)` for a generator that conserves the total photon number, stored as
/// one dense unitary per number sector of the truncated space.
#[derive(Clone, Debug)]
pub struct SectorUnitary {
    sectors: Vec<(Vec<usize>, DMatrix<Complex64>)>,
}

impl SectorUnitary {
    /// `g` must be anti-Hermitian and must not couple different sectors.
    pub fn new(space: &FockSpace, g: &SparseOp) -> Self {
        let mut by_total: Vec<Vec<usize>> = Vec::new();
        for i in 0..space.total() {
            let total: usize = space.occupations(i).iter().sum();
            if by_total.len() <= total {
                by_total.resize(total + 1, Vec::new());
            }
            by_total[total].push(i);
        }
        let mut local = vec![0; space.total()];
        let sectors = by_total
            .into_iter()
            .filter(|idx| !idx.is_empty())
            .map(|idx| {
                for (pos, &i) in idx.iter().enumerate() {
                    local[i] = pos;
                }
                let k = idx.len();
                // H = −iG restricted to the sector
                let mut h = DMatrix::<Complex64>::zeros(k, k);
                for (r, &i) in idx.iter().enumerate() {
                    for &(j, v) in &g.rows[i] {
                        debug_assert!(idx.binary_search(&j).is_ok(), "generator leaves its sector");
                        h[(r, local[j])] += -I * v;
                    }
                }
                let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
                let eig = nalgebra::SymmetricEigen::new(h);
                let phases = eig.eigenvalues.map(|l| Complex64::new(0.0, l).exp());
                let u = &eig.eigenvectors * DMatrix::from_diagonal(&phases) * eig.eigenvectors.adjoint();
                (idx, u)
            })
            .collect();
        Self { sectors }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (idx, u) in &self.sectors {
            let local = CVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]));
            if local.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let mapped = u * local;
            for (&i, z) in idx.iter().zip(mapped.iter()) {
                out[i] = *z;
            }
        }
        out
    }
}

/// Hermitian `H` with `e^{iH} = u` for unitary `u`.
fn unitary_log(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let ud = u.adjoint();
    let herm = (u + &ud) * Complex64::new(0.5, 0.0);
    let anti = (u - &ud) * Complex64::new(0.0, -0.5);
    // generic mixing weight separates eigenvalues shared by only one part
    let mix = &herm + anti * Complex64::new(0.7311 * std::f64::consts::SQRT_2, 0.0);
    let eig = nalgebra::SymmetricEigen::new(mix);
    let v = eig.eigenvectors;
    let dim = u.nrows();
    let phases = DMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            let col = v.column(r);
            let z = (col.adjoint() * u * col)[(0, 0)];
            Complex64::new(z.arg(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &v * phases * v.adjoint()
}

/// `Σ_k (z_k/2)(a_k†² − a_k²)`, which maps `Q_k → e^{z_k} Q_k` in the Heisenberg picture.
pub fn squeeze_generator(space: &FockSpace, z: &[f64]) -> SparseOp {
    let mut g = SparseOp::zeros(space.total());
    for (k, &zk) in z.iter().enumerate() {
        if zk == 0.0 {
            continue;
        }
        let a = SparseOp::lowering(space, k);
        let a2 = a.mul(&a);
        let ad2 = a2.adjoint();
        let term = ad2.add_scaled(&a2, Complex64::new(-1.0, 0.0));
        g = g.add_scaled(&term, Complex64::new(0.5 * zk, 0.0));
    }
    g
}

/// `Σ_k α_k a_k† − α_k* a_k` with `α_k = (d_qk + i d_pk)/√2`.
pub fn displacement_generator(space: &FockSpace, d: &DVector<f64>) -> SparseOp {
    let n = space.n;
    let mut g = SparseOp::zeros(space.total());
    for k in 0..n {
        let alpha = Complex64::new(d[k], d[n + k]) * std::f64::consts::FRAC_1_SQRT_2;
        if alpha.norm() == 0.0 {
            continue;
        }
        let a = SparseOp::lowering(space, k);
        g = g
            .add_scaled(&a.adjoint(), alpha)
            .add_scaled(&a, -alpha.conj());
    }
    g
}

/// `i Σ_i (ωξ)_i R_i`, the generator of the Weyl operator `W(ξ)`.
pub fn weyl_generator(ops: &[SparseOp], xi: &DVector<f64>) -> SparseOp {
    let n = ops.len() / 2;
    let wxi = crate::symplectic::omega(n) * xi;
    let mut g = SparseOp::zeros(ops[0].dim());
    for (op, c) in ops.iter().zip(wxi.iter()) {
        if *c != 0.0 {
            g = g.add_scaled(op, I * *c);
        }
    }
    g
}
