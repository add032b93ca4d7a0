//! Gaussian states as truncated density matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::fock::{
    displacement_generator, expmv, passive_generator, quadratures, squeeze_generator, CVector, FockSpace, SectorUnitary,
    SparseOp,
};
use crate::error::{Error, Result};
use crate::models::GaussianModelPoint;
use crate::linalg::symmetrize;
use crate::symplectic::{euler_decomposition, williamson, williamson_unchecked, CovarianceMatrix, DEFAULT_TOL};

/// Largest mode count the oracle supports.
pub const MAX_ORACLE_MODES: usize = 2;
/// Smallest accepted per-mode cutoff.
pub const MIN_CUTOFF: usize = 8;

/// Knobs of the truncated construction.
#[derive(Clone, Copy, Debug)]
pub struct OracleOptions {
    /// Extra Fock levels per mode used while applying unitaries; `None` picks
    /// `max(10, cutoff/2)`.
    pub pad: Option<usize>,
    /// Largest accepted `1 − tr ρ` inside the cutoff window.
    pub max_tail: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            pad: None,
            max_tail: 1e-6,
        }
    }
}

impl OracleOptions {
    fn padded(&self, cutoff: usize) -> usize {
        cutoff + self.pad.unwrap_or_else(|| (cutoff / 2).max(10))
    }
}

/// `ρ` restricted to `{|m⟩ : m_k < D}` plus its pure-state decomposition in a
/// padded space, which is what operator expectations are evaluated on.
#[derive(Clone, Debug)]
pub struct TruncatedState {
    pub n: usize,
    pub cutoff: usize,
    pub rho: DMatrix<Complex64>,
    /// `1 − tr ρ` over the window (never renormalized away).
    pub tail_mass: f64,
    pub(crate) space: FockSpace,
    pub(crate) window: Vec<usize>,
    pub(crate) components: Vec<(f64, CVector)>,
}

impl TruncatedState {
    /// Padded space the components live in.
    pub fn padded_space(&self) -> &FockSpace {
        &self.space
    }

    /// Canonical operators on the padded space.
    pub fn quadratures(&self) -> Vec<SparseOp> {
        quadratures(&self.space)
    }

    /// `tr[ρ A† B]` over the mixture.
    pub fn pair_expectation(&self, a: &SparseOp, b: &SparseOp) -> Complex64 {
        self.components
            .iter()
            .map(|(p, psi)| (a.mul_vec(psi).adjoint() * b.mul_vec(psi))[(0, 0)] * *p)
            .sum()
    }

    pub fn expectation(&self, a: &SparseOp) -> Complex64 {
        self.components
            .iter()
            .map(|(p, psi)| (psi.adjoint() * a.mul_vec(psi))[(0, 0)] * *p)
            .sum()
    }

    /// Window block of `ρ A` for Hermitian `A`.
    pub fn rho_times(&self, a: &SparseOp) -> DMatrix<Complex64> {
        let w = self.window.len();
        let mut out = DMatrix::zeros(w, w);
        for (p, psi) in &self.components {
            let apsi = a.mul_vec(psi);
            let left = CVector::from_iterator(w, self.window.iter().map(|&i| psi[i]));
            let right = CVector::from_iterator(w, self.window.iter().map(|&i| apsi[i]));
            out += (left * right.adjoint()) * Complex64::new(*p, 0.0);
        }
        out
    }

    /// Mean photon number of each mode.
    pub fn mean_photon(&self) -> Vec<f64> {
        (0..self.n)
            .map(|k| {
                let a = SparseOp::lowering(&self.space, k);
                self.pair_expectation(&a, &a).re
            })
            .collect()
    }
}

enum Step {
    /// Photon-number conserving, exponentiated per sector.
    Passive(SectorUnitary),
    Taylor(SparseOp),
}

/// Builds `ρ = D(d) U_S ρ_th(ν) U_S† D(d)†` from a model point's moments.
pub fn build_state(point: &GaussianModelPoint, cutoff: usize) -> Result<TruncatedState> {
    build_state_from_moments(point.d(), point.gamma(), cutoff, OracleOptions::default())
}

/// Same as [`build_state`] for bare moments.
///
/// `U_S` is applied as the Euler factors of the Williamson frame (passive,
/// single-mode squeezers, passive) on vectors in a padded Fock space; the
/// thermal state enters through its eigenvectors.
pub fn build_state_from_moments(
    d: &DVector<f64>,
    gamma: &CovarianceMatrix,
    cutoff: usize,
    opts: OracleOptions,
) -> Result<TruncatedState> {
    let frame = Frame::new(gamma, cutoff, opts)?;
    frame.build(d, gamma)
}

/// Euler factors of a reference Williamson frame `S₀`, prepared on the
/// padded space.
///
/// Nearby states are built as `U_{S₀} U_{S_rel}` with `S_rel` the Williamson
/// frame of `S₀⁻¹ΓS₀⁻ᵀ`. The frame of a state with degenerate symplectic
/// eigenvalues or squeezing is not unique, and the truncated space is not
/// invariant under that freedom; sharing `S₀` keeps finite differences of `ρ`
/// free of the resulting jumps.
pub(crate) struct Frame {
    n: usize,
    cutoff: usize,
    opts: OracleOptions,
    space: FockSpace,
    s_inv: DMatrix<f64>,
    steps: Vec<Step>,
}

fn euler_steps(space: &FockSpace, s: &DMatrix<f64>) -> Result<Vec<Step>> {
    let euler = euler_decomposition(s)?;
    Ok(vec![
        Step::Passive(SectorUnitary::new(space, &passive_generator(space, &euler.right))),
        Step::Taylor(squeeze_generator(space, &euler.squeeze)),
        Step::Passive(SectorUnitary::new(space, &passive_generator(space, &euler.left))),
    ])
}

impl Frame {
    pub(crate) fn new(gamma: &CovarianceMatrix, cutoff: usize, opts: OracleOptions) -> Result<Self> {
        let n = gamma.n();
        if n > MAX_ORACLE_MODES {
            return Err(Error::InvalidArgument(format!(
                "Fock oracle supports at most {MAX_ORACLE_MODES} modes, got {n}"
            )));
        }
        if cutoff < MIN_CUTOFF {
            return Err(Error::InvalidArgument(format!(
                "cutoff must be at least {MIN_CUTOFF}, got {cutoff}"
            )));
        }
        let w = williamson(gamma, DEFAULT_TOL)?;
        let space = FockSpace::new(n, opts.padded(cutoff));
        let steps = euler_steps(&space, &w.s)?;
        Ok(Self {
            n,
            cutoff,
            opts,
            s_inv: w.s_inverse(),
            space,
            steps,
        })
    }

    pub(crate) fn build(&self, d: &DVector<f64>, gamma: &CovarianceMatrix) -> Result<TruncatedState> {
        let n = self.n;
        if gamma.n() != n || d.len() != 2 * n {
            return Err(Error::Dimension(format!("state must have {n} modes")));
        }
        let space = &self.space;
        let relative = symmetrize(&(&self.s_inv * gamma.matrix() * self.s_inv.transpose()));
        let w = williamson_unchecked(&relative)?;
        let relative_steps = euler_steps(space, &w.s)?;
        let shift = Step::Taylor(displacement_generator(space, d));
        let steps: Vec<&Step> = relative_steps.iter().chain(&self.steps).chain([&shift]).collect();

        // thermal weights p_m = N̄^m / (N̄+1)^{m+1}, N̄ = (ν − 1)/2
        let weights: Vec<Vec<f64>> = w
            .nu
            .iter()
            .map(|nu| {
                let nbar = ((nu - 1.0) / 2.0).max(0.0);
                let mut ws = Vec::new();
                let mut p = 1.0 / (nbar + 1.0);
                let ratio = nbar / (nbar + 1.0);
                for _ in 0..space.dim {
                    if p < 1e-18 {
                        break;
                    }
                    ws.push(p);
                    p *= ratio;
                }
                ws
            })
            .collect();

        let mut supports: Vec<Vec<usize>> = vec![Vec::new()];
        for ws in &weights {
            supports = supports
                .into_iter()
                .flat_map(|occ| {
                    (0..ws.len()).map(move |m| {
                        let mut next = occ.clone();
                        next.push(m);
                        next
                    })
                })
                .collect();
        }
        let mut components = Vec::new();
        for occ in supports {
            let p: f64 = occ.iter().enumerate().map(|(k, &m)| weights[k][m]).product();
            if p < 1e-18 {
                continue;
            }
            let mut psi = CVector::zeros(space.total());
            psi[space.index(&occ)] = Complex64::new(1.0, 0.0);
            for step in &steps {
                psi = match *step {
                    Step::Passive(u) => u.apply(&psi),
                    Step::Taylor(g) if g.inf_norm() > 0.0 => expmv(g, &psi),
                    Step::Taylor(_) => psi,
                };
            }
            components.push((p, psi));
        }

        let window = space.window(self.cutoff);
        let dim = window.len();
        let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
        for (p, psi) in &components {
            let v = CVector::from_iterator(dim, window.iter().map(|&i| psi[i]));
            rho += (&v * v.adjoint()) * Complex64::new(*p, 0.0);
        }
        let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
        let tail_mass = (1.0 - rho.trace().re).max(0.0);
        if tail_mass > self.opts.max_tail {
            return Err(Error::precondition(
                "cutoff",
                format!(
                    "tail mass {tail_mass:.3e} exceeds {:.1e} at cutoff {}",
                    self.opts.max_tail, self.cutoff
                ),
            ));
        }
        Ok(TruncatedState {
            n,
            cutoff: self.cutoff,
            rho,
            tail_mass,
            space: space.clone(),
            window,
            components,
        })
    }
}

/// Per-mode cutoff `10 + 8 · max⟨N_k⟩`, with `⟨N_k⟩` read off the moments.
pub fn suggested_cutoff(point: &GaussianModelPoint) -> usize {
    let n = point.n();
    let g = point.gamma().matrix();
    let d = point.d();
    let max_n = (0..n)
        .map(|k| 0.25 * (g[(k, k)] + g[(n + k, n + k)]) - 0.5 + 0.5 * (d[k] * d[k] + d[n + k] * d[n + k]))
        .fold(0.0, f64::max);
    10 + (8.0 * max_n).ceil() as usize
}
