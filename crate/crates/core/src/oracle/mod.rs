//! Brute-force reference values from truncated Fock-space density matrices.
//!
//! Nothing here uses the phase-space formulas of the rest of the crate beyond
//! the Williamson/Euler factorization needed to prepare the state: the SLD and
//! QFI are obtained from `∂ρ` and the eigenbasis of `ρ` directly. One or two
//! modes are supported.

mod checks;
mod fock;
mod state;

pub use checks::{
    convergence_probe, gaussian_fourth_moment, identity_checks, point_derivative, qfi_fock, qfi_fock_point,
    qfi_fock_with, qfi_from_derivative, sld_moments, sld_operator, sld_residual, trace_norm, ConvergenceReport,
    IdentityReport, OracleQfi, CHARACTERISTIC_SAMPLES, ORACLE_STEP,
};
pub use fock::{expmv, quadratures, FockSpace, SectorUnitary, SparseOp};
pub use state::{
    build_state, build_state_from_moments, suggested_cutoff, OracleOptions, TruncatedState, MAX_ORACLE_MODES,
    MIN_CUTOFF,
};
