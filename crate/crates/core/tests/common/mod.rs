//! Seeded model generators shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gaussian_qfi::models::{builtin_family, GaussianModelPoint, ModelFamily};
use gaussian_qfi::symplectic::{random_symplectic, symplectic_form};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn family(name: &str, params: &[(&str, f64)]) -> ModelFamily {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_family(name, &p).unwrap()
}

pub fn normal_vector(len: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

pub fn random_symmetric(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

pub fn omega(n: usize) -> DMatrix<f64> {
    symplectic_form(n).unwrap().matrix().clone()
}

/// `S diag(ν, ν) Sᵀ` with `ν` drawn from `[nu_lo, nu_hi]`.
pub fn random_covariance(n: usize, seed: u64, nu_lo: f64, nu_hi: f64, cap: f64) -> (DMatrix<f64>, Vec<f64>) {
    let mut r = rng(seed ^ 0xc0ffee);
    let nu: Vec<f64> = (0..n).map(|_| r.random_range(nu_lo..=nu_hi)).collect();
    let s = random_symplectic(n, seed, cap).unwrap();
    let mut diag = nu.clone();
    diag.extend_from_slice(&nu);
    let g = &s * DMatrix::from_diagonal(&DVector::from_vec(diag)) * s.transpose();
    ((&g + g.transpose()) * 0.5, nu)
}

/// Random valid point with arbitrary symmetric `∂Γ` and nonzero `∂d`.
pub fn random_point(n: usize, seed: u64) -> GaussianModelPoint {
    let (gamma, _) = random_covariance(n, seed, 1.0, 3.0, 0.8);
    let mut r = rng(seed.wrapping_mul(31).wrapping_add(7));
    let d = normal_vector(2 * n, &mut r);
    let dd = normal_vector(2 * n, &mut r);
    let dgamma = random_symmetric(2 * n, &mut r);
    GaussianModelPoint::new(d, gamma, dd, dgamma).unwrap()
}

/// Isothermal point: `Γ = ν SSᵀ`, `∂Γ = KΓ + ΓKᵀ` with Hamiltonian `K = ωH`.
pub fn isothermal_point(n: usize, nu: f64, seed: u64, cap: f64) -> GaussianModelPoint {
    let (gamma, _) = random_covariance(n, seed, nu, nu, cap);
    let mut r = rng(seed.wrapping_add(0x150));
    let k = omega(n) * random_symmetric(2 * n, &mut r);
    let dgamma = &k * &gamma + &gamma * k.transpose();
    let dgamma = (&dgamma + dgamma.transpose()) * 0.5;
    GaussianModelPoint::new(DVector::zeros(2 * n), gamma, DVector::zeros(2 * n), dgamma).unwrap()
}
