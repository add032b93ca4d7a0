//! Property-based checks of the phase-space engine.

mod common;

use common::{family, isothermal_point, normal_vector, omega, random_covariance, random_point, random_symmetric, rng};
use gaussian_qfi::dgamma::{apply_dgamma, dgamma_spectrum, stein_series_solve, InverseKind};
use gaussian_qfi::homodyne::{homodyne_fisher, homodyne_plan, isothermal_frame, optimal_homodyne_fisher};
use gaussian_qfi::linalg::{frobenius_dot, max_abs};
use gaussian_qfi::models::{finite_difference_point, GaussianModelPoint};
use gaussian_qfi::sld::{photon_counting_form, qfi_general, qfi_isothermal, sld_coefficients, PhotonCounting};
use gaussian_qfi::symplectic::{
    is_symplectic, passive_from_unitary, random_symplectic, validate_covariance, williamson, CovarianceMatrix,
    DEFAULT_TOL,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn covariance_with_vacua(n: usize, vacua: usize, seed: u64) -> CovarianceMatrix {
    let (_, mut nu) = random_covariance(n, seed, 1.1, 3.0, 0.0);
    for v in nu.iter_mut().take(vacua.min(n)) {
        *v = 1.0;
    }
    let s = random_symplectic(n, seed, 0.7).unwrap();
    let mut diag = nu.clone();
    diag.extend_from_slice(&nu);
    let g = &s * DMatrix::from_diagonal(&DVector::from_vec(diag)) * s.transpose();
    CovarianceMatrix::new(n, (&g + g.transpose()) * 0.5).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn williamson_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let (g, mut nu) = random_covariance(n, seed, 1.0, 4.0, 1.0);
        let cov = CovarianceMatrix::new(n, g.clone()).unwrap();
        let w = williamson(&cov, DEFAULT_TOL).unwrap();
        let (rec, sym) = w.errors(&g);
        prop_assert!(rec < 1e-10 * (1.0 + max_abs(&g)), "reconstruction {rec}");
        prop_assert!(sym < 1e-10, "symplecticity {sym}");
        nu.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in w.nu.iter().zip(&nu) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn validation_is_symplectic_invariant(n in 1usize..=3, seed in any::<u64>()) {
        let (g, _) = random_covariance(n, seed, 1.0, 3.0, 0.8);
        let s = random_symplectic(n, seed.wrapping_add(1), 0.8).unwrap();
        prop_assert!(is_symplectic(&s, 1e-12));
        let a = validate_covariance(n, &g, DEFAULT_TOL).unwrap();
        let b = validate_covariance(n, &(&s * &g * s.transpose()), DEFAULT_TOL).unwrap();
        prop_assert_eq!(a.valid, b.valid);
        prop_assert!((a.nu_min - b.nu_min).abs() < 1e-8);
    }

    #[test]
    fn dgamma_is_self_adjoint(n in 1usize..=3, seed in any::<u64>()) {
        let cov = covariance_with_vacua(n, (seed % 2) as usize, seed);
        let mut r = rng(seed);
        let x = DMatrix::from_fn(2 * n, 2 * n, |_, _| normal_vector(1, &mut r)[0]);
        let y = random_symmetric(2 * n, &mut r);
        let lhs = frobenius_dot(&x, &apply_dgamma(&cov, &y).unwrap());
        let rhs = frobenius_dot(&apply_dgamma(&cov, &x).unwrap(), &y);
        prop_assert!(rel_close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
    }

    #[test]
    fn pseudoinverse_identities(n in 1usize..=3, vacua in 0usize..=3, seed in any::<u64>()) {
        let cov = covariance_with_vacua(n, vacua, seed);
        let spectrum = dgamma_spectrum(&cov, DEFAULT_TOL).unwrap();
        let mut r = rng(seed ^ 1);
        let x = random_symmetric(2 * n, &mut r);
        let d = |m: &DMatrix<f64>| apply_dgamma(&cov, m).unwrap();
        for kind in [InverseKind::Frame, InverseKind::MoorePenrose] {
            let pinv = |m: &DMatrix<f64>| spectrum.pseudoinverse_apply(m, kind, DEFAULT_TOL).unwrap().y;
            let dx = d(&x);
            let ddd = d(&pinv(&dx));
            prop_assert!(max_abs(&(&ddd - &dx)) < 1e-9 * (1.0 + max_abs(&dx)), "{kind:?}: D D⁻ D ≠ D");
            let px = pinv(&x);
            let again = pinv(&d(&px));
            prop_assert!(max_abs(&(&again - &px)) < 1e-9 * (1.0 + max_abs(&px)), "{kind:?}: D⁻ D D⁻ ≠ D⁻");
        }
        // Moore–Penrose: D⁻D is an orthogonal projector
        let z = random_symmetric(2 * n, &mut r);
        let proj = |m: &DMatrix<f64>| spectrum.pseudoinverse_apply(&d(m), InverseKind::MoorePenrose, DEFAULT_TOL).unwrap().y;
        let lhs = frobenius_dot(&z, &proj(&x));
        let rhs = frobenius_dot(&proj(&z), &x);
        prop_assert!(rel_close(lhs, rhs, 1e-9), "{lhs} vs {rhs}");
    }

    #[test]
    fn inverse_derivative_relation(n in 1usize..=3, seed in any::<u64>()) {
        let p = random_point(n, seed);
        let g_inv = p.gamma().matrix().clone().try_inverse().unwrap();
        let d_inv = -(&g_inv * p.dgamma() * &g_inv);
        let w = omega(n);
        let rebuilt = -apply_dgamma(p.gamma(), &d_inv).unwrap() - &w * &d_inv * w.transpose();
        prop_assert!(max_abs(&(rebuilt - p.dgamma())) < 1e-10 * (1.0 + max_abs(p.dgamma())));
    }

    #[test]
    fn stein_solution_solves_stein_equation(n in 1usize..=3, seed in any::<u64>()) {
        let (g, _) = random_covariance(n, seed, 1.3, 3.0, 0.5);
        let cov = CovarianceMatrix::new(n, g.clone()).unwrap();
        let dg = random_symmetric(2 * n, &mut rng(seed));
        let y = stein_series_solve(&cov, &dg, 1e-14, 10_000).unwrap();
        let g_inv = g.try_inverse().unwrap();
        let f = &g_inv * omega(n);
        let c = &g_inv * &dg * &g_inv;
        let lhs = &y - &f * &y * f.transpose();
        prop_assert!(max_abs(&(lhs - &c)) < 1e-10 * (1.0 + max_abs(&c)));
    }

    #[test]
    fn qfi_is_symplectic_invariant(n in 1usize..=3, seed in any::<u64>()) {
        let p = random_point(n, seed);
        let s = random_symplectic(n, seed.wrapping_mul(3), 0.8).unwrap();
        let a = qfi_general(&p).unwrap().qfi;
        let b = qfi_general(&p.transformed(&s).unwrap()).unwrap().qfi;
        prop_assert!(rel_close(a, b, 1e-9), "{a} vs {b}");
    }

    #[test]
    fn qfi_scales_quadratically(n in 1usize..=3, seed in any::<u64>(), c in -3.0f64..3.0) {
        let p = random_point(n, seed);
        let a = qfi_general(&p).unwrap();
        let b = qfi_general(&p.reparametrized(c)).unwrap();
        prop_assert!(rel_close(b.qfi, c * c * a.qfi, 1e-10));
        prop_assert!(rel_close(b.wigner_fisher, c * c * a.wigner_fisher, 1e-10));
    }

    #[test]
    fn sld_constant_centers_the_operator(n in 1usize..=3, seed in any::<u64>()) {
        let p = random_point(n, seed);
        let co = sld_coefficients(&p, DEFAULT_TOL).unwrap();
        let tr = (&co.l * p.gamma().matrix()).trace();
        prop_assert!((co.c + 0.5 * tr).abs() < 1e-12 * (1.0 + tr.abs()));
        prop_assert!(max_abs(&(&co.l - co.l.transpose())) < 1e-12 * (1.0 + max_abs(&co.l)));
    }

    #[test]
    fn isothermal_paths_agree(n in 1usize..=3, nu in 1.0f64..4.0, seed in any::<u64>()) {
        let p = isothermal_point(n, nu, seed, 0.8);
        let general = qfi_general(&p).unwrap();
        let iso = qfi_isothermal(&p).unwrap();
        prop_assert!(rel_close(general.qfi, iso.qfi, 1e-9), "{} vs {}", general.qfi, iso.qfi);
        prop_assert!(general.qfi <= general.wigner_fisher * (1.0 + 1e-12));
        let frame = isothermal_frame(&p, DEFAULT_TOL).unwrap();
        let hom = optimal_homodyne_fisher(&frame);
        let gap = (1.0 + nu * nu) / (2.0 * nu * nu);
        prop_assert!(rel_close(hom, gap * general.qfi, 1e-9), "{hom} vs {}", gap * general.qfi);
    }

    #[test]
    fn homodyne_never_beats_frame_optimum(n in 1usize..=3, nu in 1.0f64..3.0, seed in any::<u64>()) {
        let p = isothermal_point(n, nu, seed, 0.6);
        let frame = isothermal_frame(&p, DEFAULT_TOL).unwrap();
        let best = optimal_homodyne_fisher(&frame);
        for t in 0..8u64 {
            let u = random_symplectic(n, seed.wrapping_add(t), 2.0).unwrap();
            let f = homodyne_fisher(&frame, &u).unwrap();
            prop_assert!(f <= best + 1e-9, "{f} > {best}");
        }
    }

    #[test]
    fn optimum_ignores_mode_relabeling(n in 2usize..=3, nu in 1.0f64..3.0, seed in any::<u64>()) {
        let p = isothermal_point(n, nu, seed, 0.6);
        let mut u = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            u[(k, (k + 1) % n)] = Complex64::new(1.0, 0.0);
        }
        let perm = passive_from_unitary(&u);
        let a = optimal_homodyne_fisher(&isothermal_frame(&p, DEFAULT_TOL).unwrap());
        let b = optimal_homodyne_fisher(&isothermal_frame(&p.transformed(&perm).unwrap(), DEFAULT_TOL).unwrap());
        prop_assert!(rel_close(a, b, 1e-10));
    }

    #[test]
    fn plan_reconstructs_estimator(n in 1usize..=3, seed in any::<u64>()) {
        let mut r = rng(seed);
        let alpha = normal_vector(2 * n, &mut r);
        let x = normal_vector(2 * n, &mut r);
        let plan = homodyne_plan(&alpha).unwrap();
        prop_assert!(max_abs(&(&plan.v * plan.v.transpose() - DMatrix::identity(2 * n, 2 * n))) < 1e-12);
        prop_assert!(is_symplectic(&plan.v, 1e-12));
        let va = &plan.v * &alpha;
        prop_assert!(va.rows(n, n).amax() < 1e-12);
        let vx = &plan.v * &x;
        let rebuilt: f64 = (0..n).map(|k| plan.gains[k] * vx[k]).sum();
        prop_assert!((rebuilt - alpha.dot(&x)).abs() < 1e-12 * (1.0 + alpha.norm() * x.norm()));
    }

    #[test]
    fn photon_counting_reproduces_sld(n in 1usize..=3, seed in any::<u64>(), sign in prop::bool::ANY) {
        // ∂Γ = ±Γ V Γ with V positive definite makes ∂Γ⁻¹ definite
        let (g, _) = random_covariance(n, seed, 1.2, 3.0, 0.6);
        let mut r = rng(seed);
        let a = DMatrix::from_fn(2 * n, 2 * n, |_, _| normal_vector(1, &mut r)[0]);
        let v = &a * a.transpose() + DMatrix::identity(2 * n, 2 * n);
        let s = if sign { 1.0 } else { -1.0 };
        let dg = &g * v * &g * s;
        let dg = (&dg + dg.transpose()) * 0.5;
        let p = GaussianModelPoint::new(DVector::zeros(2 * n), g.clone(), DVector::zeros(2 * n), dg).unwrap();
        let co = sld_coefficients(&p, DEFAULT_TOL).unwrap();
        match photon_counting_form(&co, &p, DEFAULT_TOL).unwrap() {
            PhotonCounting::Available(f) => {
                let diag: Vec<f64> = f.alpha.iter().chain(&f.alpha).copied().collect();
                let rebuilt = f.t.transpose() * DMatrix::from_diagonal(&DVector::from_vec(diag)) * &f.t;
                prop_assert!(max_abs(&(rebuilt - &co.l)) < 1e-8 * (1.0 + max_abs(&co.l)));
                prop_assert!(f.alpha.iter().all(|x| x.signum() == s));
                prop_assert!(f.mean_photon.iter().all(|x| *x >= -1e-12));
            }
            PhotonCounting::Absent { reason } => prop_assert!(false, "absent: {reason}"),
        }
    }
}

#[test]
fn finite_difference_error_is_second_order() {
    let fam = family("phase_squeezed", &[("r", 0.5)]);
    let exact = fam.evaluate(0.3).unwrap();
    let err = |h: f64| max_abs(&(finite_difference_point(&fam, 0.3, h).unwrap().dgamma() - exact.dgamma()));
    let ratio = err(1e-2) / err(5e-3);
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    assert!(err(1e-4) < 1e-6);
}

#[test]
fn moore_penrose_matches_dense_pseudoinverse() {
    for (n, vacua, seed) in [(1, 1, 3u64), (2, 1, 4), (2, 2, 5), (3, 2, 6)] {
        let cov = covariance_with_vacua(n, vacua, seed);
        let g = cov.matrix();
        let w = omega(n);
        let rep = g.kronecker(g) - w.kronecker(&w);
        let pinv = rep.clone().pseudo_inverse(1e-8 * rep.amax()).unwrap();
        let spectrum = dgamma_spectrum(&cov, DEFAULT_TOL).unwrap();
        let x = random_symmetric(2 * n, &mut rng(seed));
        let ours = spectrum.pseudoinverse_apply(&x, InverseKind::MoorePenrose, DEFAULT_TOL).unwrap().y;
        let dense = &pinv * DVector::from_column_slice(x.as_slice());
        let dense = DMatrix::from_column_slice(2 * n, 2 * n, dense.as_slice());
        assert!(max_abs(&(&ours - &dense)) < 1e-8 * (1.0 + max_abs(&dense)), "n={n} vacua={vacua}");
    }
}
