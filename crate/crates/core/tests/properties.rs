//! Property tests for the algebraic invariants of each module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use taurob::divergence::{self, ell_tau, spectral_tau_divergence, tau_divergence};
use taurob::dynamic;
use taurob::entropy::{self, tau_entropy, ErrorMoments};
use taurob::linalg::{self, HermMatrix, SymMatrix};
use taurob::models::{Blocks, GaussianPair, JointGaussian, SpectralModel, TauBall};
use taurob::static_robust::{self, AffineEstimator, DEFAULT_REL_TOL};

fn spd_from(n: usize, entries: &[f64], ridge: f64) -> SymMatrix {
    let a = DMatrix::from_row_slice(n, n, entries);
    linalg::hermitian_part(&(&a * a.transpose() + DMatrix::identity(n, n) * ridge))
}

prop_compose! {
    fn spd(max_dim: usize)(n in 1..=max_dim)(
        entries in prop::collection::vec(-1.0..1.0f64, n * n),
        ridge in 0.05..1.0f64,
        n in Just(n),
    ) -> SymMatrix {
        spd_from(n, &entries, ridge)
    }
}

prop_compose! {
    fn spd_at_least_2(max_dim: usize)(n in 2..=max_dim)(
        entries in prop::collection::vec(-1.0..1.0f64, n * n),
        ridge in 0.05..1.0f64,
        n in Just(n),
    ) -> SymMatrix {
        spd_from(n, &entries, ridge)
    }
}

prop_compose! {
    fn vector(n: usize)(v in prop::collection::vec(-1.0..1.0f64, n)) -> DVector<f64> {
        DVector::from_vec(v)
    }
}

prop_compose! {
    fn joint(max_n: usize, max_p: usize)(n in 1..=max_n, p in 1..=max_p)(
        cov in prop::collection::vec(-1.0..1.0f64, (n + p) * (n + p)),
        mean in prop::collection::vec(-1.0..1.0f64, n + p),
        ridge in 0.05..0.5f64,
        n in Just(n),
        p in Just(p),
    ) -> JointGaussian {
        let q = n + p;
        JointGaussian::new(n, p, DVector::from_vec(mean), spd_from(q, &cov, ridge)).unwrap()
    }
}

fn tau_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]
}

fn random_orthogonal(n: usize, entries: &[f64]) -> SymMatrix {
    let a = DMatrix::from_row_slice(n, n, entries) + DMatrix::identity(n, n) * 3.0;
    a.qr().q()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn congruence_with_any_root(a in spd(5), r in -2.0..2.0f64, cscale in 0.1..0.9f64) {
        let n = a.nrows();
        let norm = linalg::spectral_norm(&a).unwrap();
        let c = cscale / norm;
        let l = linalg::square_root_factor(&a).unwrap();
        let gram = l.transpose() * &l;
        let lhs = &l * linalg::apply_spectral_function(&gram, |x| (1.0 - c * x).powf(r)).unwrap() * l.transpose();
        let rhs = &a * linalg::apply_spectral_function(&a, |x| (1.0 - c * x).powf(r)).unwrap();
        prop_assert!(rel(&lhs, &rhs) < 1e-10, "n = {n}");
    }

    #[test]
    fn gram_orders_share_eigenvalues(a in spd(5)) {
        let l = linalg::square_root_factor(&a).unwrap();
        let e1 = linalg::eigen(&linalg::hermitian_part(&(l.transpose() * &l))).unwrap();
        let e2 = linalg::eigen(&linalg::hermitian_part(&(&l * l.transpose()))).unwrap();
        prop_assert!((e1.values - e2.values).norm() < 1e-12 * linalg::spectral_norm(&a).unwrap().max(1.0));
    }

    #[test]
    fn identity_function_is_identity(a in spd(6)) {
        let b = linalg::apply_spectral_function(&a, |x| x).unwrap();
        prop_assert!((b - &a).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn blocks_assemble_round_trip(m in joint(3, 3)) {
        let b = m.blocks();
        prop_assert_eq!(b.assemble(), m.cov().clone());
        prop_assert_eq!(Blocks::split(&b.assemble(), m.n()).xy, b.xy);
    }

    #[test]
    fn divergence_nonnegative_and_zero_on_diagonal(a in joint(3, 2), kt in spd(5), tau in tau_strategy()) {
        let zero = tau_divergence(&GaussianPair::new(a.clone(), a.clone()).unwrap(), tau).unwrap();
        prop_assert!(zero.value().abs() < 1e-10);
        let q = a.dim();
        prop_assume!(kt.nrows() == q);
        let other = a.with_moments(a.mean().clone(), kt).unwrap();
        let d = tau_divergence(&GaussianPair::new(a, other).unwrap(), tau).unwrap().value();
        prop_assert!(d >= 0.0);
    }

    #[test]
    fn divergence_positive_off_diagonal(m in vector(3), k in spd(3), tau in 0.0..1.0f64) {
        prop_assume!(k.nrows() == 3);
        let off_identity = (&k - DMatrix::identity(3, 3)).norm() > 1e-3 || m.norm() > 1e-3;
        let d = ell_tau(&m, &k, tau).unwrap().value();
        prop_assert!(d >= 0.0);
        if off_identity {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn divergence_continuous_at_tau_ends(m in vector(2), k in spd(2)) {
        prop_assume!(k.nrows() == 2);
        let d0 = ell_tau(&m, &k, 0.0).unwrap().value();
        let d_small = ell_tau(&m, &k, 1e-8).unwrap().value();
        prop_assert!((d0 - d_small).abs() < 1e-6 * d0.max(1.0));
        let zero = DVector::zeros(2);
        let d1 = ell_tau(&zero, &k, 1.0).unwrap().value();
        let d_near = ell_tau(&zero, &k, 1.0 - 1e-8).unwrap().value();
        prop_assert!((d1 - d_near).abs() < 1e-6 * d1.max(1.0));
    }

    #[test]
    fn same_mean_reduces_to_covariance_term(k in spd(4), tau in tau_strategy()) {
        let n = k.nrows();
        let d = ell_tau(&DVector::zeros(n), &k, tau).unwrap().value();
        let eig = linalg::eigen(&k).unwrap();
        let direct: f64 = eig.values.iter().map(|&x| divergence::covariance_term(x, tau)).sum();
        prop_assert!((d - direct).abs() < 1e-12 * direct.max(1.0));
    }

    #[test]
    fn spectral_divergence_factor_invariant(a in spd_at_least_2(3), b in spd_at_least_2(3), tau in tau_strategy(), phase in 0.0..std::f64::consts::TAU) {
        prop_assume!(a.nrows() == b.nrows());
        let n = a.nrows();
        let shared = |s: &SymMatrix| vec![linalg::to_complex(s); 8];
        let nominal = spectral_single(shared(&a));
        let actual = spectral_single(shared(&b));
        let s = spectral_tau_divergence(&actual, &nominal, tau).unwrap().value();
        // pointwise term with the Hermitian root times a unitary
        let root = linalg::square_root_factor(&linalg::to_complex(&a)).unwrap();
        let u = DMatrix::<Complex64>::from_diagonal_element(n, n, Complex64::from_polar(1.0, phase));
        let term = divergence::pointwise_covariance_term(&(root * u), &linalg::to_complex(&b), tau).unwrap();
        prop_assert!((s - term).abs() < 1e-9 * s.max(1.0));
    }

    #[test]
    fn divergence_curve_strictly_decreasing(p in spd(4), tau in tau_strategy(), step in 1.05..3.0f64) {
        let bound = static_robust::multiplier_bound(linalg::spectral_norm(&p).unwrap(), tau);
        let lam = bound + 0.05;
        let a = static_robust::divergence_at_lambda(&p, lam, tau).unwrap();
        let b = static_robust::divergence_at_lambda(&p, lam * step, tau).unwrap();
        prop_assert!(b < a);
    }

    #[test]
    fn solve_lambda_decreases_in_tolerance(p in spd(3), tau in tau_strategy(), c in 1e-3..0.5f64) {
        let l1 = static_robust::solve_lambda(&p, c, tau, 1e-12).unwrap();
        let l2 = static_robust::solve_lambda(&p, 2.0 * c, tau, 1e-12).unwrap();
        prop_assert!(l2 < l1);
    }

    #[test]
    fn worst_case_gap_and_boundary(m in joint(3, 2), tau in tau_strategy(), c in 1e-3..0.5f64) {
        let w = static_robust::worst_case_static(&m, &TauBall::hard(tau, c).unwrap(), DEFAULT_REL_TOL).unwrap();
        let gap = linalg::eigen(&(&w.worst_p - &w.nominal_p)).unwrap();
        prop_assert!(gap.min_value() >= -1e-12);
        prop_assert!((gap.values.sum() - w.delta_mse).abs() < 1e-10 * w.delta_mse.max(1.0));
        let d = tau_divergence(&GaussianPair::new(m.clone(), w.worst_joint.clone()).unwrap(), tau).unwrap();
        prop_assert!((d.value() - c).abs() < 1e-7 * c.max(1.0));
    }

    #[test]
    fn entropy_nonnegative_and_decreasing(k in spd(3), mean in vector(3), tau in tau_strategy(), step in 1.05..4.0f64) {
        let n = k.nrows();
        let e = ErrorMoments { mean: mean.rows(0, n).into_owned(), cov: k.clone() };
        let lam = (1.0 - tau) * linalg::spectral_norm(&k).unwrap() + 0.1;
        let h1 = tau_entropy(&e, lam, tau).unwrap().value;
        let h2 = tau_entropy(&e, lam * step, tau).unwrap().value;
        prop_assert!(h1 > 0.0 && h2 > 0.0);
        prop_assert!(h2 < h1);
    }

    #[test]
    fn entropy_continuous_at_tau_ends(k in spd(3), mean in vector(3)) {
        let n = k.nrows();
        let e = ErrorMoments { mean: mean.rows(0, n).into_owned(), cov: k.clone() };
        let lam = linalg::spectral_norm(&k).unwrap() + 0.5;
        let at = |t: f64| tau_entropy(&e, lam, t).unwrap().value;
        prop_assert!((at(0.0) - at(1e-8)).abs() < 1e-6 * at(0.0).max(1.0));
        prop_assert!((at(1.0) - at(1.0 - 1e-8)).abs() < 1e-6 * at(1.0).max(1.0));
    }

    #[test]
    fn bayes_estimator_minimizes_entropy(
        m in joint(2, 2),
        tau in tau_strategy(),
        dg in prop::collection::vec(-1.0..1.0f64, 6),
        scale in 1e-4..0.3f64,
    ) {
        let g = static_robust::bayes_estimator(&m).unwrap();
        let e = entropy::error_moments(&m, &g).unwrap();
        let lam = (1.0 - tau) * linalg::spectral_norm(&e.cov).unwrap() * 2.0 + 0.05;
        let h0 = tau_entropy(&e, lam, tau).unwrap().value;
        let (n, p) = (m.n(), m.p());
        let moved = AffineEstimator {
            gain: &g.gain + DMatrix::from_fn(n, p, |i, j| dg[i * p + j]) * scale,
            offset: &g.offset + DVector::from_fn(n, |i, _| dg[4 + i]) * scale,
        };
        let h = tau_entropy(&entropy::error_moments(&m, &moved).unwrap(), lam, tau).unwrap().value;
        prop_assert!(h >= h0 - 1e-12 * h0.max(1.0));
    }

    #[test]
    fn lf_error_cov_factor_free_form(p in spd(4), tau in tau_strategy(), rot in prop::collection::vec(-1.0..1.0f64, 16)) {
        let n = p.nrows();
        let lam = static_robust::multiplier_bound(linalg::spectral_norm(&p).unwrap(), tau) + 0.2;
        let chol = static_robust::lf_error_cov(&p, lam, tau).unwrap();
        let q = random_orthogonal(n, &rot[..n * n]);
        let rotated = linalg::square_root_factor(&p).unwrap() * q;
        let via = static_robust::least_favorable_from_factor(&rotated, lam, tau).unwrap();
        prop_assert!(rel(&via, &chol) < 1e-10);
    }
}

fn spectral_single(values: Vec<HermMatrix>) -> SpectralModel {
    let q = values[0].nrows();
    SpectralModel::new(q - 1, 1, DVector::zeros(q), values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_spectrum_matches_static_everywhere(m in joint(2, 2), tau in tau_strategy(), c in 1e-3..0.3f64) {
        let s = SpectralModel::constant(&m, 16).unwrap();
        let ball = TauBall::hard(tau, c).unwrap();
        let ws = static_robust::worst_case_static(&m, &ball, 1e-12).unwrap();
        let wd = dynamic::worst_case_spectral(&s, &ball, 1e-12).unwrap();
        prop_assert!((ws.lambda - wd.lambda).abs() < 1e-9 * ws.lambda);
        prop_assert!((ws.delta_mse - wd.delta_mse).abs() < 1e-9 * ws.delta_mse.max(1.0));
        for k in 0..16 {
            prop_assert!(rel(&linalg::real_part(&wd.worst_se[k]), &ws.worst_p) < 1e-9);
        }
    }

    #[test]
    fn grid_refinement_is_stable(a in 0.3..0.8f64, r in 0.5..2.0f64, tau in tau_strategy()) {
        let model = |m: usize| {
            let values = (0..m)
                .map(|k| {
                    let t = taurob::models::grid_theta(k, m);
                    let x = 0.5 / (1.0 + a * a - 2.0 * a * t.cos());
                    linalg::to_complex(&DMatrix::from_row_slice(2, 2, &[x, x, x, x + r]))
                })
                .collect();
            SpectralModel::new(1, 1, DVector::zeros(2), values).unwrap()
        };
        let ball = TauBall::hard(tau, 0.02).unwrap();
        let w1 = dynamic::worst_case_spectral(&model(512), &ball, 1e-12).unwrap();
        let w2 = dynamic::worst_case_spectral(&model(1024), &ball, 1e-12).unwrap();
        prop_assert!((w1.lambda - w2.lambda).abs() < 1e-6 * w2.lambda);
        prop_assert!((w1.delta_mse - w2.delta_mse).abs() < 1e-6 * w2.delta_mse);
    }

    #[test]
    fn spectral_gap_is_psd(a in 0.3..0.9f64, tau in tau_strategy(), c in 1e-3..0.2f64) {
        let m = 64;
        let values = (0..m)
            .map(|k| {
                let t = taurob::models::grid_theta(k, m);
                let x = 0.5 / (1.0 + a * a - 2.0 * a * t.cos());
                linalg::to_complex(&DMatrix::from_row_slice(3, 3, &[x, 0.1, x, 0.1, 1.0, 0.0, x, 0.0, x + 1.0]))
            })
            .collect();
        let s = SpectralModel::new(2, 1, DVector::zeros(3), values).unwrap();
        let w = dynamic::worst_case_spectral(&s, &TauBall::hard(tau, c).unwrap(), DEFAULT_REL_TOL).unwrap();
        prop_assert!(w.delta_mse > 0.0);
        for (x, y) in w.worst_se.iter().zip(&w.nominal_se) {
            prop_assert!(linalg::eigen(&(x - y)).unwrap().min_value() >= -1e-12);
        }
    }
}
