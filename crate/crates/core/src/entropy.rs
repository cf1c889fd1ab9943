//! τ entropy of the estimation error and the relaxed minimax problem.
//!
//! For `g(y) = Gy + h` the nominal error `e = x - g(y)` has moments
//! `(m_e, K_e)`. With `A = 1 - (1-τ)/λ · K_e` (requires `λ > (1-τ)‖K_e‖`):
//!
//! ```text
//! τ = 0:      m_eᵀ A⁻¹ m_e - λ log det A
//! 0 < τ < 1:  m_eᵀ A⁻¹ m_e + λ/τ · tr(A^{τ/(τ-1)} - I)
//! τ = 1:      ‖m_e‖² + λ tr(exp(K_e/λ) - I)
//! ```
//!
//! The τ = 1 mean term is the scalar `‖m_e‖² = tr(m_e m_eᵀ)`.
//!
//! `H_τ(e, λ) + λc` is the optimal value of the inner maximization
//! `max_{f̃} J(f̃, g) + λ(c - D_τ(f̃‖f))`; [`lagrangian_maximizer`] returns the
//! maximizing law in closed form and [`entropy_equivalence_check`] compares
//! both sides numerically.

use nalgebra::DVector;
use rand::Rng;

use crate::divergence;
use crate::error::{check_tau, Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::models::{GaussianPair, JointGaussian};
use crate::sampling;
use crate::static_robust::{self, bayes_estimator, AffineEstimator};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMoments {
    pub mean: DVector<f64>,
    pub cov: SymMatrix,
}

/// Value of `H_τ(e, λ)`; `+∞` when the multiplier is infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub feasible: bool,
}

fn check_estimator(model: &JointGaussian, g: &AffineEstimator) -> Result<()> {
    if g.gain.shape() != (model.n(), model.p()) || g.offset.len() != model.n() {
        return Err(Error::Dimension(format!(
            "estimator has gain {:?} and offset {}, model has n={}, p={}",
            g.gain.shape(),
            g.offset.len(),
            model.n(),
            model.p()
        )));
    }
    Ok(())
}

/// Moments of `e = x - g(y)` under `model`.
pub fn error_moments(model: &JointGaussian, g: &AffineEstimator) -> Result<ErrorMoments> {
    check_estimator(model, g)?;
    let a = g.error_map();
    Ok(ErrorMoments {
        mean: &a * model.mean() - &g.offset,
        cov: linalg::hermitian_part(&(&a * model.cov() * a.transpose())),
    })
}

pub fn tau_entropy(e: &ErrorMoments, lambda: f64, tau: f64) -> Result<EntropyValue> {
    check_tau(tau)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if e.mean.len() != e.cov.nrows() {
        return Err(Error::Dimension(format!(
            "error mean has length {}, covariance is {}x{}",
            e.mean.len(),
            e.cov.nrows(),
            e.cov.ncols()
        )));
    }
    let eig = linalg::eigen(&e.cov)?;
    if eig.min_value() < -1e-12 * eig.max_value().abs().max(1.0) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min_value(),
        });
    }
    let bound = (1.0 - tau) * eig.max_value().max(0.0);
    if tau < 1.0 && lambda <= bound {
        return Ok(EntropyValue {
            value: f64::INFINITY,
            feasible: false,
        });
    }

    let proj = eig.vectors.transpose() * &e.mean;
    let mut value = 0.0;
    for (i, &d) in eig.values.iter().enumerate() {
        let d = d.max(0.0);
        let x = (1.0 - tau) * d / lambda;
        let w = proj[i] * proj[i];
        value += if tau == 1.0 { w } else { w / (1.0 - x) };
        value += if tau == 0.0 {
            -lambda * (-x).ln_1p()
        } else if tau == 1.0 {
            lambda * (d / lambda).exp_m1()
        } else {
            lambda / tau * (tau / (tau - 1.0) * (-x).ln_1p()).exp_m1()
        };
    }
    Ok(EntropyValue {
        value: value.max(0.0),
        feasible: true,
    })
}

/// `J(f̃, g) + λ(c - D_τ(f̃‖f))`; `-∞` when the divergence is infinite.
pub fn lagrangian(
    nominal: &JointGaussian,
    actual: &JointGaussian,
    g: &AffineEstimator,
    lambda: f64,
    tau: f64,
    c: f64,
) -> Result<f64> {
    let d = divergence::tau_divergence(&GaussianPair::new(nominal.clone(), actual.clone())?, tau)?;
    if d.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(static_robust::mse(actual, g) + lambda * (c - d.value()))
}

/// Closed-form maximizer over `f̃` of `J(f̃, g) + λ(c - D_τ(f̃‖f))`.
///
/// With `K_z = L Lᵀ` and `M = [I -G] L`:
/// `K̃ = L (I - (1-τ)/λ MᵀM)^{1/(τ-1)} Lᵀ` (`L exp(MᵀM/λ) Lᵀ` at τ = 1) and
/// `m̃ = m + L (λ/(1-τ) I - MᵀM)⁻¹ Mᵀ m_e` (`m̃ = m` at τ = 1).
pub fn lagrangian_maximizer(
    model: &JointGaussian,
    g: &AffineEstimator,
    lambda: f64,
    tau: f64,
) -> Result<JointGaussian> {
    check_tau(tau)?;
    let e = error_moments(model, g)?;
    let l = linalg::square_root_factor(model.cov())?;
    let m = g.error_map() * &l;
    let gram = linalg::hermitian_part(&(m.transpose() * &m));
    let eig = linalg::eigen(&gram)?;
    let bound = (1.0 - tau) * eig.max_value();
    if !(lambda > bound) || !(lambda > 0.0) {
        return Err(Error::InfeasibleMultiplier { lambda, bound });
    }
    let inner = eig.apply(|d| {
        let d = d.max(0.0);
        if tau == 1.0 {
            (d / lambda).exp()
        } else {
            ((-(1.0 - tau) * d / lambda).ln_1p() / (tau - 1.0)).exp()
        }
    })?;
    let cov = linalg::hermitian_part(&(&l * inner * l.transpose()));
    let mean = if tau == 1.0 {
        model.mean().clone()
    } else {
        let beta = lambda / (1.0 - tau);
        let resolvent = eig.apply(|d| 1.0 / (beta - d))?;
        model.mean() + &l * resolvent * m.transpose() * &e.mean
    };
    model.with_moments(mean, cov)
}

/// Outcome of [`entropy_equivalence_check`].
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    /// `H_τ(e, λ)` under the nominal law.
    pub entropy: f64,
    /// `H_τ(e, λ) + λc`.
    pub bound: f64,
    /// Lagrangian at the closed-form maximizer.
    pub at_maximizer: f64,
    /// `|at_maximizer - bound| / max(1, |bound|)`.
    pub maximizer_gap: f64,
    /// Largest Lagrangian over the random laws.
    pub max_sampled: f64,
    /// `max(0, max_sampled - bound)`.
    pub max_violation: f64,
    /// Random laws actually evaluated.
    pub samples: usize,
}

/// Check `max_{f̃} L(f̃) = H_τ(e, λ) + λc` for the nominal Bayes estimator.
pub fn entropy_equivalence_check<R: Rng + ?Sized>(
    model: &JointGaussian,
    lambda: f64,
    tau: f64,
    c: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<EquivalenceReport> {
    let g = bayes_estimator(model)?;
    entropy_equivalence_check_for(model, &g, lambda, tau, c, n_samples, rng)
}

/// Same as [`entropy_equivalence_check`] for an arbitrary affine estimator.
pub fn entropy_equivalence_check_for<R: Rng + ?Sized>(
    model: &JointGaussian,
    g: &AffineEstimator,
    lambda: f64,
    tau: f64,
    c: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<EquivalenceReport> {
    let e = error_moments(model, g)?;
    let h = tau_entropy(&e, lambda, tau)?;
    if !h.feasible {
        let norm = linalg::spectral_norm(&e.cov)?;
        return Err(Error::InfeasibleMultiplier {
            lambda,
            bound: (1.0 - tau) * norm,
        });
    }
    let bound = h.value + lambda * c;
    let best = lagrangian_maximizer(model, g, lambda, tau)?;
    let at_maximizer = lagrangian(model, &best, g, lambda, tau, c)?;

    let mut max_sampled = f64::NEG_INFINITY;
    let mut evaluated = 0;
    for i in 0..n_samples {
        let base = if i % 2 == 0 { &best } else { model };
        let shift = if tau == 1.0 && i % 3 != 0 {
            0.0
        } else {
            rng.random_range(0.0..0.5)
        };
        let spread = rng.random_range(0.0..0.5);
        // near-singular draws are not valid laws; skip them
        let candidate = match sampling::perturb(rng, base, shift, spread) {
            Ok(m) => m,
            Err(Error::Validation(_)) => continue,
            Err(e) => return Err(e),
        };
        max_sampled = max_sampled.max(lagrangian(model, &candidate, g, lambda, tau, c)?);
        evaluated += 1;
    }
    let scale = bound.abs().max(1.0);
    Ok(EquivalenceReport {
        entropy: h.value,
        bound,
        at_maximizer,
        maximizer_gap: (at_maximizer - bound).abs() / scale,
        max_sampled,
        max_violation: (max_sampled - bound).max(0.0),
        samples: evaluated,
    })
}

/// Perturbed copies of `g` used to probe minimality of the Bayes gain.
pub fn perturbed_estimator<R: Rng + ?Sized>(rng: &mut R, g: &AffineEstimator, scale: f64) -> AffineEstimator {
    let (n, p) = g.gain.shape();
    AffineEstimator {
        gain: &g.gain + sampling::normal_matrix(rng, n, p) * scale,
        offset: &g.offset + sampling::normal_vector(rng, n) * scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_vec(v.to_vec())
    }

    fn moments(m: &[f64], k: &[f64]) -> ErrorMoments {
        let n = m.len();
        ErrorMoments {
            mean: dv(m),
            cov: DMatrix::from_row_slice(n, n, k),
        }
    }

    fn model() -> JointGaussian {
        let cov = DMatrix::from_row_slice(3, 3, &[0.4, 0.1, 0.15, 0.1, 0.3, 0.05, 0.15, 0.05, 0.5]);
        JointGaussian::new(2, 1, dv(&[0.3, -0.2, 1.0]), cov).unwrap()
    }

    #[test]
    fn zero_error_has_zero_entropy() {
        for tau in [0.0, 0.5, 1.0] {
            let h = tau_entropy(&moments(&[0.0, 0.0], &[0.0; 4]), 1.0, tau).unwrap();
            assert_eq!(h.value, 0.0);
            assert!(h.feasible);
        }
    }

    #[test]
    fn scalar_log_example() {
        let h = tau_entropy(&moments(&[0.0], &[0.1]), 0.5, 0.0).unwrap();
        assert_relative_eq!(h.value, -0.5 * (0.8f64).ln(), max_relative = 1e-14);
        assert_relative_eq!(h.value, 0.111_571_775_657_104_9, max_relative = 1e-12);
    }

    #[test]
    fn infeasible_multiplier_gives_infinity() {
        let h = tau_entropy(&moments(&[0.0], &[0.2]), 0.09, 0.5).unwrap();
        assert!(!h.feasible);
        assert!(h.value.is_infinite());
    }

    #[test]
    fn bayes_error_moments() {
        let m = model();
        let g = bayes_estimator(&m).unwrap();
        let e = error_moments(&m, &g).unwrap();
        assert!(e.mean.norm() < 1e-14);
        let p = static_robust::nominal_error_cov(&m).unwrap();
        assert!((e.cov - p).norm() < 1e-14);
    }

    #[test]
    fn trivial_estimator_error_moments() {
        let m = model();
        let g = AffineEstimator {
            gain: DMatrix::zeros(2, 1),
            offset: DVector::zeros(2),
        };
        let e = error_moments(&m, &g).unwrap();
        assert_eq!(e.mean, m.mean_x());
        assert_eq!(e.cov, m.blocks().x);
    }

    #[test]
    fn entropy_dominates_nominal_mse() {
        // J(f, g) + λc ≤ H + λc with f̃ = f
        let m = model();
        let g = bayes_estimator(&m).unwrap();
        let e = error_moments(&m, &g).unwrap();
        for tau in [0.0, 0.5, 1.0] {
            let h = tau_entropy(&e, 2.0, tau).unwrap().value;
            assert!(static_robust::mse(&m, &g) <= h);
        }
    }

    #[test]
    fn maximizer_attains_entropy_bound() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let bayes = bayes_estimator(&m).unwrap();
        let off = perturbed_estimator(&mut rng, &bayes, 0.3);
        for g in [&bayes, &off] {
            for tau in [0.0, 0.3, 0.5, 1.0] {
                let r = entropy_equivalence_check_for(&m, g, 2.0, tau, 0.05, 200, &mut rng).unwrap();
                assert!(r.maximizer_gap < 1e-9, "tau {tau}: gap {}", r.maximizer_gap);
                assert!(r.max_violation < 1e-9, "tau {tau}: violation {}", r.max_violation);
            }
        }
    }

    #[test]
    fn soft_worst_case_is_the_maximizer_for_bayes() {
        use crate::models::TauBall;
        let m = model();
        let g = bayes_estimator(&m).unwrap();
        for tau in [0.0, 0.5, 1.0] {
            let w = static_robust::worst_case_static(&m, &TauBall::soft(tau, 1.5).unwrap(), 1e-9).unwrap();
            let best = lagrangian_maximizer(&m, &g, 1.5, tau).unwrap();
            assert!((w.worst_joint.cov() - best.cov()).norm() < 1e-12);
            assert!((w.worst_joint.mean() - best.mean()).norm() < 1e-14);
        }
    }
}
