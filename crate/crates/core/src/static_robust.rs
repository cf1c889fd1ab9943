//! Static robust estimation: the nominal Bayes estimator and the
//! least-favorable statistics inside a τ-divergence ball.
//!
//! Only the error covariance `P = K_x - K_xy K_y⁻¹ K_yx` matters to the
//! least-favorable law: with `P = L Lᵀ`,
//!
//! ```text
//! P̃ = L (I - (1-τ)/λ · LᵀL)^{1/(τ-1)} Lᵀ     (τ < 1)
//! P̃ = L exp(LᵀL / λ) Lᵀ                       (τ = 1)
//! ```
//!
//! and the divergence it spends is `Σ_i γ(λ, d_i)` over the eigenvalues `d_i`
//! of `P`, strictly decreasing from `+∞` at `λ = (1-τ)‖P‖` to `0` at `λ = ∞`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::bisect;
use crate::divergence::{self, covariance_term_log};
use crate::entropy;
use crate::error::{check_tau, Error, Result};
use crate::linalg::{self, Field, SymMatrix};
use crate::models::{BallMode, GaussianPair, JointGaussian, TauBall};
use crate::sampling;

pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Condition number above which `K_y` (or `Σ_y(θ)`) counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// `g(y) = gain · y + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineEstimator {
    pub gain: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl AffineEstimator {
    pub fn estimate(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.gain * y + &self.offset
    }

    /// `[I  -G]`.
    pub fn error_map(&self) -> DMatrix<f64> {
        let (n, p) = self.gain.shape();
        let mut a = DMatrix::zeros(n, n + p);
        a.view_mut((0, 0), (n, n)).fill_with_identity();
        a.view_mut((0, n), (n, p)).copy_from(&(-&self.gain));
        a
    }
}

fn gain_of(model: &JointGaussian) -> Result<DMatrix<f64>> {
    let b = model.blocks();
    let (ky_inv, _) = linalg::hermitian_inverse(&b.y, MAX_CONDITION)?;
    Ok(&b.xy * ky_inv)
}

pub fn bayes_estimator(model: &JointGaussian) -> Result<AffineEstimator> {
    let gain = gain_of(model)?;
    let offset = model.mean_x() - &gain * model.mean_y();
    Ok(AffineEstimator { gain, offset })
}

/// Schur complement `K_x - K_xy K_y⁻¹ K_yx`.
pub fn nominal_error_cov(model: &JointGaussian) -> Result<SymMatrix> {
    let b = model.blocks();
    let gain = gain_of(model)?;
    Ok(linalg::hermitian_part(&(&b.x - gain * b.yx())))
}

/// Mean square error `J(f̃, g) = ‖E[e]‖² + tr Cov[e]` of `g` under `actual`.
pub fn mse(actual: &JointGaussian, g: &AffineEstimator) -> f64 {
    let a = g.error_map();
    let me = &a * actual.mean() - &g.offset;
    me.norm_squared() + (&a * actual.cov() * a.transpose()).trace()
}

/// Smallest admissible multiplier bound `(1-τ)·norm`.
pub fn multiplier_bound(norm: f64, tau: f64) -> f64 {
    (1.0 - tau) * norm
}

fn check_multiplier(lambda: f64, bound: f64) -> Result<()> {
    if lambda > bound && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InfeasibleMultiplier { lambda, bound })
    }
}

/// `ln` of the eigenvalue of `L⁻¹P̃L⁻ᵀ` paired with eigenvalue `d` of `LᵀL`.
fn log_inflation(lambda: f64, d: f64, tau: f64) -> f64 {
    if tau == 1.0 {
        d / lambda
    } else {
        (-(1.0 - tau) * d / lambda).ln_1p() / (tau - 1.0)
    }
}

/// Least-favorable error covariance built from any square factor `L` of the
/// nominal error covariance (`P = LL*`). Real input gives `P̃`, complex input
/// gives `Σ̃_e(θ)` at one frequency.
pub fn least_favorable_from_factor<T: Field>(
    factor: &DMatrix<T>,
    lambda: f64,
    tau: f64,
) -> Result<DMatrix<T>> {
    check_tau(tau)?;
    let gram = linalg::hermitian_part(&(factor.adjoint() * factor));
    let eig = linalg::eigen(&gram)?;
    check_multiplier(lambda, multiplier_bound(eig.max_value(), tau))?;
    let inner = eig.apply(|d| log_inflation(lambda, d, tau).exp())?;
    Ok(linalg::hermitian_part(&(factor * inner * factor.adjoint())))
}

/// `P̃` from `P` through its lower Cholesky factor.
pub fn lf_error_cov(p: &SymMatrix, lambda: f64, tau: f64) -> Result<SymMatrix> {
    let l = linalg::square_root_factor(p)?;
    least_favorable_from_factor(&l, lambda, tau)
}

/// `γ(λ, d)`: divergence contributed by one eigenvalue `d` of `P`.
/// `+∞` outside the feasible range.
pub fn gamma(lambda: f64, d: f64, tau: f64) -> f64 {
    if lambda <= multiplier_bound(d, tau) || lambda <= 0.0 {
        return f64::INFINITY;
    }
    covariance_term_log(log_inflation(lambda, d, tau), tau)
}

pub(crate) fn gamma_sum(values: &[f64], lambda: f64, tau: f64) -> f64 {
    values.iter().map(|&d| gamma(lambda, d, tau)).sum()
}

/// `D_τ(f̃°‖f)` as a function of the multiplier.
pub fn divergence_at_lambda(p: &SymMatrix, lambda: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let eig = linalg::check_positive_definite(p)?;
    check_multiplier(lambda, multiplier_bound(eig.max_value(), tau))?;
    Ok(gamma_sum(eig.values.as_slice(), lambda, tau))
}

/// Multiplier `λ > (1-τ)‖P‖` whose least-favorable law sits on the ball
/// boundary `D_τ = c`.
pub fn solve_lambda(p: &SymMatrix, c: f64, tau: f64, rel_tol: f64) -> Result<f64> {
    check_tau(tau)?;
    let eig = linalg::check_positive_definite(p)?;
    let d: Vec<f64> = eig.values.iter().copied().collect();
    bisect::solve_decreasing(
        |lam| gamma_sum(&d, lam, tau),
        multiplier_bound(eig.max_value(), tau),
        c,
        rel_tol,
    )
}

/// `tr(P̃ - P)` at multiplier `λ` from the eigenvalues of `P`.
pub(crate) fn delta_mse_sum(values: &[f64], lambda: f64, tau: f64) -> f64 {
    values
        .iter()
        .map(|&d| {
            if lambda <= multiplier_bound(d, tau) {
                f64::INFINITY
            } else {
                d * log_inflation(lambda, d, tau).exp_m1()
            }
        })
        .sum()
}

/// Tolerance `c` (and its multiplier) whose least-favorable law raises the
/// MSE by exactly `delta_mse`.
pub fn calibrate_tolerance(p: &SymMatrix, tau: f64, delta_mse: f64, rel_tol: f64) -> Result<(f64, f64)> {
    check_tau(tau)?;
    let eig = linalg::check_positive_definite(p)?;
    let d: Vec<f64> = eig.values.iter().copied().collect();
    let bound = multiplier_bound(eig.max_value(), tau);
    let lambda = bisect::solve_decreasing(|l| delta_mse_sum(&d, l, tau), bound, delta_mse, rel_tol)?;
    Ok((gamma_sum(&d, lambda, tau), lambda))
}

/// Least-favorable statistics of a static problem.
#[derive(Debug, Clone)]
pub struct WorstCaseStatic {
    pub tau: f64,
    /// `+∞` for the degenerate `c = 0` ball.
    pub lambda: f64,
    /// Divergence between the least-favorable and nominal laws.
    pub implied_c: f64,
    pub nominal_p: SymMatrix,
    pub worst_p: SymMatrix,
    /// Nominal law with only the `x` block of the covariance replaced.
    pub worst_joint: JointGaussian,
    pub delta_mse: f64,
}

pub fn worst_case_static(model: &JointGaussian, ball: &TauBall, rel_tol: f64) -> Result<WorstCaseStatic> {
    let tau = ball.tau();
    let p = nominal_error_cov(model)?;
    let eig = linalg::check_positive_definite(&p)?;
    let d: Vec<f64> = eig.values.iter().copied().collect();
    let bound = multiplier_bound(eig.max_value(), tau);

    let (lambda, implied_c) = match ball.mode() {
        BallMode::Hard { c: 0.0 } => (f64::INFINITY, 0.0),
        BallMode::Hard { c } => {
            let lambda = bisect::solve_decreasing(|l| gamma_sum(&d, l, tau), bound, c, rel_tol)?;
            (lambda, gamma_sum(&d, lambda, tau))
        }
        BallMode::Soft { lambda } => {
            check_multiplier(lambda, bound)?;
            (lambda, gamma_sum(&d, lambda, tau))
        }
    };

    let worst_p = if lambda.is_infinite() {
        p.clone()
    } else {
        lf_error_cov(&p, lambda, tau)?
    };
    let b = model.blocks();
    let explained = &b.x - &p;
    let worst_joint = model.with_x_block(&linalg::hermitian_part(&(&worst_p + explained)))?;
    let delta_mse = (&worst_p - &p).trace();
    Ok(WorstCaseStatic {
        tau,
        lambda,
        implied_c,
        nominal_p: p,
        worst_p,
        worst_joint,
        delta_mse,
    })
}

/// Outcome of [`saddle_point_check`]. Violations are clipped at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleReport {
    /// Sampled laws that landed inside the ball.
    pub accepted: usize,
    pub proposals: usize,
    pub estimators: usize,
    /// `max J(f̃, g°) - J(f̃°, g°)` over the accepted laws.
    pub upper_violation: f64,
    /// `max J(f̃°, g°) - J(f̃°, g)` over the perturbed estimators.
    pub lower_violation: f64,
}

/// Randomized check of `J(f̃, g°) ≤ J(f̃°, g°) ≤ J(f̃°, g)` for a hard-ball
/// solution: `n_laws` laws are rejection-sampled from the ball around
/// `model` (at most `100·n_laws` proposals) and `n_estimators` affine
/// estimators are drawn around the Bayes estimator.
pub fn saddle_point_check<R: Rng + ?Sized>(
    model: &JointGaussian,
    worst: &WorstCaseStatic,
    c: f64,
    n_laws: usize,
    n_estimators: usize,
    rng: &mut R,
) -> Result<SaddleReport> {
    let tau = worst.tau;
    let g0 = bayes_estimator(model)?;
    let value = mse(&worst.worst_joint, &g0);

    let shift_max = 1.5 * (c * (1.0 - tau)).sqrt();
    let spread_max = 1.5 * (0.5 * c).sqrt();
    let mut upper = 0.0f64;
    let mut accepted = 0;
    let mut proposals = 0;
    while accepted < n_laws && proposals < 100 * n_laws {
        proposals += 1;
        let shift = if shift_max > 0.0 {
            rng.random_range(0.0..shift_max)
        } else {
            0.0
        };
        let spread = if spread_max > 0.0 {
            rng.random_range(0.0..spread_max)
        } else {
            0.0
        };
        let candidate = sampling::perturb(rng, model, shift, spread)?;
        let pair = GaussianPair::new(model.clone(), candidate.clone())?;
        if divergence::tau_divergence(&pair, tau)?.value() > c {
            continue;
        }
        accepted += 1;
        upper = upper.max(mse(&candidate, &g0) - value);
    }

    let mut lower = 0.0f64;
    let scale = g0.gain.norm().max(g0.offset.norm()).max(1.0);
    for _ in 0..n_estimators {
        let eps = rng.random_range(1e-6..0.5) * scale;
        let g = entropy::perturbed_estimator(rng, &g0, eps);
        lower = lower.max(value - mse(&worst.worst_joint, &g));
    }
    Ok(SaddleReport {
        accepted,
        proposals,
        estimators: n_estimators,
        upper_violation: upper,
        lower_violation: lower,
    })
}

/// One point of a ΔMSE-versus-tolerance sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub c: f64,
    pub lambda: f64,
    pub delta_mse: f64,
}

/// `steps` log-spaced values from `min` to `max` inclusive.
pub fn log_spaced(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![min];
    }
    let (a, b) = (min.ln(), max.ln());
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                (a + (b - a) * i as f64 / (steps - 1) as f64).exp()
            }
        })
        .collect()
}

/// ΔMSE over every `(τ, c)` pair; rows ordered by τ, then by c.
pub fn delta_mse_sweep(p: &SymMatrix, taus: &[f64], cs: &[f64], rel_tol: f64) -> Result<Vec<SweepRow>> {
    for &tau in taus {
        check_tau(tau)?;
    }
    let eig = linalg::check_positive_definite(p)?;
    let d: Vec<f64> = eig.values.iter().copied().collect();
    let jobs: Vec<(f64, f64)> = taus
        .iter()
        .flat_map(|&t| cs.iter().map(move |&c| (t, c)))
        .collect();
    jobs.par_iter()
        .map(|&(tau, c)| {
            let bound = multiplier_bound(eig.max_value(), tau);
            let lambda = bisect::solve_decreasing(|l| gamma_sum(&d, l, tau), bound, c, rel_tol)?;
            let worst = lf_error_cov(p, lambda, tau)?;
            Ok(SweepRow {
                tau,
                c,
                lambda,
                delta_mse: (worst - p).trace(),
            })
        })
        .collect()
}

/// Boundary of the scalar ball `{(m̃, K̃) : D_τ = c}` around `(mean, var)`.
///
/// `m̃` is scanned over `n_points` evenly spaced values of its feasible
/// interval; at each one the two variance roots are found by bisection. The
/// result is a closed polyline: upper branch left to right, then the lower
/// branch right to left. Lower roots are absent where the remaining budget
/// exceeds the divergence of a vanishing variance (only possible for τ > 0).
pub fn ball_boundary_scalar(
    mean: f64,
    var: f64,
    tau: f64,
    c: f64,
    n_points: usize,
) -> Result<Vec<(f64, f64)>> {
    check_tau(tau)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance c must be positive, got {c}"
        )));
    }
    if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need a finite mean and a positive variance, got ({mean}, {var})"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidParameter("n_points must be at least 2".into()));
    }
    let weight = if tau == 1.0 {
        f64::INFINITY
    } else if tau == 0.0 {
        1.0
    } else {
        divergence::mean_weight(tau)
    };
    let radius = if tau == 1.0 {
        0.0
    } else {
        (c * var / weight).sqrt()
    };
    let means: Vec<f64> = if radius == 0.0 {
        vec![mean]
    } else {
        (0..n_points)
            .map(|i| mean - radius + 2.0 * radius * i as f64 / (n_points - 1) as f64)
            .collect()
    };
    // covariance term at K̃ → 0
    let floor = if tau == 0.0 { f64::INFINITY } else { 1.0 / tau };

    let mut upper = Vec::with_capacity(means.len());
    let mut lower = Vec::with_capacity(means.len());
    for &mt in &means {
        let dm = mt - mean;
        let mean_part = if radius == 0.0 {
            0.0
        } else {
            weight * dm * dm / var
        };
        let budget = (c - mean_part).max(0.0);
        if budget == 0.0 {
            upper.push((mt, var));
            continue;
        }
        let term = |l: f64| covariance_term_log(l, tau) - budget;
        let mut hi = 1.0;
        while term(hi) < 0.0 {
            hi *= 2.0;
        }
        upper.push((mt, var * bisect::bisect_increasing(term, 0.0, hi).exp()));
        if budget < floor {
            let mut lo = -1.0;
            while term(lo) < 0.0 {
                lo *= 2.0;
            }
            // decreasing on l < 0: flip sign to reuse the increasing bisection
            let l = bisect::bisect_increasing(|l| -term(l), lo, 0.0);
            lower.push((mt, var * l.exp()));
        }
    }
    lower.reverse();
    upper.extend(lower);
    Ok(upper)
}
