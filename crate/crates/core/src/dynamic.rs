//! Noncausal Wiener filtering and least-favorable error spectra.
//!
//! Every quantity is evaluated pointwise on the model's frequency grid
//! `θ_k = 2πk/M`; integrals over `[-π, π)` become grid means. Per-frequency
//! work runs in parallel, reductions run in index order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::bisect;
use crate::error::{check_tau, Error, Result};
use crate::linalg::{self, HermMatrix};
use crate::models::{BallMode, SpectralModel, TauBall};
use crate::static_robust::{
    delta_mse_sum, gamma_sum, least_favorable_from_factor, multiplier_bound, MAX_CONDITION,
};

/// `Λ(θ_k) = Σ_xy Σ_y⁻¹` on the grid and the offset `h = m_x - Λ(0) m_y`.
#[derive(Debug, Clone)]
pub struct FrequencyResponse {
    pub gains: Vec<DMatrix<Complex64>>,
    pub offset: DVector<f64>,
}

fn observation_inverse(model: &SpectralModel, k: usize) -> Result<HermMatrix> {
    let b = model.blocks_at(k);
    linalg::hermitian_inverse(&b.y, MAX_CONDITION)
        .map(|(inv, _)| inv)
        .map_err(|e| match e {
            Error::Singular { condition } => Error::SingularObservation {
                index: k,
                theta: model.theta(k),
                condition,
            },
            other => other,
        })
}

pub fn wiener_filter(model: &SpectralModel) -> Result<FrequencyResponse> {
    let gains = (0..model.grid_size())
        .into_par_iter()
        .map(|k| Ok(model.blocks_at(k).xy * observation_inverse(model, k)?))
        .collect::<Result<Vec<_>>>()?;
    let (n, p) = (model.n(), model.p());
    let gain0 = linalg::real_part(&gains[0]);
    let my = model.mean().rows(n, p).into_owned();
    let offset = model.mean_x() - gain0 * my;
    Ok(FrequencyResponse { gains, offset })
}

/// Pointwise Schur complement `Σ_x - Σ_xy Σ_y⁻¹ Σ_yx`.
pub fn error_spectrum(model: &SpectralModel) -> Result<Vec<HermMatrix>> {
    (0..model.grid_size())
        .into_par_iter()
        .map(|k| {
            let b = model.blocks_at(k);
            let inv = observation_inverse(model, k)?;
            Ok(linalg::hermitian_part(&(&b.x - &b.xy * inv * b.yx())))
        })
        .collect()
}

fn top_eigenvalues(se: &[HermMatrix]) -> Result<Vec<Vec<f64>>> {
    se.par_iter()
        .map(|s| {
            let eig = linalg::check_positive_definite(s)?;
            Ok(eig.values.iter().copied().collect())
        })
        .collect()
}

fn grid_max(values: &[Vec<f64>]) -> f64 {
    values.iter().map(|v| v[0]).fold(0.0, f64::max)
}

fn grid_mean_gamma(values: &[Vec<f64>], lambda: f64, tau: f64) -> f64 {
    let parts: Vec<f64> = values.par_iter().map(|d| gamma_sum(d, lambda, tau)).collect();
    parts.iter().sum::<f64>() / parts.len() as f64
}

/// `Σ̃_e(θ_k) = Γ_e (I - (1-τ)/λ Γ_e*Γ_e)^{1/(τ-1)} Γ_e*` at every frequency,
/// with `Γ_e` the Hermitian square root.
pub fn lf_error_spectrum(se: &[HermMatrix], lambda: f64, tau: f64) -> Result<Vec<HermMatrix>> {
    check_tau(tau)?;
    let values = top_eigenvalues(se)?;
    let bound = multiplier_bound(grid_max(&values), tau);
    if !(lambda > bound) {
        return Err(Error::InfeasibleMultiplier { lambda, bound });
    }
    se.par_iter()
        .map(|s| {
            let root = linalg::square_root_factor(s)?;
            least_favorable_from_factor(&root, lambda, tau)
        })
        .collect()
}

/// Rectangle-rule `S_τ` of the least-favorable spectrum at multiplier `λ`.
pub fn spectral_divergence_at_lambda(se: &[HermMatrix], lambda: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let values = top_eigenvalues(se)?;
    let bound = multiplier_bound(grid_max(&values), tau);
    if !(lambda > bound) {
        return Err(Error::InfeasibleMultiplier { lambda, bound });
    }
    Ok(grid_mean_gamma(&values, lambda, tau))
}

/// Tolerance `c` (and its multiplier) whose least-favorable spectrum raises
/// the MSE by exactly `delta_mse`.
pub fn calibrate_tolerance(
    model: &SpectralModel,
    tau: f64,
    delta_mse: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    check_tau(tau)?;
    let values = top_eigenvalues(&error_spectrum(model)?)?;
    let bound = multiplier_bound(grid_max(&values), tau);
    let m = values.len() as f64;
    let curve = |l: f64| {
        let parts: Vec<f64> = values.par_iter().map(|d| delta_mse_sum(d, l, tau)).collect();
        parts.iter().sum::<f64>() / m
    };
    let lambda = bisect::solve_decreasing(curve, bound, delta_mse, rel_tol)?;
    Ok((grid_mean_gamma(&values, lambda, tau), lambda))
}

/// Whether `1/(1-τ)` is a positive integer.
pub fn integer_order(tau: f64) -> bool {
    if tau >= 1.0 {
        return false;
    }
    let r = 1.0 / (1.0 - tau);
    (r - r.round()).abs() < 1e-9 * r
}

#[derive(Debug, Clone)]
pub struct WorstCaseSpectral {
    pub tau: f64,
    /// `+∞` for the degenerate `c = 0` ball.
    pub lambda: f64,
    pub implied_c: f64,
    pub nominal_se: Vec<HermMatrix>,
    pub worst_se: Vec<HermMatrix>,
    /// Nominal model with only `Σ_x` replaced.
    pub worst_model: SpectralModel,
    pub delta_mse: f64,
    pub warnings: Vec<String>,
}

pub fn worst_case_spectral(model: &SpectralModel, ball: &TauBall, rel_tol: f64) -> Result<WorstCaseSpectral> {
    let tau = ball.tau();
    let mut warnings = Vec::new();
    if !integer_order(tau) {
        warnings.push(format!(
            "1/(1-tau) is not a positive integer for tau = {tau}; the least-favorable spectrum may not be rational"
        ));
    }
    let se = error_spectrum(model)?;
    let values = top_eigenvalues(&se)?;
    let bound = multiplier_bound(grid_max(&values), tau);
    let (lambda, implied_c) = match ball.mode() {
        BallMode::Hard { c: 0.0 } => (f64::INFINITY, 0.0),
        BallMode::Hard { c } => {
            let lambda = bisect::solve_decreasing(|l| grid_mean_gamma(&values, l, tau), bound, c, rel_tol)?;
            (lambda, grid_mean_gamma(&values, lambda, tau))
        }
        BallMode::Soft { lambda } => {
            if !(lambda > bound) {
                return Err(Error::InfeasibleMultiplier { lambda, bound });
            }
            (lambda, grid_mean_gamma(&values, lambda, tau))
        }
    };

    let worst_se = if lambda.is_infinite() {
        se.clone()
    } else {
        lf_error_spectrum(&se, lambda, tau)?
    };
    let sigma_x: Vec<HermMatrix> = (0..model.grid_size())
        .map(|k| {
            let explained = model.blocks_at(k).x - &se[k];
            linalg::hermitian_part(&(&worst_se[k] + explained))
        })
        .collect();
    let worst_model = model.with_x_blocks(&sigma_x)?;
    let delta_mse = worst_se
        .iter()
        .zip(&se)
        .map(|(w, s)| linalg::trace_re(&(w - s)))
        .sum::<f64>()
        / se.len() as f64;
    Ok(WorstCaseSpectral {
        tau,
        lambda,
        implied_c,
        nominal_se: se,
        worst_se,
        worst_model,
        delta_mse,
        warnings,
    })
}
