//! The `ℓ_τ` mismatch function and the τ divergence family between Gaussian
//! vectors and between stationary Gaussian processes.
//!
//! Both divergences compare the normalized innovation statistics `(m, K)`
//! against `(0, I)`:
//!
//! | τ | mean term | covariance term (per eigenvalue `k` of `K`) |
//! |---|-----------|---------------------------------------------|
//! | 0 | `‖m‖²` | `k - 1 - ln k` |
//! | (0,1) | `‖m‖²/(1-τ)` | `k^τ/(τ(τ-1)) + k/(1-τ) + 1/τ` |
//! | 1 | `0` if `m = 0`, else `+∞` | `k ln k - k + 1` |

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_tau, Error, Result};
use crate::linalg::{self, Field, SymMatrix};
use crate::models::{GaussianPair, SpectralModel};

/// Weight the mean term by `1` instead of `1/(1-τ)` (for τ < 1).
///
/// The least-favorable statistics are the same with either weighting; the
/// unweighted form only shrinks the admissible multiplier range to `λ > ‖P‖`.
/// Off: the solvers in this crate assume the `1/(1-τ)` weighting.
pub const UNWEIGHTED_MEAN_TERM: bool = false;

/// Mean mismatches below this (relative) size count as zero in the τ = 1
/// indicator term.
pub const MEAN_MISMATCH_TOL: f64 = 1e-12;

/// A nonnegative divergence value, possibly `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DivergenceValue(f64);

impl DivergenceValue {
    pub const INFINITE: DivergenceValue = DivergenceValue(f64::INFINITY);
    pub const ZERO: DivergenceValue = DivergenceValue(0.0);

    fn finite(v: f64) -> Self {
        DivergenceValue(v.max(0.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Weight of `‖m‖²` for τ < 1.
pub fn mean_weight(tau: f64) -> f64 {
    if UNWEIGHTED_MEAN_TERM {
        1.0
    } else {
        1.0 / (1.0 - tau)
    }
}

/// Covariance term for one eigenvalue `k = exp(log_k)` of `K`.
///
/// Written in terms of `ln k` with `expm1`/`ln_1p` so that it stays accurate
/// for `k` near 1 and for τ near either end of `[0, 1]`.
pub fn covariance_term_log(log_k: f64, tau: f64) -> f64 {
    let l = log_k;
    let v = if tau == 0.0 {
        l.exp_m1() - l
    } else if tau == 1.0 {
        l.exp() * l - l.exp_m1()
    } else if tau <= 0.5 {
        // (τ(k-1) - (k^τ - 1)) / (τ(1-τ))
        (tau * l.exp_m1() - (tau * l).exp_m1()) / (tau * (1.0 - tau))
    } else {
        // same expression with ε = 1-τ: (-k (k^-ε - 1) - ε(k-1)) / (τ ε)
        let eps = 1.0 - tau;
        let k = l.exp();
        (-k * (-eps * l).exp_m1() - eps * l.exp_m1()) / (tau * eps)
    };
    if v.is_nan() {
        // overflow at the ends: the term grows without bound as k → ∞ and
        // tends to 1/τ as k → 0
        if l.is_nan() {
            f64::NAN
        } else if l > 0.0 {
            f64::INFINITY
        } else {
            1.0 / tau
        }
    } else {
        v.max(0.0)
    }
}

pub fn covariance_term(k: f64, tau: f64) -> f64 {
    covariance_term_log(k.ln(), tau)
}

fn covariance_sum(values: &DVector<f64>, tau: f64) -> Result<f64> {
    let mut sum = 0.0;
    for &k in values.iter() {
        if !(k > 0.0) {
            return Err(Error::Domain { eigenvalue: k });
        }
        sum += covariance_term(k, tau);
    }
    Ok(sum)
}

fn combine(mean_sq: f64, mean_is_zero: bool, cov_part: f64, tau: f64) -> DivergenceValue {
    if tau == 1.0 {
        if mean_is_zero {
            DivergenceValue::finite(cov_part)
        } else {
            DivergenceValue::INFINITE
        }
    } else {
        let w = if tau == 0.0 { 1.0 } else { mean_weight(tau) };
        DivergenceValue::finite(w * mean_sq + cov_part)
    }
}

/// Normalized innovation statistics `m = L⁻¹Δm`, `K = L⁻¹K̃L⁻ᵀ`.
#[derive(Debug, Clone)]
pub struct InnovationStats {
    pub m: DVector<f64>,
    pub k: SymMatrix,
}

/// `Γ⁻¹ A Γ⁻*` for a square factor `Γ` and Hermitian `A`.
pub(crate) fn whiten<T: Field>(factor: &DMatrix<T>, a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let lu = factor.clone().lu();
    let left = lu.solve(a).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let both = lu.solve(&left.adjoint()).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    Ok(linalg::hermitian_part(&both))
}

pub fn innovation_stats(pair: &GaussianPair) -> Result<InnovationStats> {
    let l = linalg::square_root_factor(pair.nominal.cov())?;
    let dm = pair.actual.mean() - pair.nominal.mean();
    let m = l.solve_lower_triangular(&dm).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let k = whiten(&l, pair.actual.cov())?;
    Ok(InnovationStats { m, k })
}

pub fn ell_tau(m: &DVector<f64>, k: &SymMatrix, tau: f64) -> Result<DivergenceValue> {
    check_tau(tau)?;
    if m.len() != k.nrows() {
        return Err(Error::Dimension(format!(
            "m has length {}, K is {}x{}",
            m.len(),
            k.nrows(),
            k.ncols()
        )));
    }
    let eig = linalg::check_positive_definite(k)?;
    let cov = covariance_sum(&eig.values, tau)?;
    let norm = m.norm();
    Ok(combine(norm * norm, norm <= MEAN_MISMATCH_TOL, cov, tau))
}

/// `D_τ(f̃‖f)` between two joint Gaussians.
pub fn tau_divergence(pair: &GaussianPair, tau: f64) -> Result<DivergenceValue> {
    check_tau(tau)?;
    let stats = innovation_stats(pair)?;
    let eig = linalg::eigen(&stats.k)?;
    let cov = covariance_sum(&eig.values, tau)?;
    let dm = (pair.actual.mean() - pair.nominal.mean()).norm();
    let zero = dm <= MEAN_MISMATCH_TOL * (1.0 + pair.actual.mean().norm());
    Ok(combine(stats.m.norm_squared(), zero, cov, tau))
}

/// Covariance part of the divergence at one frequency, for an arbitrary
/// square factor `Γ` of the nominal value (`Σ = ΓΓ*`).
pub fn pointwise_covariance_term<T: Field>(
    factor: &DMatrix<T>,
    actual: &DMatrix<T>,
    tau: f64,
) -> Result<f64> {
    let k = whiten(factor, actual)?;
    let eig = linalg::eigen(&k)?;
    covariance_sum(&eig.values, tau)
}

/// `S_τ(f̃‖f)` between two sampled spectral models (rectangle rule on the
/// uniform grid; the mean line enters through `‖Δm‖²` in the `Σ_z(0)⁻¹` norm).
pub fn spectral_tau_divergence(
    actual: &SpectralModel,
    nominal: &SpectralModel,
    tau: f64,
) -> Result<DivergenceValue> {
    check_tau(tau)?;
    if actual.n() != nominal.n() || actual.p() != nominal.p() {
        return Err(Error::Dimension(format!(
            "nominal is (n={}, p={}), actual is (n={}, p={})",
            nominal.n(),
            nominal.p(),
            actual.n(),
            actual.p()
        )));
    }
    if actual.grid_size() != nominal.grid_size() {
        return Err(Error::Dimension(format!(
            "grid sizes differ: nominal {}, actual {}",
            nominal.grid_size(),
            actual.grid_size()
        )));
    }
    let terms: Vec<f64> = nominal
        .values()
        .par_iter()
        .zip(actual.values().par_iter())
        .map(|(s, s_act)| {
            let gamma = linalg::square_root_factor(s)?;
            pointwise_covariance_term(&gamma, s_act, tau)
        })
        .collect::<Result<_>>()?;
    let integral = terms.iter().sum::<f64>() / terms.len() as f64;

    let dm = actual.mean() - nominal.mean();
    let zero = dm.norm() <= MEAN_MISMATCH_TOL * (1.0 + actual.mean().norm());
    let s0 = linalg::real_part(&nominal.values()[0]);
    let l0 = linalg::square_root_factor(&s0)?;
    let m = l0.solve_lower_triangular(&dm).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    Ok(combine(m.norm_squared(), zero, integral, tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::JointGaussian;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_vec(v.to_vec())
    }

    fn diag(v: &[f64]) -> SymMatrix {
        DMatrix::from_diagonal(&dv(v))
    }

    /// Direct (unstabilized) branch formulas, used as the oracle.
    fn ell_direct(m2: f64, ks: &[f64], tau: f64) -> f64 {
        let cov: f64 = ks
            .iter()
            .map(|&k| {
                if tau == 0.0 {
                    -k.ln() + k - 1.0
                } else if tau == 1.0 {
                    k * k.ln() - k + 1.0
                } else {
                    k.powf(tau) / (tau * (tau - 1.0)) + k / (1.0 - tau) + 1.0 / tau
                }
            })
            .sum();
        if tau == 1.0 {
            cov
        } else {
            m2 / (1.0 - tau) + cov
        }
    }

    #[test]
    fn zero_at_identity() {
        for tau in [0.0, 0.3, 0.5, 1.0] {
            let v = ell_tau(&dv(&[0.0, 0.0]), &DMatrix::identity(2, 2), tau).unwrap();
            assert_eq!(v.value(), 0.0);
        }
    }

    #[test]
    fn kl_branch_example() {
        let v = ell_tau(&dv(&[0.0, 0.0]), &diag(&[2.0, 1.0]), 0.0).unwrap();
        assert_relative_eq!(v.value(), 0.306_852_819_440_054_3, max_relative = 1e-12);
    }

    #[test]
    fn tau_one_mean_mismatch_is_infinite() {
        let v = ell_tau(&dv(&[0.3]), &diag(&[1.7]), 1.0).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(matches!(
            ell_tau(&dv(&[0.0]), &diag(&[1.0]), 1.2),
            Err(Error::InvalidTau(_))
        ));
    }

    #[test]
    fn stable_terms_match_direct_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let k = rng.random_range(0.05..5.0);
            let tau = [0.0, 0.1, 0.37, 0.5, 0.63, 0.9, 1.0][rng.random_range(0..7)];
            let direct = ell_direct(0.0, &[k], tau);
            assert!((covariance_term(k, tau) - direct).abs() < 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn scalar_kl_between_variances() {
        let nominal = JointGaussian::new(1, 1, dv(&[0.0, 0.0]), diag(&[0.1, 1.0])).unwrap();
        let actual = JointGaussian::new(1, 1, dv(&[0.0, 0.0]), diag(&[0.125, 1.0])).unwrap();
        let pair = GaussianPair::new(nominal.clone(), actual).unwrap();
        // -ln 1.25 + 1.25 - 1 = 0.026856...
        let exact = -(1.25f64).ln() + 0.25;
        assert_relative_eq!(
            tau_divergence(&pair, 0.0).unwrap().value(),
            exact,
            max_relative = 1e-12
        );
        let same = GaussianPair::new(nominal.clone(), nominal).unwrap();
        assert_eq!(tau_divergence(&same, 0.5).unwrap().value(), 0.0);
    }

    #[test]
    fn tau_one_with_shifted_mean_is_infinite() {
        let nominal = JointGaussian::new(1, 1, dv(&[0.0, 0.0]), diag(&[1.0, 1.0])).unwrap();
        let actual = JointGaussian::new(1, 1, dv(&[0.1, 0.0]), diag(&[1.0, 1.0])).unwrap();
        let pair = GaussianPair::new(nominal, actual).unwrap();
        assert!(tau_divergence(&pair, 1.0).unwrap().is_infinite());
        assert!(tau_divergence(&pair, 0.5).unwrap().value().is_finite());
    }

    #[test]
    fn tau_divergence_matches_ell_of_innovations() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
            let kz = linalg::hermitian_part(&(&a * a.transpose() + diag(&[0.2; 3])));
            let kt = linalg::hermitian_part(&(&b * b.transpose() + diag(&[0.2; 3])));
            let mz = dv(&[rng.random_range(-1.0..1.0), 0.0, 0.5]);
            let mt = &mz + dv(&[0.1, -0.2, 0.05]);
            let pair = GaussianPair::new(
                JointGaussian::new(2, 1, mz.clone(), kz.clone()).unwrap(),
                JointGaussian::new(2, 1, mt.clone(), kt.clone()).unwrap(),
            )
            .unwrap();
            // oracle: ‖Δm‖² in the K_z⁻¹ norm and eigenvalues of K̃ K_z⁻¹
            let kinv = kz.clone().try_inverse().unwrap();
            let dm = &mt - &mz;
            let m2 = (dm.transpose() * &kinv * &dm)[(0, 0)];
            let ks: Vec<f64> = (&kt * &kinv).complex_eigenvalues().iter().map(|c| c.re).collect();
            for tau in [0.0, 0.25, 0.5, 0.75] {
                let got = tau_divergence(&pair, tau).unwrap().value();
                let want = ell_direct(m2, &ks, tau);
                assert_relative_eq!(got, want, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn continuity_near_kl_branch() {
        let m = dv(&[0.2, -0.1]);
        let k = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, 0.2, 0.7]);
        let at0 = ell_tau(&m, &k, 0.0).unwrap().value();
        let near = ell_tau(&m, &k, 1e-8).unwrap().value();
        assert!((at0 - near).abs() < 1e-6);
        let zero_mean = dv(&[0.0, 0.0]);
        let at1 = ell_tau(&zero_mean, &k, 1.0).unwrap().value();
        let near1 = ell_tau(&zero_mean, &k, 1.0 - 1e-8).unwrap().value();
        assert!((at1 - near1).abs() < 1e-6);
    }

    #[test]
    fn constant_spectrum_reduces_to_static() {
        let kz = DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, 0.3]);
        let kt = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.1, 0.3]);
        let nominal = JointGaussian::new(1, 1, dv(&[0.0, 0.0]), kz).unwrap();
        let actual = JointGaussian::new(1, 1, dv(&[0.0, 0.0]), kt).unwrap();
        let sn = SpectralModel::constant(&nominal, 16).unwrap();
        let sa = SpectralModel::constant(&actual, 16).unwrap();
        let pair = GaussianPair::new(nominal, actual).unwrap();
        for tau in [0.0, 0.5, 1.0] {
            let s = spectral_tau_divergence(&sa, &sn, tau).unwrap().value();
            let d = tau_divergence(&pair, tau).unwrap().value();
            assert_relative_eq!(s, d, max_relative = 1e-10);
        }
        assert!(spectral_tau_divergence(&sn, &sn, 0.3).unwrap().value() < 1e-15);
    }

    #[test]
    fn pointwise_term_is_factor_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let rand_c =
            |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for _ in 0..20 {
            let a = DMatrix::from_fn(3, 3, |_, _| rand_c(&mut rng));
            let b = DMatrix::from_fn(3, 3, |_, _| rand_c(&mut rng));
            let s = linalg::hermitian_part(&(&a * a.adjoint()))
                + DMatrix::identity(3, 3) * Complex64::new(0.1, 0.0);
            let st = linalg::hermitian_part(&(&b * b.adjoint()))
                + DMatrix::identity(3, 3) * Complex64::new(0.1, 0.0);
            let g = linalg::square_root_factor(&s).unwrap();
            let u = DMatrix::from_fn(3, 3, |_, _| rand_c(&mut rng)).qr().q();
            for tau in [0.0, 0.5, 1.0] {
                let v1 = pointwise_covariance_term(&g, &st, tau).unwrap();
                let v2 = pointwise_covariance_term(&(&g * &u), &st, tau).unwrap();
                assert_relative_eq!(v1, v2, max_relative = 1e-9);
            }
        }
    }
}
