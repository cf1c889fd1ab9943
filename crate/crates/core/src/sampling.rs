//! Random perturbations of Gaussian laws for the randomized property checks.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::linalg::{self, SymMatrix};
use crate::models::JointGaussian;

pub(crate) fn normal_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub(crate) fn normal_matrix<R: Rng + ?Sized>(rng: &mut R, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

/// Symmetric direction with unit Frobenius norm.
pub(crate) fn unit_symmetric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SymMatrix {
    let a = normal_matrix(rng, n, n);
    let s = linalg::hermitian_part(&a);
    let norm = s.norm();
    s / norm.max(f64::MIN_POSITIVE)
}

/// `N(m + L·shift·u, L (I + spread·S)(I + spread·S)ᵀ Lᵀ)` for random unit
/// directions `u`, `S`, where `L` is the Cholesky factor of `base.cov()`.
pub(crate) fn perturb<R: Rng + ?Sized>(
    rng: &mut R,
    base: &JointGaussian,
    shift: f64,
    spread: f64,
) -> Result<JointGaussian> {
    let q = base.dim();
    let l = linalg::square_root_factor(base.cov())?;
    let mut u = normal_vector(rng, q);
    let un = u.norm();
    u /= un.max(f64::MIN_POSITIVE);
    let mean = base.mean() + &l * u * shift;
    let t = DMatrix::identity(q, q) + unit_symmetric(rng, q) * spread;
    let cov = linalg::hermitian_part(&(&l * &t * t.transpose() * l.transpose()));
    base.with_moments(mean, cov)
}
