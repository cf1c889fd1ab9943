//! Symmetric / Hermitian matrix kernels.
//!
//! Everything here is generic over [`Field`], implemented for `f64` (real
//! symmetric matrices) and `Complex64` (Hermitian matrices), so the static
//! and the per-frequency spectral code share one implementation.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry / Hermitian-ness check.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// A matrix is positive definite when `min eig > PD_RATIO * max eig`.
pub const PD_RATIO: f64 = 1e-12;

pub type SymMatrix = DMatrix<f64>;
pub type HermMatrix = DMatrix<Complex64>;

/// Scalar field of the matrices handled by this crate.
pub trait Field: ComplexField<RealField = f64> + Copy {
    /// Square factor `L` with `L L* = A`: lower Cholesky factor for real
    /// input, Hermitian square root for complex input.
    fn square_root_factor(a: &DMatrix<Self>) -> Result<DMatrix<Self>>;
}

impl Field for f64 {
    fn square_root_factor(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let eig = check_positive_definite(a)?;
        match a.clone().cholesky() {
            Some(ch) => Ok(ch.l()),
            None => Err(Error::NotPositiveDefinite {
                min_eigenvalue: eig.min_value(),
            }),
        }
    }
}

impl Field for Complex64 {
    fn square_root_factor(a: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let eig = check_positive_definite(a)?;
        eig.apply(|d| d.sqrt())
    }
}

/// Eigendecomposition `A = V diag(values) V*` with values sorted descending.
#[derive(Debug, Clone)]
pub struct EigenPair<T: Field> {
    pub vectors: DMatrix<T>,
    pub values: DVector<f64>,
}

impl<T: Field> EigenPair<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V diag(f(d_i)) V*`. Fails if `f` is not finite on the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<DMatrix<T>> {
        let mut scaled = self.vectors.clone();
        for (j, &d) in self.values.iter().enumerate() {
            let fd = f(d);
            if !fd.is_finite() {
                return Err(Error::Domain { eigenvalue: d });
            }
            scaled.column_mut(j).scale_mut(fd);
        }
        Ok(hermitian_part(&(scaled * self.vectors.adjoint())))
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        self.apply(|d| d)
            .expect("identity is finite on a finite spectrum")
    }
}

/// Largest entrywise deviation `|a_ij - conj(a_ji)|`.
pub fn asymmetry<T: Field>(a: &DMatrix<T>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)].conjugate()).modulus());
        }
        worst = worst.max(a[(i, i)].imaginary().abs());
    }
    worst
}

fn max_modulus<T: Field>(a: &DMatrix<T>) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.modulus()))
}

pub fn check_hermitian<T: Field>(a: &DMatrix<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.modulus().is_finite()) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    let asym = asymmetry(a);
    if asym > SYMMETRY_TOL * max_modulus(a).max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// `(A + A*) / 2`.
pub fn hermitian_part<T: Field>(a: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_real(0.5);
    (a + a.adjoint()) * half
}

pub fn eigen<T: Field>(a: &DMatrix<T>) -> Result<EigenPair<T>> {
    check_hermitian(a)?;
    let n = a.nrows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let sym = nalgebra::SymmetricEigen::new(hermitian_part(a));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sym.eigenvalues[j].total_cmp(&sym.eigenvalues[i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| sym.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| sym.eigenvectors[(r, order[c])]);
    Ok(EigenPair { vectors, values })
}

pub fn is_positive_definite(values: &DVector<f64>) -> bool {
    let max = values.max();
    let min = values.min();
    max > 0.0 && min > PD_RATIO * max
}

/// Eigendecomposition of `a`, or an error naming the minimum eigenvalue when
/// `a` is not positive definite.
pub fn check_positive_definite<T: Field>(a: &DMatrix<T>) -> Result<EigenPair<T>> {
    let eig = eigen(a)?;
    if is_positive_definite(&eig.values) {
        Ok(eig)
    } else {
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.min_value(),
        })
    }
}

/// Lift a scalar function to a symmetric/Hermitian matrix through its
/// eigendecomposition.
pub fn apply_spectral_function<T: Field>(a: &DMatrix<T>, f: impl Fn(f64) -> f64) -> Result<DMatrix<T>> {
    eigen(a)?.apply(f)
}

pub fn square_root_factor<T: Field>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    T::square_root_factor(a)
}

/// Spectral norm of a symmetric/Hermitian matrix.
pub fn spectral_norm<T: Field>(a: &DMatrix<T>) -> Result<f64> {
    let eig = eigen(a)?;
    Ok(eig.max_value().abs().max(eig.min_value().abs()))
}

/// Inverse of a positive definite matrix through its eigendecomposition;
/// returns the inverse and the condition number. Fails (with the condition
/// number) when the condition exceeds `max_condition`.
pub fn hermitian_inverse<T: Field>(a: &DMatrix<T>, max_condition: f64) -> Result<(DMatrix<T>, f64)> {
    let eig = eigen(a)?;
    let (max, min) = (eig.max_value(), eig.min_value());
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= max_condition) {
        return Err(Error::Singular { condition });
    }
    Ok((eig.apply(|d| 1.0 / d)?, condition))
}

pub fn to_complex(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Real part of a complex matrix.
pub fn real_part(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    a.map(|x| x.re)
}

/// Real part of the trace.
pub fn trace_re<T: Field>(a: &DMatrix<T>) -> f64 {
    a.trace().real()
}
