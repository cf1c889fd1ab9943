//! Nominal / actual statistics: partitioned joint Gaussians, sampled spectral
//! models and uncertainty-ball descriptions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_tau, Error, Result};
use crate::linalg::{self, Field, HermMatrix, SymMatrix};

/// Default number of frequency samples for spectral models.
pub const DEFAULT_GRID_SIZE: usize = 1024;
/// Absolute/relative tolerance for `Σ(θ_{M-k}) == conj Σ(θ_k)`.
pub const CONJUGATE_SYMMETRY_TOL: f64 = 1e-10;

/// The `x` / `y` partition of a joint covariance (or of a spectral density at
/// one frequency). `yx` is `xy*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks<T: Field> {
    pub x: DMatrix<T>,
    pub xy: DMatrix<T>,
    pub y: DMatrix<T>,
}

impl<T: Field> Blocks<T> {
    pub fn split(full: &DMatrix<T>, n: usize) -> Self {
        let q = full.nrows();
        let p = q - n;
        Blocks {
            x: full.view((0, 0), (n, n)).into_owned(),
            xy: full.view((0, n), (n, p)).into_owned(),
            y: full.view((n, n), (p, p)).into_owned(),
        }
    }

    pub fn yx(&self) -> DMatrix<T> {
        self.xy.adjoint()
    }

    pub fn assemble(&self) -> DMatrix<T> {
        let (n, p) = (self.x.nrows(), self.y.nrows());
        let mut full = DMatrix::zeros(n + p, n + p);
        full.view_mut((0, 0), (n, n)).copy_from(&self.x);
        full.view_mut((0, n), (n, p)).copy_from(&self.xy);
        full.view_mut((n, 0), (p, n)).copy_from(&self.yx());
        full.view_mut((n, n), (p, p)).copy_from(&self.y);
        full
    }
}

/// Jointly Gaussian `z = [x; y]` with `x ∈ R^n`, `y ∈ R^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGaussian {
    n: usize,
    p: usize,
    mean: DVector<f64>,
    cov: SymMatrix,
}

impl JointGaussian {
    pub fn new(n: usize, p: usize, mean: DVector<f64>, cov: SymMatrix) -> Result<Self> {
        let model = JointGaussian { n, p, mean, cov };
        let problems = model.problems();
        if problems.is_empty() {
            Ok(model)
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Assemble from the `x`/`y` blocks and the two block means.
    pub fn from_blocks(blocks: &Blocks<f64>, mean_x: &[f64], mean_y: &[f64]) -> Result<Self> {
        let mut mean = mean_x.to_vec();
        mean.extend_from_slice(mean_y);
        JointGaussian::new(
            blocks.x.nrows(),
            blocks.y.nrows(),
            DVector::from_vec(mean),
            blocks.assemble(),
        )
    }

    /// Every violated invariant, one message each.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push("state dimension n must be at least 1".to_string());
        }
        if self.p == 0 {
            out.push("observation dimension p must be at least 1".to_string());
        }
        let q = self.n + self.p;
        if self.mean.len() != q {
            out.push(format!("mean has length {}, expected n+p = {q}", self.mean.len()));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            out.push("mean has non-finite entries".to_string());
        }
        if self.cov.nrows() != q || self.cov.ncols() != q {
            out.push(format!(
                "cov is {}x{}, expected {q}x{q}",
                self.cov.nrows(),
                self.cov.ncols()
            ));
        } else if q > 0 {
            if let Err(e) = linalg::check_positive_definite(&self.cov) {
                out.push(format!("cov: {e}"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n + self.p
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &SymMatrix {
        &self.cov
    }

    pub fn mean_x(&self) -> DVector<f64> {
        self.mean.rows(0, self.n).into_owned()
    }

    pub fn mean_y(&self) -> DVector<f64> {
        self.mean.rows(self.n, self.p).into_owned()
    }

    pub fn blocks(&self) -> Blocks<f64> {
        Blocks::split(&self.cov, self.n)
    }

    /// Same model with the covariance of `x` replaced.
    pub fn with_x_block(&self, kx: &SymMatrix) -> Result<Self> {
        let mut blocks = self.blocks();
        blocks.x = kx.clone();
        JointGaussian::new(self.n, self.p, self.mean.clone(), blocks.assemble())
    }

    pub fn with_moments(&self, mean: DVector<f64>, cov: SymMatrix) -> Result<Self> {
        JointGaussian::new(self.n, self.p, mean, cov)
    }
}

/// Actual law `f̃` paired with nominal law `f`.
#[derive(Debug, Clone)]
pub struct GaussianPair {
    pub nominal: JointGaussian,
    pub actual: JointGaussian,
}

impl GaussianPair {
    pub fn new(nominal: JointGaussian, actual: JointGaussian) -> Result<Self> {
        if nominal.n != actual.n || nominal.p != actual.p {
            return Err(Error::Dimension(format!(
                "nominal is (n={}, p={}), actual is (n={}, p={})",
                nominal.n, nominal.p, actual.n, actual.p
            )));
        }
        Ok(GaussianPair { nominal, actual })
    }
}

/// Stationary Gaussian process model sampled on the uniform grid
/// `θ_k = 2πk/M`. The mean (the spectral line at θ = 0) is kept apart from
/// the continuous part `Σ_z(θ_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    n: usize,
    p: usize,
    mean: DVector<f64>,
    values: Vec<HermMatrix>,
}

impl SpectralModel {
    pub fn new(n: usize, p: usize, mean: DVector<f64>, values: Vec<HermMatrix>) -> Result<Self> {
        let model = SpectralModel { n, p, mean, values };
        let problems = model.problems();
        if problems.is_empty() {
            Ok(model)
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// The same covariance at every frequency (white joint process).
    pub fn constant(model: &JointGaussian, grid_size: usize) -> Result<Self> {
        let value = linalg::to_complex(model.cov());
        SpectralModel::new(model.n(), model.p(), model.mean().clone(), vec![value; grid_size])
    }

    /// Evaluate `Σ_z = H H*` on the grid for the shaping filter `H`, whose
    /// entries are ratios of polynomials in `e^{-jθ}`.
    pub fn from_arma(
        n: usize,
        p: usize,
        mean: DVector<f64>,
        grid_size: usize,
        arma: &ArmaFilter,
    ) -> Result<Self> {
        let values = arma.evaluate(n + p, grid_size)?;
        SpectralModel::new(n, p, mean, values)
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push("state dimension n must be at least 1".to_string());
        }
        if self.p == 0 {
            out.push("observation dimension p must be at least 1".to_string());
        }
        let q = self.n + self.p;
        if self.mean.len() != q {
            out.push(format!("mean has length {}, expected n+p = {q}", self.mean.len()));
        }
        let m = self.values.len();
        if m < 8 || !m.is_multiple_of(2) {
            out.push(format!("grid size must be even and at least 8, got {m}"));
        }
        let mut shape_ok = true;
        for (k, s) in self.values.iter().enumerate() {
            if s.nrows() != q || s.ncols() != q {
                out.push(format!(
                    "spectrum at frequency index {k} is {}x{}, expected {q}x{q}",
                    s.nrows(),
                    s.ncols()
                ));
                shape_ok = false;
                continue;
            }
            if q == 0 {
                continue;
            }
            if let Err(e) = linalg::check_positive_definite(s) {
                out.push(format!("spectrum at frequency index {k}: {e}"));
            }
        }
        if shape_ok && m > 0 {
            for k in 1..m {
                let a = &self.values[m - k];
                let b = self.values[k].map(|x| x.conj());
                let scale = a.iter().fold(1.0_f64, |acc, x| acc.max(x.norm()));
                let gap = (a - &b).iter().fold(0.0_f64, |acc, x| acc.max(x.norm()));
                if gap > CONJUGATE_SYMMETRY_TOL * scale {
                    out.push(format!(
                        "conjugate symmetry broken between frequency indices {k} and {} \
                         (gap {gap:.3e})",
                        m - k
                    ));
                    break;
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.n + self.p
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn theta(&self, k: usize) -> f64 {
        grid_theta(k, self.values.len())
    }

    pub fn values(&self) -> &[HermMatrix] {
        &self.values
    }

    pub fn blocks_at(&self, k: usize) -> Blocks<Complex64> {
        Blocks::split(&self.values[k], self.n)
    }

    pub fn blocks(&self) -> Vec<Blocks<Complex64>> {
        (0..self.values.len()).map(|k| self.blocks_at(k)).collect()
    }

    pub fn mean_x(&self) -> DVector<f64> {
        self.mean.rows(0, self.n).into_owned()
    }

    /// Same model with `Σ_x(θ_k)` replaced at every frequency.
    pub fn with_x_blocks(&self, sigma_x: &[HermMatrix]) -> Result<Self> {
        if sigma_x.len() != self.values.len() {
            return Err(Error::Dimension(format!(
                "expected {} x-blocks, got {}",
                self.values.len(),
                sigma_x.len()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(sigma_x)
            .map(|(v, sx)| {
                let mut b = Blocks::split(v, self.n);
                b.x = sx.clone();
                b.assemble()
            })
            .collect();
        SpectralModel::new(self.n, self.p, self.mean.clone(), values)
    }

    pub fn with_moments(&self, mean: DVector<f64>, values: Vec<HermMatrix>) -> Result<Self> {
        SpectralModel::new(self.n, self.p, mean, values)
    }
}

pub fn grid_theta(k: usize, grid_size: usize) -> f64 {
    2.0 * PI * k as f64 / grid_size as f64
}

/// Shaping filter `H(e^{jθ})` (q×r) with `H_ij = num_ij(e^{-jθ}) / den_ij(e^{-jθ})`.
/// Coefficients are listed in increasing powers of `e^{-jθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmaFilter {
    pub num: Vec<Vec<Vec<f64>>>,
    pub den: Vec<Vec<Vec<f64>>>,
}

fn poly_at(coeffs: &[f64], z: Complex64) -> Complex64 {
    // Horner in z = e^{-jθ}
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl ArmaFilter {
    fn shape(&self, q: usize) -> Result<usize> {
        let bad = |msg: String| Err(Error::Validation(vec![msg]));
        if self.num.len() != q || self.den.len() != q {
            return bad(format!(
                "arma num/den must have {q} rows, got {}/{}",
                self.num.len(),
                self.den.len()
            ));
        }
        let r = self.num[0].len();
        if r == 0 {
            return bad("arma filter has no input channels".to_string());
        }
        for i in 0..q {
            if self.num[i].len() != r || self.den[i].len() != r {
                return bad(format!("arma row {i} must have {r} columns in num and den"));
            }
            for j in 0..r {
                if self.den[i][j].is_empty() {
                    return bad(format!("arma denominator ({i},{j}) is empty"));
                }
            }
        }
        Ok(r)
    }

    /// `H(θ_k) H(θ_k)*` for `k = 0..M`.
    pub fn evaluate(&self, q: usize, grid_size: usize) -> Result<Vec<HermMatrix>> {
        let r = self.shape(q)?;
        if grid_size < 8 || !grid_size.is_multiple_of(2) {
            return Err(Error::Validation(vec![format!(
                "grid size must be even and at least 8, got {grid_size}"
            )]));
        }
        let half = grid_size / 2;
        let mut values = Vec::with_capacity(grid_size);
        for k in 0..=half {
            let theta = grid_theta(k, grid_size);
            let z = Complex64::from_polar(1.0, -theta);
            let mut h = DMatrix::<Complex64>::zeros(q, r);
            for i in 0..q {
                for j in 0..r {
                    let d = poly_at(&self.den[i][j], z);
                    if d.norm() < 1e-14 {
                        return Err(Error::Validation(vec![format!(
                            "arma denominator ({i},{j}) vanishes at frequency index {k}"
                        )]));
                    }
                    h[(i, j)] = poly_at(&self.num[i][j], z) / d;
                }
            }
            let mut s = linalg::hermitian_part(&(&h * h.adjoint()));
            if k == 0 || k == half {
                // real process: Σ(0) and Σ(π) are real
                s = s.map(|x| Complex64::new(x.re, 0.0));
            }
            values.push(s);
        }
        for k in half + 1..grid_size {
            let mirror = values[grid_size - k].map(|x: Complex64| x.conj());
            values.push(mirror);
        }
        Ok(values)
    }
}

/// How the uncertainty ball is described.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallMode {
    /// `D_τ(f̃‖f) ≤ c`.
    Hard { c: f64 },
    /// Penalty `λ (c - D_τ)` with the multiplier fixed a priori.
    Soft { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauBall {
    tau: f64,
    mode: BallMode,
}

impl TauBall {
    /// Hard constraint. `c = 0` is accepted and yields the nominal statistics.
    pub fn hard(tau: f64, c: f64) -> Result<Self> {
        check_tau(tau)?;
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tolerance c must be a nonnegative finite number, got {c}"
            )));
        }
        Ok(TauBall {
            tau,
            mode: BallMode::Hard { c },
        })
    }

    pub fn soft(tau: f64, lambda: f64) -> Result<Self> {
        check_tau(tau)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "multiplier lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(TauBall {
            tau,
            mode: BallMode::Soft { lambda },
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> BallMode {
        self.mode
    }
}
