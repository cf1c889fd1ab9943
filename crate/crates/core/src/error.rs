use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not symmetric/Hermitian (max asymmetry {asymmetry:.3e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite (minimum eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("scalar function undefined at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("tau must lie in [0, 1], got {0}")]
    InvalidTau(f64),

    #[error("infeasible multiplier: lambda = {lambda:.6e} must exceed {bound:.6e}")]
    InfeasibleMultiplier { lambda: f64, bound: f64 },

    #[error(
        "observation spectrum is singular at frequency index {index} (theta = {theta:.6}), \
         condition number {condition:.3e}"
    )]
    SingularObservation {
        index: usize,
        theta: f64,
        condition: f64,
    },

    #[error("matrix is numerically singular (condition number {condition:.3e})")]
    Singular { condition: f64 },

    #[error("tolerance c = {c:.6e} cannot be bracketed: divergence curve spans [{low:.6e}, {high:.6e}]")]
    UnsatisfiableTolerance { c: f64, low: f64, high: f64 },

    #[error("model validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}
