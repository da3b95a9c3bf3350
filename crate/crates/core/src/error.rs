use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("mode {mode} out of range for {n_modes}-mode state")]
    ModeOutOfRange { mode: usize, n_modes: usize },
    #[error("negative discriminant {0:e} beyond clamping tolerance")]
    NegativeDiscriminant(f64),
    #[error("negative determinant invariant {0:e}")]
    NegativeInvariant(f64),
    #[error("operator count {count} exceeds cap {cap}")]
    OrderCap { count: usize, cap: usize },
    #[error("moment {0:?} missing from table")]
    MissingMoment(Vec<u32>),
    #[error("inconsistent statistics: {0}")]
    InconsistentStatistics(String),
    #[error("zero mean photon number in mode {0}")]
    ZeroIntensity(usize),
    #[error("distribution not normalized (total {0})")]
    Unnormalized(f64),
    #[error("truncation deficit {deficit:e} exceeds tolerance {tol:e}")]
    Truncation { deficit: f64, tol: f64 },
    #[error("ill-conditioned inversion (condition number {0:e})")]
    IllConditioned(f64),
    #[error("infeasible problem size: {0}")]
    Infeasible(String),
    #[error("eigensolver did not converge")]
    NonConvergent,
    #[error("covariance matrix required")]
    MissingCovariance,
}

pub type Result<T> = std::result::Result<T, Error>;
