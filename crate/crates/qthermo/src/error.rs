//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("trace is not 1 (got {trace:.12e})")]
    InvalidTrace { trace: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveSemidefinite { min_eig: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("support violation: second argument is rank-deficient where the first has weight")]
    SupportViolation,

    #[error("Bloch vector lies outside the unit ball (|v| = {norm:.12})")]
    BlochOutOfBall { norm: f64 },

    #[error("operation requires a qubit (dim 2), got dim {dim}")]
    WrongDimension { dim: usize },

    #[error("state too close to the Bloch-ball boundary (|v| = {norm:.12})")]
    BoundaryState { norm: f64 },

    #[error("instantaneous fixed point is not unique (numerical null space dim {null_dim})")]
    NonUniqueIfp { null_dim: usize },

    #[error("generator eigenbasis is numerically incomplete (eigenvector condition {condition:.3e})")]
    DefectiveGenerator { condition: f64 },

    #[error("instantaneous fixed point is not a state (min eigenvalue {min_eig:.3e})")]
    IfpNotAState { min_eig: f64 },

    #[error("degenerate fixed point: gamma_plus + gamma_minus vanishes at t = {t}")]
    DegenerateFixedPoint { t: f64 },

    #[error("complex square root: gamma_plus * gamma_minus = {product:.3e} < 0")]
    ComplexRoot { product: f64 },

    #[error("quadrature failed to reach tolerance {tol:.1e} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },

    #[error("degenerate denominator |lambda^2 - lambda_z^2| = {value:.3e}")]
    DegenerateDenominator { value: f64 },

    #[error("argument {value} outside the valid domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("no eigenvalue with positive real part: nothing to witness")]
    NoPositiveEigenvalue,

    #[error("perturbation underflow: no PSD state found down to eps = {floor:.1e}")]
    EpsilonUnderflow { floor: f64 },

    #[error("stale fixed point: ||L_t[ifp]|| = {residual:.3e}")]
    StaleFixedPoint { residual: f64 },

    #[error("rank-deficient state (min eigenvalue {min_eig:.3e})")]
    RankDeficient { min_eig: f64 },

    #[error("grid too coarse: cross-check mismatch {mismatch:.3e}")]
    GridTooCoarse { mismatch: f64 },

    #[error("integration step rejected at t = {t}: trace drift {drift:.3e}")]
    StepRejected { t: f64, drift: f64 },

    #[error("perturbed matrix is not a state (min eigenvalue {min_eig:.3e})")]
    NotAState { min_eig: f64 },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
