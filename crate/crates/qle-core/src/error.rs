use thiserror::Error;

/// Failure modes shared by all pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QleError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("constraint violated: {name} (residual {residual:e}, tolerance {tolerance:e})")]
    ConstraintViolation {
        name: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("missing jet order: {0}")]
    MissingJetOrder(String),
    #[error("kernel obstruction: degree 0/1 content {l0:e}/{l1:e} exceeds tolerance {tolerance:e}")]
    KernelObstruction { l0: f64, l1: f64, tolerance: f64 },
    #[error("band limit overflow: spectral tail {tail:e} above tolerance")]
    BandLimitOverflow { tail: f64 },
    #[error("recursion breakdown at order {order}: {reason}")]
    RecursionBreakdown { order: i32, reason: String },
    #[error("sign calibration failed: residuals {plus:e} (+1) and {minus:e} (-1)")]
    SignCalibrationFailure { plus: f64, minus: f64 },
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("not an observer Killing field: {0}")]
    NotObserver(String),
    #[error("dual vector is not timelike (T00 = {t00:e}, |T0i| = {spatial:e})")]
    NotTimelike { t00: f64, spatial: f64 },
    #[error("infimum not attained: U = {u:?} is not timelike")]
    InfimumNotAttained { u: [f64; 4] },
    #[error("unsupported parameter: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, QleError>;
