use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("tangent vector has norm {norm}, expected 1")]
    NonUnitVector { norm: f64 },
    #[error("vector is not tangent: hermitian product with base point is {residual:e}")]
    NotTangent { residual: f64 },
    #[error("frame is not orthonormal (residual {residual:e})")]
    InvalidFrame { residual: f64 },
    #[error("geodesic left the chart domain at t = {t}")]
    LeftChartDomain { t: f64 },
    #[error("step too large: relative energy drift {drift:e}")]
    StepTooLarge { drift: f64 },
    #[error("ambiguous multiplicity at t = {t}: singular value ratio {ratio:e} in the threshold band")]
    AmbiguousMultiplicity { t: f64, ratio: f64 },
    #[error("degenerate zero of a Jacobi field at t = {t}")]
    DegenerateZero { t: f64 },
    #[error("parameter {value} outside the integrated range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("sigma = {sigma} lies on the singular set (|det ζ| = {det:e})")]
    SingularSigma { sigma: f64, det: f64 },
    #[error("analytic continuation broke down at tau = {tau} (min singular value of Im Ψ {min_sv:e})")]
    ContinuationBreakdown { tau: f64, min_sv: f64 },
    #[error("Im Ψ is not invertible at (σ, τ) = ({sigma}, {tau})")]
    NotInvertible { sigma: f64, tau: f64 },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("quadrature did not converge: error estimate {estimate:e}")]
    PoorConvergence { estimate: f64 },
    #[error("exact sequence chase is inconsistent: {0}")]
    InconsistentChase(String),
    #[error("map is not an involution (residual {residual:e})")]
    NotInvolution { residual: f64 },
    #[error("quaternionic involution requires n + 1 even, got n + 1 = {dim}")]
    InconsistentSignature { dim: usize },
}
