use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not a unit on C*: determinant {det} is not a nonzero monomial")]
    NotUnitOnCstar { det: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sigma is not a unital algebra morphism: {0}")]
    NotAlgebraMorphism(String),

    #[error("splitting type has negative degree {0}")]
    NegativeDegree(i64),

    #[error("E_z meets ker rho for some z: certificate polynomial {certificate}")]
    DegenerateFamily { certificate: String },

    #[error("bundle is not positive: {0}")]
    NotPositive(String),

    #[error("quadrature disagrees with exact value: deviation {deviation:e} > tolerance {tolerance:e}")]
    QuadratureMismatch { deviation: f64, tolerance: f64 },

    #[error("identity check failed: lhs {lhs} vs rhs {rhs}")]
    IdentityViolation { lhs: String, rhs: String },

    #[error("invariant Euclidean structure needs even k, got {0}")]
    OddK(u32),

    #[error("grid point {point:?} lies within {margin} cells of a singular set")]
    SingularityTooClose { point: [f64; 3], margin: f64 },

    #[error("fields are not a monopole: residual {residual:e} above {threshold:e}")]
    NotAMonopole { residual: f64, threshold: f64 },

    #[error("test function is not harmonic: max |laplacian| {residual:e}")]
    NotHarmonicInput { residual: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
