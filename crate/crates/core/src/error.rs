use alloc::string::String;

/// Errors raised by the geometric and algebraic routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {re} + {im}i is not in the upper half-plane")]
    NotInHalfPlane { re: f64, im: f64 },
    #[error("matrix determinant {det} differs from 1")]
    NotUnimodular { det: f64 },
    #[error("direction has modulus {modulus}, expected 1")]
    NotUnitDirection { modulus: f64 },
    #[error("geodesic endpoints coincide")]
    CoincidentPoints,
    #[error("element with |trace| = {trace} is not hyperbolic")]
    NotHyperbolic { trace: f64 },
    #[error("generator index {index} out of range for {count} generators")]
    IndexOutOfRange { index: i32, count: usize },
    #[error("ping-pong certificate failed: {0}")]
    PingPongFailure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("path leaves the upper half-plane at parameter {t}")]
    PathLeavesHalfPlane { t: f64 },
    #[error("loop is not closed (endpoint gap {gap})")]
    OpenLoop { gap: f64 },
    #[error("matrix is not loxodromic: {0}")]
    NotLoxodromic(String),
    #[error("matrix does not preserve the invariant form (residual {residual})")]
    FormNotPreserved { residual: f64 },
    #[error("convention not applicable: {0}")]
    ConventionInapplicable(String),
    #[error("weight mismatch: differential of degree {q} cannot pair with rank {n}")]
    WeightMismatch { q: u32, n: usize },
    #[error("neutral section requires odd rank, found n = {n}")]
    EvenRank { n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bundle-valued form is not closed (residual {residual})")]
    NotClosed { residual: f64 },
    #[error(
        "Poincare series diverges: successive-depth residual grew from {previous} to {current}"
    )]
    Divergence { previous: f64, current: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
