use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jacobian is rank deficient at {coords:?} (singular value ratio {ratio:e})")]
    RankDeficient { coords: Vec<f64>, ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parameter {coords:?} lies outside the chart domain")]
    OutsideDomain { coords: Vec<f64> },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("expression not defined here: {0}")]
    Domain(String),

    #[error("solver failure: {converged} of {starts} starts converged")]
    SolverFailure { converged: usize, starts: usize },

    #[error("chart is not C2; second derivatives unavailable")]
    NotC2,

    #[error("resolvent is singular: point sits at a center of curvature (|1 - t*lambda| = {0:e})")]
    SingularResolvent(f64),

    #[error("foot mismatch at r = {r:e}: ray foot is not the nearest point")]
    FootMismatchAtZero { r: f64 },

    #[error("normal length {v_norm} is not below the frontier value {theta}")]
    FiberOverflow { v_norm: f64, theta: f64 },

    #[error("finite-difference probe changed basin along axis {axis}")]
    FootJump { axis: usize },

    #[error("operator norm {norm} exceeds Neumann bound {bound}")]
    BoundViolation { norm: f64, bound: f64 },

    #[error("samples are affinely dependent")]
    DegenerateHull,

    #[error("point has no unique nearest point ({0})")]
    NotUnique(String),

    #[error("frontier predicate is not monotone near r = {0}")]
    NonMonotone(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("manifest: {0}")]
    Manifest(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
