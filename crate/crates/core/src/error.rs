use thiserror::Error;

use crate::geometry::Vector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("malformed linear program: {0}")]
    MalformedProblem(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("ambient dimension {dim} exceeds the configured cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("degenerate cone: {0}")]
    DegenerateCone(String),
    #[error("the point lies in the convex hull and cannot be separated")]
    NotSeparable,
    #[error("the polyhedron is unbounded")]
    Unbounded,

    #[error("empty input")]
    EmptyInput,
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("invalid arity {0}")]
    InvalidArity(usize),
    #[error("vector is not a lifted point: last coordinate is {0}, expected 1")]
    NotLifted(f64),

    #[error("functional is not a state of the given state space")]
    NotAState,
    #[error("vector is not an effect of the given state space")]
    NotAnEffect,
    #[error("effect set does not separate states (rank {rank} < {dim})")]
    DoesNotSeparate { rank: usize, dim: usize },
    #[error("unit effect is not an order unit of the generated cone")]
    NoUnit,
    #[error("functional lies outside the span of the state space (relative residual {0:.3e})")]
    OutsideSpan(f64),
    #[error("prior {0} outside [0, 1]")]
    BadPrior(f64),
    #[error("normalization violated: unit pairing is {0}")]
    NotNormalized(f64),
    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("image of vertex {vertex} leaves the codomain")]
    NotPositive { vertex: usize, witness: Option<Vector> },
    #[error("map is not unital (last row differs from the unit row by {0:.3e})")]
    NotUnital(f64),
    #[error("complete positivity violated: {0}")]
    CpViolation(String),
    #[error("instrument branch {0} does not map the domain into the codomain cone")]
    BranchNotPositive(usize),
    #[error("instrument branches do not sum to a channel: {0}")]
    SumNotChannel(String),
    #[error("pure marginal without product form (residual {0:.3e}); the tensor rule is inconsistent")]
    MonogamyViolation(f64),

    #[error("invalid qubit state: |w| = {0}")]
    InvalidState(f64),
    #[error("invalid qubit effect: {0}")]
    InvalidEffect(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
