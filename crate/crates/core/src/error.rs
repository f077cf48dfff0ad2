use thiserror::Error;

/// Errors raised while building or editing a [`CompactGraph`](crate::graph::CompactGraph).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge {edge}: length must be positive, got {length}")]
    NonPositiveLength { edge: String, length: f64 },
    #[error("edge {edge}: potential segments sum to {sum}, expected edge length {length}")]
    SegmentMismatch { edge: String, sum: f64, length: f64 },
    #[error("coupling order violated: gamma_A = {gamma_a} must be < gamma_B = {gamma_b}")]
    CouplingOrderViolated { gamma_a: f64, gamma_b: f64 },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("vertex {vertex}: expected degree {expected}, found {found}")]
    WrongDegree { vertex: String, expected: usize, found: usize },
    #[error("vertex {vertex}: phase {index} has modulus {modulus}, expected 1")]
    PhaseNotUnit { vertex: String, index: usize, modulus: f64 },
    #[error("vertex {vertex}: {found} phases given for degree {degree}")]
    PhaseCount { vertex: String, found: usize, degree: usize },
    #[error("vertex {vertex}: coupling must be finite, got {gamma}")]
    NonFiniteCoupling { vertex: String, gamma: f64 },
    #[error("quasimomentum component {index} = {value} outside (-pi, pi]")]
    QuasimomentumRange { index: usize, value: f64 },
}

/// Errors raised by the secular-equation eigenvalue solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("spectral parameter {0} outside the supported range (lambda <= 1e6)")]
    LambdaOutOfRange(f64),
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("eigenvalue count not monotone near lambda = {lambda}; cannot isolate")]
    IsolationFailed { lambda: f64 },
    #[error("lambda = {lambda} is not an eigenvalue (sigma_min = {sigma_min:e})")]
    NotAnEigenvalue { lambda: f64, sigma_min: f64 },
    #[error("eigenvalue {lambda} has multiplicity {multiplicity}; eigenfunction is not unique")]
    MultiplicityAmbiguous { lambda: f64, multiplicity: usize },
    #[error("residual {sigma_min:e} at located eigenvalue {lambda} exceeds tolerance {tol:e}")]
    ResidualTooLarge { lambda: f64, sigma_min: f64, tol: f64 },
    #[error("at k = {k:?}: {source}")]
    AtQuasimomentum {
        k: [f64; 3],
        #[source]
        source: Box<SolverError>,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("grid too coarse: {0} points per unit length (minimum 16)")]
    GridTooCoarse(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolygonError {
    #[error("side lengths must be positive and finite: {0:?}")]
    InvalidSides(Vec<f64>),
    #[error("solution set is not a curve ({0:?})")]
    NotACurve(crate::polygon::Classification),
}

/// Top-level error for pipelines that compose several modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error("quadrangle inequality fails at index {index}: 2|phi'_{index}(B)| = {twice:.6e} >= sum = {sum:.6e}")]
    NoCurve { index: usize, twice: f64, sum: f64 },
    #[error("gap chain violated at k = {k:?}: {detail}")]
    GapChainViolated { k: [f64; 3], detail: String },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
