use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid morphology: {0}")]
    Morphology(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("contacts infeasible after {iterations} iterations; residuals {residuals:?} m, max penetration {penetration} m")]
    InfeasibleContact { iterations: usize, residuals: Vec<f64>, penetration: f64 },

    #[error("no feasible grip found among {evaluated} proposals")]
    NoFeasibleGrip { evaluated: usize },

    #[error("object too wide: needs {required} m tip separation, max is {max} m")]
    ObjectTooWide { required: f64, max: f64 },

    #[error("no reachable grasp among {candidates} candidates")]
    NoReachableGrasp { candidates: usize },

    #[error("target unreachable: {0}")]
    Unreachable(String),

    #[error("planning failed: worst penetration {worst_penetration} m")]
    PlanningFailure { worst_penetration: f64 },

    #[error("throw infeasible: release speed {speed} m/s exceeds cap {cap} m/s")]
    ThrowInfeasible { speed: f64, cap: f64 },

    #[error("{phase} phase: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase { phase, source: Box::new(self) }
    }
}
