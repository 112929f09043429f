use thiserror::Error;

use crate::milp::SolveStatus;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid instance: {}", .0.join("; "))]
    InvalidInstance(Vec<String>),

    #[error("malformed program: {0}")]
    MalformedProgram(String),

    #[error("solver finished with status {status:?} while {context}")]
    Solver { status: SolveStatus, context: String },

    #[error("enumeration limit exceeded: {0}")]
    CombinatorialLimitExceeded(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("plan is infeasible for some realization in the uncertainty set: {0}")]
    InfeasiblePlan(String),

    #[error("variable `{0}` has no finite bound; cannot derive a big-M")]
    UnboundedM(String),

    #[error("singular carbon-flow system at node {node}, interval {t}")]
    SingularSystem { node: usize, t: usize },

    #[error("load exceeds procurement capacity in interval {0}")]
    InfeasibleLoad(usize),

    #[error("truncated-normal acceptance region has mass {0:e}")]
    RejectionLimit(f64),

    #[error("iteration cap of {0} reached before convergence")]
    IterationCapExceeded(usize),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn solver(status: SolveStatus, context: impl Into<String>) -> Self {
        Error::Solver {
            status,
            context: context.into(),
        }
    }
}
