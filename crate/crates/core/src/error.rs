use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("subset to keep is empty")]
    EmptySubset,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("bad Pauli label {0:?}")]
    BadLabel(char),
    #[error("system of {0} particles exceeds the supported size")]
    TooLarge(usize),
    #[error("Dicke weight {weight} out of range for n = {n}")]
    BadWeight { n: usize, weight: usize },
    #[error("level {level} out of range for n = {n}")]
    BadLevel { n: usize, level: usize },
    #[error("subset size {k} out of range for n = {n}")]
    BadK { n: usize, k: usize },
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("amplitude condition violated: {0}")]
    BadAmplitude(String),
    #[error("weight vector rejected: {0}")]
    BadLambda(String),
    #[error("alpha = {0} is not negative")]
    NotNegative(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("solver failure: {0}")]
    SolverFail(String),
}

impl Error {
    /// Stable machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySubset => "EMPTY_SUBSET",
            Error::DimMismatch(_) => "DIM_MISMATCH",
            Error::NotHermitian(_) => "NOT_HERMITIAN",
            Error::BadLabel(_) => "BAD_LABEL",
            Error::TooLarge(_) => "TOO_LARGE",
            Error::BadWeight { .. } => "BAD_WEIGHT",
            Error::BadLevel { .. } => "BAD_LEVEL",
            Error::BadK { .. } => "BAD_K",
            Error::BadVertex(_) => "BAD_VERTEX",
            Error::Disconnected => "DISCONNECTED",
            Error::BadAmplitude(_) => "BAD_AMPLITUDE",
            Error::BadLambda(_) => "BAD_LAMBDA",
            Error::NotNegative(_) => "NOT_NEGATIVE",
            Error::InvalidState(_) => "INVALID_STATE",
            Error::SolverFail(_) => "SOLVER_FAIL",
        }
    }

    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::SolverFail(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
