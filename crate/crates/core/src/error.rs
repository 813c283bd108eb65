use thiserror::Error;

/// Errors surfaced by every stage of the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DvqeError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure at iteration {iteration}: {message}")]
    Numeric { iteration: usize, message: String },

    #[error("probabilities sum to {total}, expected 1")]
    Normalization { total: f64 },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("entanglement leak: {residual:.3e} probability left on discarded qubits")]
    EntanglementLeak { residual: f64 },

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("equivalence failure at iteration {iteration}: |dE| = {delta:.3e}")]
    Equivalence { iteration: usize, delta: f64 },

    #[error("no feasible bitstring in the sampled support")]
    Infeasible,

    #[error("{0}")]
    Io(String),
}

impl DvqeError {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        DvqeError::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            DvqeError::Parse { .. } | DvqeError::Io(_) => 2,
            DvqeError::Config(_)
            | DvqeError::Dimension(_)
            | DvqeError::Capacity(_)
            | DvqeError::InvalidGate(_) => 3,
            DvqeError::Numeric { .. }
            | DvqeError::Normalization { .. }
            | DvqeError::EntanglementLeak { .. }
            | DvqeError::ProtocolViolation(_)
            | DvqeError::Equivalence { .. } => 4,
            DvqeError::Infeasible => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, DvqeError>;
