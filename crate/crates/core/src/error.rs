use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TeleportError {
    #[error("matrix is not unitary within tolerance")]
    NonUnitary,
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("state has zero norm")]
    ZeroVector,
    #[error("state norm {0} is too far from 1 to renormalize")]
    NotNormalized(f64),
    #[error("qubit index {index} out of range for a {n_qubits}-qubit state")]
    BadIndex { index: usize, n_qubits: usize },
    #[error("expected a {expected}-qubit state, got {actual}")]
    WrongQubitCount { expected: usize, actual: usize },
    #[error("outcome {0} has zero probability")]
    ZeroProbabilityOutcome(crate::simulator::Outcome),
    #[error("guessed basis pair {0} has no restoration table")]
    InfeasibleGuess(String),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("no gate sequence of length <= {0} matches")]
    NotFound(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TeleportError>;
