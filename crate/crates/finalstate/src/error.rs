use thiserror::Error;

/// Errors from the dense linear-algebra layer.
#[derive(Debug, Clone, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("SVD did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("polar unitary undefined at given tolerance (smallest singular value {smallest:.3e} below rank_tol {rank_tol:.3e})")]
    RankDeficient { smallest: f64, rank_tol: f64 },
}

/// Errors from state and channel construction / application.
#[derive(Debug, Clone, Error)]
pub enum ChannelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not unitary within tolerance (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("zero vector cannot define a state")]
    ZeroVector,
    #[error("zero dimension")]
    ZeroDimension,
    #[error("state annihilated by projection (input supported entirely on zero Schmidt coefficients)")]
    Annihilated,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Error)]
pub enum CircuitError {
    #[error("qubit cap exceeded: 2n = {total_qubits} > 20")]
    CapExceeded { total_qubits: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("ensemble dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty record set")]
    EmptyRecords,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
