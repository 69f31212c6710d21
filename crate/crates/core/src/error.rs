use thiserror::Error;

/// Errors raised by the dice model and its experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitudes ({a_plus}, {a_minus}) do not form a unit vector")]
    NotNormalized { a_plus: f64, a_minus: f64 },

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not symmetric (m01 = {m01}, m10 = {m10})")]
    NotSymmetric { m01: f64, m10: f64 },

    #[error("matrix is not idempotent (max |P·P - P| = {residual:e})")]
    NotIdempotent { residual: f64 },

    #[error("hidden variable must lie in [0, 1), got {0}")]
    LambdaOutOfRange(f64),

    #[error("cannot collapse onto an outcome of probability {probability:e}")]
    ZeroProbabilityCollapse { probability: f64 },

    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
