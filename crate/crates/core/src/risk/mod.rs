//! Stage 4 risk register: candidate suggestions, scoring on a 5x5 matrix and
//! residual risk after mitigation.

mod item;
mod matrix;
mod suggest;

use thiserror::Error;

pub use item::{
    apply_mitigations, residual_acceptability, ConsequenceRef, Lasting, MitigationRef, Residual, RiskItem, Strategy,
    MAX_DELTA,
};
pub use matrix::{
    load_acceptability_policy, load_risk_matrix, score_risk, Acceptability, AcceptabilityPolicy, RiskLevel,
    RiskMatrix,
};
pub use suggest::enumerate_candidate_risks;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RiskError {
    #[error("{field} {value} is outside 1-5")]
    OutOfRange { field: &'static str, value: i64 },
    #[error("risk '{0}' has no likelihood or severity yet")]
    Unscored(String),
    #[error("mitigation '{0}' has a delta above 4")]
    DeltaOutOfRange(String),
    #[error("risk '{0}' has no residual; apply mitigations first")]
    NoResidual(String),
}
