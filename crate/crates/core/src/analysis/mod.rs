//! Oracle-backed verification and session statistics.

mod check;
mod rates;
pub mod stats;
mod summary;
mod tables;

use thiserror::Error;

use crate::protocol::{Layer, ProtocolError};

pub use check::{
    empirical_check, CheckParams, Decision, EavesdropVerdict, GroupVerdict, DEFAULT_MIN_SAMPLES,
    DEFAULT_THRESHOLD,
};
pub use rates::{disagreement, key_rate, qber, RateRow};
pub use summary::{summarize, summary_csv, Materials, SessionSummary};
pub use tables::{verify_table, Relation, RelationResult, TableId, TableSpec, VerificationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no check rounds to evaluate")]
    EmptyCheckSet,
    #[error("participants of layer {0} hold strings of unequal length")]
    LengthMismatch(Layer),
    #[error("unknown table `{0}` (expected 3, 4 or 5)")]
    UnknownTable(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type Result<T> = std::result::Result<T, AnalysisError>;
