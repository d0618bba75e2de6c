//! Session server for human-judge evaluation.
//!
//! Participants answer questions while seeing only the evidence a
//! condition allows, or pick the sentence that best supports a given
//! option. Items are planned deterministically from a seed, responses are
//! appended to a JSONL log, and every report is recomputed from that log.

pub mod audit;
pub mod catalog;
pub mod http;
pub mod model;
pub mod plan;
pub mod report;
pub mod service;
pub mod store;

use thiserror::Error;

pub use catalog::Catalog;
pub use http::{router, serve, ServeConfig};
pub use model::*;
pub use service::Service;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("unknown pool {0}")]
    UnknownPool(String),
    #[error("unknown item")]
    UnknownItem,
    #[error("unknown example {0}")]
    UnknownExample(String),
    #[error("unknown agent {0}")]
    UnknownAgent(String),
    #[error("unknown judge {0}")]
    UnknownJudge(String),
    #[error("the requested slice contains no examples")]
    EmptySlice,
    #[error("{0}")]
    InvalidRequest(String),
    #[error("pool {0} was created with a different configuration")]
    PoolConflict(String),
    #[error("item already answered")]
    Duplicate,
    #[error("item has not been served")]
    NotServed,
    #[error("choice {choice} out of range for {arity} choices")]
    ChoiceOutOfRange { choice: usize, arity: usize },
    #[error("evidence selection failed: {0}")]
    Agent(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("log replay: {0}")]
    Replay(String),
}

impl ServiceError {
    /// Stable machine-readable kind.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownPool(_) => "unknown_pool",
            ServiceError::UnknownItem => "unknown_item",
            ServiceError::UnknownExample(_) => "unknown_example",
            ServiceError::UnknownAgent(_) => "unknown_agent",
            ServiceError::UnknownJudge(_) => "unknown_judge",
            ServiceError::EmptySlice => "empty_slice",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::PoolConflict(_) => "pool_conflict",
            ServiceError::Duplicate => "duplicate",
            ServiceError::NotServed => "not_served",
            ServiceError::ChoiceOutOfRange { .. } => "choice_out_of_range",
            ServiceError::Agent(_) => "agent",
            ServiceError::Config(_) => "config",
            ServiceError::Io(_) => "io",
            ServiceError::Replay(_) => "replay",
        }
    }
}
