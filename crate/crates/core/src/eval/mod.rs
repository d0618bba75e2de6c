//! Evaluation: convincingness matrices, QA accuracy under evidence modes,
//! generalization sweeps, confidence buckets and human agreement tables.
//! Every metric row carries the hash of the config that produced it.

mod accuracy;
mod buckets;
mod generalize;
mod human;
mod matrix;
mod reference;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentError, TrainError};
use crate::arena::ArenaError;
use crate::corpus::CorpusError;
use crate::judges::JudgeError;

pub use accuracy::{qa_accuracy, AccuracyResult, EvidenceMode, EvidenceSource};
pub use buckets::{confidence_bucket_report, quantile_edges, BucketRow};
pub use generalize::{generalization_experiment, GenAgent, GeneralizationConfig, SplitSpec};
pub use human::{human_agreement_report, AgreementRow, HumanResponse};
pub use matrix::{
    convincingness_matrix, single_sentence_outcomes, ConvincingnessCell, ConvincingnessMatrix,
    SingleSentenceOutcome, NO_EVIDENCE_AGENT,
};
pub use reference::{reference_accuracy, ReferenceAccuracy, REFERENCE_ACCURACIES};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Arena(#[from] ArenaError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("split `{0}` selects no examples")]
    EmptySplit(String),
    #[error("{0}")]
    Config(String),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

/// One metric line of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub experiment: String,
    pub judge_id: String,
    pub mode: String,
    pub agent_id: Option<String>,
    pub turns: Option<usize>,
    pub accuracy: f64,
    pub mean_sentences: f64,
    pub evaluated: usize,
    pub failures: usize,
    /// Marks the best turn budget of a sweep.
    pub best: bool,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub turns: Vec<usize>,
    pub judge_ids: Vec<String>,
    pub train_examples: usize,
    pub eval_examples: usize,
    pub idf_document_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub provenance: Provenance,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn write_json(&self, path: &Path) -> Result<(), EvalError> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(file, self).map_err(std::io::Error::from)?;
        Ok(())
    }
}

/// Serialize flat rows as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(writer: W, rows: &[T]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
