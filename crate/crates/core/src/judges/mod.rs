//! The judge contract: given the evidence sentences, a question and its
//! options, produce one logit per option and the softmax distribution.
//!
//! Native judges are pure similarity models (TF-IDF and averaged word
//! vectors). Neural judges live out of process behind [`RemoteJudge`].

mod embedding;
mod mock;
pub mod mock_server;
mod remote;
mod tfidf;

use std::fmt;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Example, IdfTable, Passage, Vocabulary};
use crate::evidence::Evidence;

pub use embedding::{avg_embedding, cosine_dense, EmbeddingJudge, EmbeddingTable};
pub use mock::{MockDefault, MockJudge};
pub use remote::{RemoteJudge, RemoteRequest, RemoteResponse, DEFAULT_TIMEOUT};
pub use tfidf::{cosine_sparse, tfidf_vector, SparseVector, TfidfJudge, TfidfTarget};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JudgeError {
    #[error("transport error contacting {endpoint}: {detail}")]
    Transport { endpoint: String, detail: String },
    #[error("request to {endpoint} timed out after {timeout:?}")]
    Timeout { endpoint: String, timeout: Duration },
    #[error("{endpoint} answered HTTP {status}: {body}")]
    Status {
        endpoint: String,
        status: u16,
        body: String,
    },
    #[error("malformed response from {endpoint}: {detail}")]
    Malformed { endpoint: String, detail: String },
    #[error("judge returned {got} logits for {expected} options")]
    Arity { expected: usize, got: usize },
    #[error("judge returned a non-finite logit")]
    NonFinite,
    #[error("evidence sentence {index} outside passage of {len} sentences")]
    EvidenceOutOfRange { index: usize, len: usize },
    #[error("judge `{kind}` needs {what}")]
    MissingResource { kind: JudgeKind, what: &'static str },
}

impl JudgeError {
    /// Transport-level failures may succeed on retry; everything else is
    /// deterministic.
    pub fn is_retryable(&self) -> bool {
        matches!(self, JudgeError::Transport { .. } | JudgeError::Timeout { .. })
    }
}

/// Per-option logits and their softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub judge_id: String,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl JudgeVerdict {
    pub fn from_logits(judge_id: impl Into<String>, logits: Vec<f64>) -> Result<Self, JudgeError> {
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(JudgeError::NonFinite);
        }
        let probs = softmax(&logits);
        Ok(Self {
            judge_id: judge_id.into(),
            logits,
            probs,
        })
    }

    /// Predicted option; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }
}

/// Temperature-1 softmax, shifted by the max logit for stability.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    if logits.is_empty() {
        return Vec::new();
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the largest value, lowest index on ties. Empty input gives 0.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub trait Judge: Send + Sync {
    fn id(&self) -> &str;

    /// Similarity judges are searched on their raw logit rather than the
    /// softmax probability.
    fn direct_score(&self) -> bool {
        false
    }

    /// Raw per-option logits for `evidence` (indices into `passage`).
    fn logits(
        &self,
        example: &Example,
        passage: &Passage,
        evidence: &Evidence,
    ) -> Result<Vec<f64>, JudgeError>;

    fn score(
        &self,
        example: &Example,
        passage: &Passage,
        evidence: &Evidence,
    ) -> Result<JudgeVerdict, JudgeError> {
        if let Some(max) = evidence.max_index() {
            if max >= passage.len() {
                return Err(JudgeError::EvidenceOutOfRange {
                    index: max,
                    len: passage.len(),
                });
            }
        }
        let logits = self.logits(example, passage, evidence)?;
        if logits.len() != example.num_options() {
            return Err(JudgeError::Arity {
                expected: example.num_options(),
                got: logits.len(),
            });
        }
        JudgeVerdict::from_logits(self.id(), logits)
    }
}

/// Evidence tokens concatenated in passage order.
pub(crate) fn evidence_tokens<'a>(passage: &'a Passage, evidence: &Evidence) -> Vec<&'a str> {
    evidence
        .iter()
        .flat_map(|i| passage.sentences[i].tokens.iter().map(String::as_str))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JudgeKind {
    /// `cos(tfidf(S), tfidf([Q; A_i]))`
    TfidfSqa,
    /// `cos(tfidf(S), tfidf(A_i))`
    TfidfSa,
    /// `cos(avg_vec(S), avg_vec(A_i))`
    EmbeddingSa,
    Remote,
    Mock,
}

impl JudgeKind {
    pub const SIMILARITY: [JudgeKind; 3] =
        [JudgeKind::TfidfSqa, JudgeKind::TfidfSa, JudgeKind::EmbeddingSa];

    pub fn as_str(&self) -> &'static str {
        match self {
            JudgeKind::TfidfSqa => "tfidf-sqa",
            JudgeKind::TfidfSa => "tfidf-sa",
            JudgeKind::EmbeddingSa => "embedding-sa",
            JudgeKind::Remote => "remote",
            JudgeKind::Mock => "mock",
        }
    }
}

impl fmt::Display for JudgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for JudgeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tfidf-sqa" => Ok(JudgeKind::TfidfSqa),
            "tfidf-sa" => Ok(JudgeKind::TfidfSa),
            "embedding-sa" => Ok(JudgeKind::EmbeddingSa),
            "remote" => Ok(JudgeKind::Remote),
            "mock" => Ok(JudgeKind::Mock),
            _ => Err(format!(
                "unknown judge `{s}` (expected tfidf-sqa, tfidf-sa, embedding-sa, remote, mock)"
            )),
        }
    }
}

/// Everything that determines a judge's scoring behaviour.
#[derive(Clone, Default)]
pub struct JudgeConfig {
    pub kind: Option<JudgeKind>,
    pub idf: Option<Arc<IdfTable>>,
    pub vocab: Option<Arc<Vocabulary>>,
    pub embeddings: Option<Arc<EmbeddingTable>>,
    pub endpoint: Option<String>,
    pub timeout: Option<Duration>,
    pub mock: Option<Arc<MockJudge>>,
}

impl JudgeConfig {
    pub fn new(kind: JudgeKind) -> Self {
        Self {
            kind: Some(kind),
            ..Default::default()
        }
    }

    pub fn with_idf(mut self, idf: Arc<IdfTable>) -> Self {
        self.idf = Some(idf);
        self
    }

    pub fn with_vocab(mut self, vocab: Option<Arc<Vocabulary>>) -> Self {
        self.vocab = vocab;
        self
    }

    pub fn with_embeddings(mut self, table: Arc<EmbeddingTable>) -> Self {
        self.embeddings = Some(table);
        self
    }

    pub fn with_endpoint(mut self, endpoint: impl Into<String>) -> Self {
        self.endpoint = Some(endpoint.into());
        self
    }

    pub fn with_mock(mut self, mock: Arc<MockJudge>) -> Self {
        self.mock = Some(mock);
        self
    }

    pub fn build(&self) -> Result<Arc<dyn Judge>, JudgeError> {
        let kind = self.kind.unwrap_or(JudgeKind::TfidfSa);
        let missing = |what| JudgeError::MissingResource { kind, what };
        Ok(match kind {
            JudgeKind::TfidfSqa | JudgeKind::TfidfSa => {
                let idf = self.idf.clone().ok_or_else(|| missing("an IDF table"))?;
                let target = if kind == JudgeKind::TfidfSqa {
                    TfidfTarget::QuestionAndOption
                } else {
                    TfidfTarget::Option
                };
                Arc::new(TfidfJudge::new(target, idf, self.vocab.clone()))
            }
            JudgeKind::EmbeddingSa => {
                let table = self
                    .embeddings
                    .clone()
                    .ok_or_else(|| missing("an embedding table"))?;
                Arc::new(EmbeddingJudge::new(table))
            }
            JudgeKind::Remote => {
                let endpoint = self.endpoint.clone().ok_or_else(|| missing("an endpoint"))?;
                Arc::new(RemoteJudge::new(endpoint, self.timeout.unwrap_or(DEFAULT_TIMEOUT)))
            }
            JudgeKind::Mock => self.mock.clone().ok_or_else(|| missing("a mock table"))?,
        })
    }
}
