use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ArenaError;
use crate::agents::{check_answer, rank_descending, AgentError, EvidenceAgent, Pick};
use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;
use crate::judges::{avg_embedding, cosine_dense, cosine_sparse, EmbeddingTable, TfidfJudge};
use crate::seed::rng_for;

/// Sentence selection that never looks at the answer options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnswerFreeMethod {
    FirstN,
    TfidfQuestion,
    EmbeddingQuestion,
    RandomK,
}

impl AnswerFreeMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AnswerFreeMethod::FirstN => "first-n",
            AnswerFreeMethod::TfidfQuestion => "tfidf-question",
            AnswerFreeMethod::EmbeddingQuestion => "embedding-question",
            AnswerFreeMethod::RandomK => "random-k",
        }
    }
}

impl fmt::Display for AnswerFreeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AnswerFreeMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-n" => Ok(AnswerFreeMethod::FirstN),
            "tfidf-question" => Ok(AnswerFreeMethod::TfidfQuestion),
            "embedding-question" => Ok(AnswerFreeMethod::EmbeddingQuestion),
            "random-k" | "random" => Ok(AnswerFreeMethod::RandomK),
            _ => Err(format!(
                "unknown answer-free method `{s}` (first-n, tfidf-question, embedding-question, random-k)"
            )),
        }
    }
}

#[derive(Clone)]
pub struct AnswerFreeSelector {
    method: AnswerFreeMethod,
    tfidf: Option<Arc<TfidfJudge>>,
    embeddings: Option<Arc<EmbeddingTable>>,
    seed: u64,
}

impl AnswerFreeSelector {
    pub fn new(method: AnswerFreeMethod, seed: u64) -> Self {
        Self {
            method,
            tfidf: None,
            embeddings: None,
            seed,
        }
    }

    pub fn with_tfidf(mut self, tfidf: Arc<TfidfJudge>) -> Self {
        self.tfidf = Some(tfidf);
        self
    }

    pub fn with_embeddings(mut self, table: Arc<EmbeddingTable>) -> Self {
        self.embeddings = Some(table);
        self
    }

    pub fn method(&self) -> AnswerFreeMethod {
        self.method
    }

    /// Per-sentence preference; higher is picked first.
    pub fn scores(&self, example: &Example, passage: &Passage) -> Result<Vec<f64>, ArenaError> {
        let m = passage.len();
        Ok(match self.method {
            AnswerFreeMethod::FirstN => (0..m).map(|i| -(i as f64)).collect(),
            AnswerFreeMethod::TfidfQuestion => {
                let tfidf = self.tfidf.as_ref().ok_or_else(|| {
                    ArenaError::MissingResource("tfidf-question needs an IDF table".into())
                })?;
                let q = tfidf.vector(&example.question.tokens);
                passage
                    .sentences
                    .iter()
                    .map(|s| cosine_sparse(&tfidf.vector(&s.tokens), &q))
                    .collect()
            }
            AnswerFreeMethod::EmbeddingQuestion => {
                let table = self.embeddings.as_ref().ok_or_else(|| {
                    ArenaError::MissingResource("embedding-question needs word vectors".into())
                })?;
                let q = avg_embedding(&example.question.tokens, table);
                passage
                    .sentences
                    .iter()
                    .map(|s| cosine_dense(&avg_embedding(&s.tokens, table), &q))
                    .collect()
            }
            AnswerFreeMethod::RandomK => {
                // a seeded permutation per example; its first k entries are
                // a uniform sample without replacement
                let mut order: Vec<usize> = (0..m).collect();
                order.shuffle(&mut rng_for(self.seed, &format!("random-k/{}", example.id)));
                let mut scores = vec![0.0; m];
                for (rank, &i) in order.iter().enumerate() {
                    scores[i] = -(rank as f64);
                }
                scores
            }
        })
    }

    /// Top `k` sentences (clamped to the passage length), in passage order.
    pub fn select(&self, example: &Example, passage: &Passage, k: usize) -> Result<Evidence, ArenaError> {
        let scores = self.scores(example, passage)?;
        Ok(rank_descending(&scores).into_iter().take(k).collect())
    }
}

/// An answer-free selector seated as an agent: it makes the same picks
/// whichever answer it is assigned.
#[derive(Clone)]
pub struct AnswerFreeAgent {
    id: String,
    selector: AnswerFreeSelector,
}

impl AnswerFreeAgent {
    pub fn new(selector: AnswerFreeSelector) -> Self {
        Self {
            id: format!("answer-free:{}", selector.method()),
            selector,
        }
    }
}

impl EvidenceAgent for AnswerFreeAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn pick(
        &self,
        example: &Example,
        passage: &Passage,
        answer: usize,
        snapshot: &Evidence,
    ) -> Result<Pick, AgentError> {
        if passage.is_empty() {
            return Err(AgentError::EmptyPassage(passage.id.clone()));
        }
        check_answer(example, answer)?;
        let scores = self
            .selector
            .scores(example, passage)
            .map_err(|e| AgentError::Resource(e.to_string()))?;
        Ok(crate::agents::pick_from_ranking(scores, snapshot))
    }
}
