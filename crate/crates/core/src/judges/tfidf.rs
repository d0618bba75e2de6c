use std::collections::BTreeMap;
use std::sync::Arc;

use super::{evidence_tokens, Judge, JudgeError};
use crate::corpus::{subword_tokens, Example, IdfTable, Passage, Vocabulary};
use crate::evidence::Evidence;

/// Token → weight. Ordered so that floating-point sums are reproducible.
pub type SparseVector = BTreeMap<String, f64>;

/// Raw term count times IDF weight.
pub fn tfidf_vector<S: AsRef<str>>(tokens: &[S], idf: &IdfTable) -> SparseVector {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|(t, c)| (t.to_string(), c as f64 * idf.weight(t)))
        .collect()
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_sparse(u: &SparseVector, v: &SparseVector) -> f64 {
    let norm_u = u.values().map(|x| x * x).sum::<f64>().sqrt();
    let norm_v = v.values().map(|x| x * x).sum::<f64>().sqrt();
    if norm_u == 0.0 || norm_v == 0.0 {
        return 0.0;
    }
    let (small, large) = if u.len() <= v.len() { (u, v) } else { (v, u) };
    let dot: f64 = small
        .iter()
        .filter_map(|(t, x)| large.get(t).map(|y| x * y))
        .sum();
    (dot / (norm_u * norm_v)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfidfTarget {
    /// Compare evidence with question tokens followed by option tokens.
    QuestionAndOption,
    Option,
}

pub struct TfidfJudge {
    id: String,
    target: TfidfTarget,
    idf: Arc<IdfTable>,
    vocab: Option<Arc<Vocabulary>>,
}

impl TfidfJudge {
    pub fn new(target: TfidfTarget, idf: Arc<IdfTable>, vocab: Option<Arc<Vocabulary>>) -> Self {
        let id = match target {
            TfidfTarget::QuestionAndOption => "tfidf-sqa",
            TfidfTarget::Option => "tfidf-sa",
        };
        Self {
            id: id.to_string(),
            target,
            idf,
            vocab,
        }
    }

    pub fn idf(&self) -> &IdfTable {
        &self.idf
    }

    /// Word tokens into the unit space the IDF table was built over.
    pub fn encode<S: AsRef<str>>(&self, words: &[S]) -> Vec<String> {
        match &self.vocab {
            Some(v) => subword_tokens(words, v),
            None => words.iter().map(|w| w.as_ref().to_string()).collect(),
        }
    }

    pub fn vector<S: AsRef<str>>(&self, words: &[S]) -> SparseVector {
        tfidf_vector(&self.encode(words), &self.idf)
    }

    /// Target vector of every option.
    pub fn option_vectors(&self, example: &Example) -> Vec<SparseVector> {
        example
            .options
            .iter()
            .map(|opt| match self.target {
                TfidfTarget::QuestionAndOption => {
                    let mut words = example.question.tokens.clone();
                    words.extend(opt.tokens.iter().cloned());
                    self.vector(&words)
                }
                TfidfTarget::Option => self.vector(&opt.tokens),
            })
            .collect()
    }
}

impl Judge for TfidfJudge {
    fn id(&self) -> &str {
        &self.id
    }

    fn direct_score(&self) -> bool {
        true
    }

    fn logits(
        &self,
        example: &Example,
        passage: &Passage,
        evidence: &Evidence,
    ) -> Result<Vec<f64>, JudgeError> {
        let ev = self.vector(&evidence_tokens(passage, evidence));
        Ok(self
            .option_vectors(example)
            .iter()
            .map(|target| cosine_sparse(&ev, target))
            .collect())
    }
}
