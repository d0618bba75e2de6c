use std::sync::Arc;

use super::{
    check_answer, pick_from_ranking, rank_descending, AgentError, EvidenceAgent,
    EvidenceSelection, FeatureExtractor, Pick, ScorerModel, StepRecord,
};
use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;

/// Score every sentence once and keep the `turns` best (lowest index on
/// ties). The trace lists them in selection order; the evidence itself is
/// in passage order.
pub fn learned_select(
    model: &ScorerModel,
    features: &FeatureExtractor,
    example: &Example,
    passage: &Passage,
    answer: usize,
    turns: usize,
) -> Result<EvidenceSelection, AgentError> {
    if turns == 0 {
        return Err(AgentError::NoTurns);
    }
    if passage.is_empty() {
        return Err(AgentError::EmptyPassage(passage.id.clone()));
    }
    check_answer(example, answer)?;
    let scores = model.score_all(&features.featurize_passage(example, passage, answer));
    Ok(select_top(scores, answer, turns))
}

pub(crate) fn select_top(scores: Vec<f64>, answer: usize, turns: usize) -> EvidenceSelection {
    let order = rank_descending(&scores);
    let mut selection = EvidenceSelection::new(answer);
    for (step, &index) in order.iter().take(turns).enumerate() {
        selection.sentence_indices.insert(index);
        selection.trace.push(StepRecord {
            step: step + 1,
            chosen: index,
            prob_after: None,
            candidate_scores: scores.clone(),
        });
    }
    selection
}

/// A trained scorer used as an agent. It never queries a judge.
#[derive(Clone)]
pub struct LearnedAgent {
    id: String,
    model: Arc<ScorerModel>,
    features: FeatureExtractor,
}

impl LearnedAgent {
    pub fn new(id: impl Into<String>, model: Arc<ScorerModel>, features: FeatureExtractor) -> Self {
        Self {
            id: id.into(),
            model,
            features,
        }
    }
}

impl EvidenceAgent for LearnedAgent {
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
            .model
            .score_all(&self.features.featurize_passage(example, passage, answer));
        Ok(pick_from_ranking(scores, snapshot))
    }
}
