//! Evidence agents.
//!
//! A search agent queries its judge for every candidate sentence at every
//! step and keeps the best one. A learned agent never queries the judge
//! at selection time: a linear scorer trained on precomputed judge
//! reactions ranks the sentences once and the ranking is reused for every
//! step.

mod features;
mod learned;
mod scorer;
mod targets;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;
use crate::judges::{Judge, JudgeError, JudgeVerdict};

pub use features::{FeatureExtractor, FEATURE_NAMES};
pub use learned::{learned_select, LearnedAgent};
pub use scorer::{
    train_scorer, Objective, ScorerModel, TrainError, TrainParams, TrainReport, TrainingGroup,
};
pub use targets::{
    build_training_groups, precompute_targets, read_targets, write_targets, SentenceTargets,
    TargetFailure, TargetsOutcome,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("passage {0} has no sentences")]
    EmptyPassage(String),
    #[error("answer {answer} out of range for {options} options")]
    AnswerOutOfRange { answer: usize, options: usize },
    #[error("turn budget must be at least 1")]
    NoTurns,
    #[error("no recorded selection for example {example}, answer {answer}")]
    NoRecordedSelection { example: String, answer: usize },
    #[error("{0}")]
    Resource(String),
}

/// One step of an agent's selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: usize,
    pub chosen: usize,
    /// Judge probability of the agent's answer after the step, when the
    /// agent queried the judge.
    pub prob_after: Option<f64>,
    /// Score of every passage sentence at this step.
    pub candidate_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSelection {
    pub answer_index: usize,
    pub sentence_indices: Evidence,
    pub trace: Vec<StepRecord>,
}

impl EvidenceSelection {
    pub fn new(answer_index: usize) -> Self {
        Self {
            answer_index,
            sentence_indices: Evidence::new(),
            trace: Vec::new(),
        }
    }

    pub fn record(&mut self, step: usize, pick: Pick) {
        self.sentence_indices.insert(pick.index);
        self.trace.push(StepRecord {
            step,
            chosen: pick.index,
            prob_after: pick.prob,
            candidate_scores: pick.candidate_scores,
        });
    }
}

/// A single sentence choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Pick {
    pub index: usize,
    pub prob: Option<f64>,
    pub candidate_scores: Vec<f64>,
}

/// Anything that can choose one sentence for an answer given the evidence
/// already on the table.
pub trait EvidenceAgent: Send + Sync {
    fn id(&self) -> &str;

    fn pick(
        &self,
        example: &Example,
        passage: &Passage,
        answer: usize,
        snapshot: &Evidence,
    ) -> Result<Pick, AgentError>;
}

/// Result of one greedy search step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub chosen: usize,
    pub verdict: JudgeVerdict,
    pub candidate_scores: Vec<f64>,
}

pub fn check_answer(example: &Example, answer: usize) -> Result<(), AgentError> {
    if answer >= example.num_options() {
        return Err(AgentError::AnswerOutOfRange {
            answer,
            options: example.num_options(),
        });
    }
    Ok(())
}

/// Try every passage sentence on top of `current` and keep the one that
/// maximizes the judge's belief in `answer`: the raw logit for
/// similarity judges, the softmax probability otherwise. Ties go to the
/// lowest index; re-adding a chosen sentence is allowed (and a no-op).
pub fn greedy_step(
    judge: &dyn Judge,
    example: &Example,
    passage: &Passage,
    answer: usize,
    current: &Evidence,
) -> Result<StepOutcome, AgentError> {
    if passage.is_empty() {
        return Err(AgentError::EmptyPassage(passage.id.clone()));
    }
    check_answer(example, answer)?;
    let direct = judge.direct_score();
    let mut best: Option<(usize, JudgeVerdict)> = None;
    let mut scores = Vec::with_capacity(passage.len());
    for s in 0..passage.len() {
        let verdict = judge.score(example, passage, &current.with(s))?;
        let score = if direct {
            verdict.logits[answer]
        } else {
            verdict.probs[answer]
        };
        scores.push(score);
        let better = match &best {
            None => true,
            Some((b, _)) => score > scores[*b],
        };
        if better {
            best = Some((s, verdict));
        }
    }
    let (chosen, verdict) = best.expect("non-empty passage");
    Ok(StepOutcome {
        chosen,
        verdict,
        candidate_scores: scores,
    })
}

/// `turns` greedy steps ignoring every other agent.
pub fn run_individual(
    judge: &dyn Judge,
    example: &Example,
    passage: &Passage,
    answer: usize,
    turns: usize,
) -> Result<EvidenceSelection, AgentError> {
    if turns == 0 {
        return Err(AgentError::NoTurns);
    }
    let mut selection = EvidenceSelection::new(answer);
    for step in 1..=turns {
        let out = greedy_step(judge, example, passage, answer, &selection.sentence_indices)?;
        selection.record(
            step,
            Pick {
                index: out.chosen,
                prob: Some(out.verdict.probs[answer]),
                candidate_scores: out.candidate_scores,
            },
        );
    }
    Ok(selection)
}

/// Run any agent alone for `turns` steps, conditioning only on its own picks.
pub fn run_agent(
    agent: &dyn EvidenceAgent,
    example: &Example,
    passage: &Passage,
    answer: usize,
    turns: usize,
) -> Result<EvidenceSelection, AgentError> {
    if turns == 0 {
        return Err(AgentError::NoTurns);
    }
    let mut selection = EvidenceSelection::new(answer);
    for step in 1..=turns {
        let pick = agent.pick(example, passage, answer, &selection.sentence_indices)?;
        selection.record(step, pick);
    }
    Ok(selection)
}

/// Exhaustive greedy search against a judge.
#[derive(Clone)]
pub struct SearchAgent {
    id: String,
    judge: Arc<dyn Judge>,
}

impl SearchAgent {
    pub fn new(judge: Arc<dyn Judge>) -> Self {
        Self {
            id: format!("search:{}", judge.id()),
            judge,
        }
    }

    pub fn judge(&self) -> &Arc<dyn Judge> {
        &self.judge
    }
}

impl EvidenceAgent for SearchAgent {
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
        let out = greedy_step(self.judge.as_ref(), example, passage, answer, snapshot)?;
        Ok(Pick {
            index: out.chosen,
            prob: Some(out.verdict.probs[answer]),
            candidate_scores: out.candidate_scores,
        })
    }
}

/// Scores every sentence once and picks the best one not yet on the table;
/// shared by agents that rank sentences without consulting a judge.
pub fn pick_from_ranking(scores: Vec<f64>, snapshot: &Evidence) -> Pick {
    let order = rank_descending(&scores);
    let index = order
        .iter()
        .copied()
        .find(|i| !snapshot.contains(*i))
        .unwrap_or(order[0]);
    Pick {
        index,
        prob: None,
        candidate_scores: scores,
    }
}

/// Indices sorted by score descending, lowest index first on ties.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Text, SourceTag};
    use crate::judges::{MockDefault, MockJudge};

    fn example(n: usize) -> Example {
        Example {
            id: "ex".into(),
            passage_id: "p".into(),
            question: Text::new("q?"),
            options: (0..n).map(|i| Text::new(format!("o{i}"))).collect(),
            gold_index: 0,
        }
    }

    fn passage(m: usize) -> Passage {
        let text: Vec<String> = (0..m).map(|i| format!("s{i}.")).collect();
        Passage::from_text("p", text.join(" "), SourceTag::Other).unwrap()
    }

    #[test]
    fn one_sentence_passage() {
        let j = MockJudge::new("m", MockDefault::Zeros);
        let out = greedy_step(&j, &example(4), &passage(1), 2, &Evidence::new()).unwrap();
        assert_eq!(out.chosen, 0);
    }

    #[test]
    fn programmed_argmax_and_ties() {
        let j = MockJudge::new("m", MockDefault::Zeros)
            .with("ex", &[2], vec![0.0, 3.0, 0.0])
            .with("ex", &[1], vec![0.0, 3.0, 0.0]);
        let (ex, p) = (example(3), passage(4));
        // sentences 1 and 2 tie for answer 1: lowest index wins
        assert_eq!(greedy_step(&j, &ex, &p, 1, &Evidence::new()).unwrap().chosen, 1);
        // answer 0 is uniform everywhere: index 0
        assert_eq!(greedy_step(&j, &ex, &p, 0, &Evidence::new()).unwrap().chosen, 0);
        assert!(matches!(
            greedy_step(&j, &ex, &p, 3, &Evidence::new()),
            Err(AgentError::AnswerOutOfRange { .. })
        ));
    }

    #[test]
    fn repick_leaves_evidence_unchanged() {
        // step 1 picks 0; with {0} the best continuation is {0} itself
        let j = MockJudge::new("m", MockDefault::Fixed(vec![0.0, 0.0]))
            .with("ex", &[0], vec![2.0, 0.0])
            .with("ex", &[0, 1], vec![1.0, 0.0])
            .with("ex", &[0, 2], vec![1.5, 0.0]);
        let sel = run_individual(&j, &example(2), &passage(3), 0, 2).unwrap();
        assert_eq!(sel.trace[0].chosen, 0);
        assert_eq!(sel.trace[1].chosen, 0);
        assert_eq!(sel.sentence_indices.indices(), &[0]);
        // p(i) does not increase at step 2 but the greedy step is still taken
        assert!(sel.trace[1].prob_after <= sel.trace[0].prob_after);
    }

    #[test]
    fn turns_beyond_sentence_count() {
        let j = MockJudge::hashed(3);
        let sel = run_individual(&j, &example(4), &passage(3), 1, 10).unwrap();
        assert!(sel.sentence_indices.len() <= 3);
        assert_eq!(sel.trace.len(), 10);
        assert!(matches!(
            run_individual(&j, &example(4), &passage(3), 1, 0),
            Err(AgentError::NoTurns)
        ));
    }

    #[test]
    fn single_turn_equals_step() {
        let j = MockJudge::hashed(11);
        let (ex, p) = (example(4), passage(6));
        let step = greedy_step(&j, &ex, &p, 2, &Evidence::new()).unwrap();
        let sel = run_individual(&j, &ex, &p, 2, 1).unwrap();
        assert_eq!(sel.sentence_indices.indices(), &[step.chosen]);
    }

    #[test]
    fn ranking_tie_break() {
        assert_eq!(rank_descending(&[1.0, 3.0, 3.0, 0.5]), vec![1, 2, 0, 3]);
        let pick = pick_from_ranking(vec![1.0, 3.0, 3.0], &Evidence::single(1));
        assert_eq!(pick.index, 2);
        let pick = pick_from_ranking(vec![1.0, 3.0], &[0, 1].into_iter().collect());
        assert_eq!(pick.index, 1);
    }
}
