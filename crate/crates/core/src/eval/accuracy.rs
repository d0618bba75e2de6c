use serde::{Deserialize, Serialize};

use crate::agents::EvidenceAgent;
use crate::arena::{run_free_for_all, run_round_robin, AnswerFreeSelector};
use crate::corpus::Corpus;
use crate::evidence::Evidence;
use crate::judges::Judge;
use crate::parallel::par_map;

/// Serializable name of an evidence mode, used in report rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvidenceMode {
    FullPassage,
    None,
    RandomK,
    AnswerFree,
    AgentPool,
    RoundRobin,
}

impl EvidenceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EvidenceMode::FullPassage => "full-passage",
            EvidenceMode::None => "none",
            EvidenceMode::RandomK => "random-k",
            EvidenceMode::AnswerFree => "answer-free",
            EvidenceMode::AgentPool => "agent-pool",
            EvidenceMode::RoundRobin => "round-robin",
        }
    }
}

impl std::fmt::Display for EvidenceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EvidenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full-passage" | "full" => Ok(EvidenceMode::FullPassage),
            "none" => Ok(EvidenceMode::None),
            "random-k" | "random" => Ok(EvidenceMode::RandomK),
            "answer-free" => Ok(EvidenceMode::AnswerFree),
            "agent-pool" | "pool" => Ok(EvidenceMode::AgentPool),
            "round-robin" => Ok(EvidenceMode::RoundRobin),
            _ => Err(format!(
                "unknown mode `{s}` (full-passage, none, random-k, answer-free, agent-pool, round-robin)"
            )),
        }
    }
}

/// Where the judge's evidence comes from.
pub enum EvidenceSource<'a> {
    FullPassage,
    None,
    /// Random-k and the other answer-free selectors.
    Selector { selector: AnswerFreeSelector, k: usize },
    /// Free-for-all pool of one agent per answer.
    Pool { agent: &'a dyn EvidenceAgent, turns: usize },
    RoundRobin { agent: &'a dyn EvidenceAgent, turns: usize },
}

impl EvidenceSource<'_> {
    pub fn mode(&self) -> EvidenceMode {
        match self {
            EvidenceSource::FullPassage => EvidenceMode::FullPassage,
            EvidenceSource::None => EvidenceMode::None,
            EvidenceSource::Selector { selector, .. } => match selector.method() {
                crate::arena::AnswerFreeMethod::RandomK => EvidenceMode::RandomK,
                _ => EvidenceMode::AnswerFree,
            },
            EvidenceSource::Pool { .. } => EvidenceMode::AgentPool,
            EvidenceSource::RoundRobin { .. } => EvidenceMode::RoundRobin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyResult {
    pub mode: EvidenceMode,
    pub accuracy: f64,
    /// Mean number of distinct sentences the judge saw per question.
    pub mean_sentences: f64,
    pub correct: usize,
    pub evaluated: usize,
    pub failures: usize,
}

/// Fraction of examples where the judge's choice equals the gold answer.
/// Failed examples are logged and excluded.
pub fn qa_accuracy(judge: &dyn Judge, corpus: &Corpus, source: &EvidenceSource<'_>, jobs: usize) -> AccuracyResult {
    let outcomes = par_map(&corpus.examples, jobs, |ex| -> Result<(bool, f64), String> {
        let passage = corpus.passage_of(ex);
        let fail = |e: &dyn std::fmt::Display| format!("{}: {e}", ex.id);
        let n = ex.num_options();
        let (choice, shown) = match source {
            EvidenceSource::RoundRobin { agent, turns } => {
                let agents = vec![*agent; n];
                let rr = run_round_robin(&agents, judge, ex, passage, *turns).map_err(|e| fail(&e))?;
                let shown = rr
                    .pairwise
                    .iter()
                    .fold(Evidence::new(), |acc, r| acc.union(&r.pool.pooled_indices))
                    .len();
                (rr.predicted_index, shown as f64)
            }
            EvidenceSource::Pool { agent, turns } => {
                let agents = vec![*agent; n];
                let pool = run_free_for_all(&agents, judge, ex, passage, *turns).map_err(|e| fail(&e))?;
                (pool.final_verdict.argmax(), pool.pooled_indices.len() as f64)
            }
            other => {
                let evidence = match other {
                    EvidenceSource::FullPassage => (0..passage.len()).collect(),
                    EvidenceSource::Selector { selector, k } => {
                        selector.select(ex, passage, *k).map_err(|e| fail(&e))?
                    }
                    _ => Evidence::new(),
                };
                let verdict = judge.score(ex, passage, &evidence).map_err(|e| fail(&e))?;
                (verdict.argmax(), evidence.len() as f64)
            }
        };
        Ok((choice == ex.gold_index, shown))
    });
    let mut correct = 0;
    let mut evaluated = 0;
    let mut failures = 0;
    let mut sentences = 0.0;
    for o in outcomes {
        match o {
            Ok((hit, shown)) => {
                evaluated += 1;
                correct += usize::from(hit);
                sentences += shown;
            }
            Err(e) => {
                log::warn!("accuracy: {e}");
                failures += 1;
            }
        }
    }
    let denom = evaluated.max(1) as f64;
    AccuracyResult {
        mode: source.mode(),
        accuracy: correct as f64 / denom,
        mean_sentences: sentences / denom,
        correct,
        evaluated,
        failures,
    }
}
