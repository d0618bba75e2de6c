//! Competition protocols.
//!
//! In a free-for-all every answer's agent picks one sentence per step from
//! the same snapshot of the pool; picks are merged only after all agents
//! have moved. A round robin plays a two-agent free-for-all for every pair
//! of answers and averages each answer's probability over its rounds.

mod answer_free;
mod human;
mod log;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{check_answer, AgentError, EvidenceAgent, EvidenceSelection};
use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;
use crate::judges::{argmax, Judge, JudgeError, JudgeVerdict};

pub use answer_free::{AnswerFreeAgent, AnswerFreeMethod, AnswerFreeSelector};
pub use human::{read_human_selections, write_human_selections, HumanRecordedAgent, HumanSelection};
pub use log::{read_arena_log, run_arena, run_on_example, write_arena_log, ArenaFailure, ArenaOutcome, ArenaRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArenaError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Judge(#[from] JudgeError),
    #[error("expected one agent per answer ({expected}), got {got}")]
    AgentCount { expected: usize, got: usize },
    #[error("round robin needs at least two answers")]
    TooFewAnswers,
    #[error("{0}")]
    MissingResource(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Individual,
    FreeForAll,
    RoundRobin,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Individual => "individual",
            Protocol::FreeForAll => "free-for-all",
            Protocol::RoundRobin => "round-robin",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "individual" => Ok(Protocol::Individual),
            "free-for-all" | "ffa" => Ok(Protocol::FreeForAll),
            "round-robin" | "rr" => Ok(Protocol::RoundRobin),
            _ => Err(format!("unknown protocol `{s}` (individual, free-for-all, round-robin)")),
        }
    }
}

/// Describes a run; hashed into every report row it produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaConfig {
    pub protocol: Protocol,
    pub turns_per_agent: usize,
    pub agent: String,
    pub judge: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolResult {
    /// Union of every agent's picks, in passage order.
    pub pooled_indices: Evidence,
    pub per_agent: Vec<EvidenceSelection>,
    pub final_verdict: JudgeVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRound {
    pub answers: (usize, usize),
    pub pool: PoolResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRobinResult {
    /// One round per unordered pair `(i, j)`, `i < j`, in lexicographic order.
    pub pairwise: Vec<PairRound>,
    /// Mean of `p(i | E_i ∪ E_j)` over the rounds answer `i` played. These
    /// do not sum to one.
    pub aggregated: Vec<f64>,
    pub predicted_index: usize,
}

/// A seat at the table: an agent arguing for one answer.
#[derive(Clone, Copy)]
pub struct Seat<'a> {
    pub answer: usize,
    pub agent: &'a dyn EvidenceAgent,
}

/// Simultaneous-move pool over any set of seats.
pub fn play_pool(
    seats: &[Seat<'_>],
    judge: &dyn Judge,
    example: &Example,
    passage: &Passage,
    turns: usize,
) -> Result<PoolResult, ArenaError> {
    if turns == 0 {
        return Err(AgentError::NoTurns.into());
    }
    if passage.is_empty() {
        return Err(AgentError::EmptyPassage(passage.id.clone()).into());
    }
    for s in seats {
        check_answer(example, s.answer)?;
    }
    let mut pool = Evidence::new();
    let mut per_agent: Vec<EvidenceSelection> =
        seats.iter().map(|s| EvidenceSelection::new(s.answer)).collect();
    for step in 1..=turns {
        let snapshot = pool.clone();
        let picks = seats
            .iter()
            .map(|s| s.agent.pick(example, passage, s.answer, &snapshot))
            .collect::<Result<Vec<_>, _>>()?;
        for (selection, pick) in per_agent.iter_mut().zip(picks) {
            pool.insert(pick.index);
            selection.record(step, pick);
        }
    }
    let final_verdict = judge.score(example, passage, &pool)?;
    Ok(PoolResult {
        pooled_indices: pool,
        per_agent,
        final_verdict,
    })
}

/// Free-for-all with `agents[i]` arguing for answer `i`.
pub fn run_free_for_all(
    agents: &[&dyn EvidenceAgent],
    judge: &dyn Judge,
    example: &Example,
    passage: &Passage,
    turns: usize,
) -> Result<PoolResult, ArenaError> {
    let n = example.num_options();
    if agents.len() != n {
        return Err(ArenaError::AgentCount {
            expected: n,
            got: agents.len(),
        });
    }
    let seats: Vec<Seat> = agents
        .iter()
        .enumerate()
        .map(|(answer, &agent)| Seat { answer, agent })
        .collect();
    play_pool(&seats, judge, example, passage, turns)
}

/// All `n(n-1)/2` pairs `(i, j)` with `i < j`.
pub fn answer_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

/// Average each answer's probability over the rounds it took part in.
/// Looks rounds up by pair, so the order of `rounds` is irrelevant.
pub fn aggregate_rounds(n: usize, rounds: &[PairRound]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let sum: f64 = (0..n)
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let key = (i.min(j), i.max(j));
                    rounds.iter().find(|r| r.answers == key)
                })
                .map(|r| r.pool.final_verdict.probs[i])
                .sum();
            sum / (n - 1) as f64
        })
        .collect()
}

pub fn run_round_robin(
    agents: &[&dyn EvidenceAgent],
    judge: &dyn Judge,
    example: &Example,
    passage: &Passage,
    turns: usize,
) -> Result<RoundRobinResult, ArenaError> {
    let n = example.num_options();
    if agents.len() != n {
        return Err(ArenaError::AgentCount {
            expected: n,
            got: agents.len(),
        });
    }
    if n < 2 {
        return Err(ArenaError::TooFewAnswers);
    }
    let pairwise = answer_pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let seats = [
                Seat { answer: i, agent: agents[i] },
                Seat { answer: j, agent: agents[j] },
            ];
            play_pool(&seats, judge, example, passage, turns).map(|pool| PairRound {
                answers: (i, j),
                pool,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let aggregated = aggregate_rounds(n, &pairwise);
    Ok(RoundRobinResult {
        predicted_index: argmax(&aggregated),
        aggregated,
        pairwise,
    })
}
