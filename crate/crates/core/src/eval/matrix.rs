use serde::{Deserialize, Serialize};

use crate::agents::EvidenceAgent;
use crate::corpus::Corpus;
use crate::evidence::Evidence;
use crate::judges::Judge;
use crate::parallel::par_map;

/// Agent id of the row where the judge sees no evidence at all.
pub const NO_EVIDENCE_AGENT: &str = "no-evidence";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvincingnessCell {
    pub agent_id: String,
    pub judge_id: String,
    /// Fraction of evaluated `(question, answer)` pairs where the judge
    /// picked the agent's answer.
    pub rate: f64,
    pub count: usize,
    pub hits: usize,
    /// Pairs excluded because the agent or the judge failed.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvincingnessMatrix {
    pub cells: Vec<ConvincingnessCell>,
}

impl ConvincingnessMatrix {
    pub fn cell(&self, agent_id: &str, judge_id: &str) -> Option<&ConvincingnessCell> {
        self.cells
            .iter()
            .find(|c| c.agent_id == agent_id && c.judge_id == judge_id)
    }

    pub fn row(&self, agent_id: &str) -> Vec<&ConvincingnessCell> {
        self.cells.iter().filter(|c| c.agent_id == agent_id).collect()
    }
}

/// The judge's reaction to one agent sentence for one answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleSentenceOutcome {
    pub example_id: String,
    pub answer_index: usize,
    pub gold_index: usize,
    pub sentence_index: Option<usize>,
    pub prob: f64,
    pub judge_choice: usize,
}

/// One sentence per `(example, answer)` (or none when `agent` is `None`),
/// scored by `judge`. Failures come back as strings.
pub fn single_sentence_outcomes(
    agent: Option<&dyn EvidenceAgent>,
    judge: &dyn Judge,
    corpus: &Corpus,
    jobs: usize,
) -> Vec<Result<SingleSentenceOutcome, String>> {
    let pairs: Vec<(usize, usize)> = corpus
        .examples
        .iter()
        .enumerate()
        .flat_map(|(e, ex)| (0..ex.num_options()).map(move |i| (e, i)))
        .collect();
    par_map(&pairs, jobs, |&(e, answer)| {
        let ex = &corpus.examples[e];
        let passage = corpus.passage_of(ex);
        let sentence = match agent {
            Some(a) => Some(
                a.pick(ex, passage, answer, &Evidence::new())
                    .map_err(|err| format!("{}#{answer}: {err}", ex.id))?
                    .index,
            ),
            None => None,
        };
        let evidence = sentence.map(Evidence::single).unwrap_or_default();
        let verdict = judge
            .score(ex, passage, &evidence)
            .map_err(|err| format!("{}#{answer}: {err}", ex.id))?;
        Ok(SingleSentenceOutcome {
            example_id: ex.id.clone(),
            answer_index: answer,
            gold_index: ex.gold_index,
            sentence_index: sentence,
            prob: verdict.probs[answer],
            judge_choice: verdict.argmax(),
        })
    })
}

fn cell(agent_id: &str, judge_id: &str, outcomes: &[Result<SingleSentenceOutcome, String>]) -> ConvincingnessCell {
    let mut hits = 0;
    let mut count = 0;
    let mut failures = 0;
    for o in outcomes {
        match o {
            Ok(o) => {
                count += 1;
                if o.judge_choice == o.answer_index {
                    hits += 1;
                }
            }
            Err(e) => {
                log::warn!("matrix {agent_id} x {judge_id}: {e}");
                failures += 1;
            }
        }
    }
    ConvincingnessCell {
        agent_id: agent_id.to_string(),
        judge_id: judge_id.to_string(),
        rate: if count > 0 { hits as f64 / count as f64 } else { 0.0 },
        count,
        hits,
        failures,
    }
}

/// Every agent picks one sentence for every `(question, answer)` pair and
/// every judge decides given that sentence alone. A no-evidence row comes
/// first; with uniform verdicts and lowest-index tie-breaking its rate is
/// exactly `1/n`.
pub fn convincingness_matrix(
    agents: &[&dyn EvidenceAgent],
    judges: &[&dyn Judge],
    corpus: &Corpus,
    jobs: usize,
) -> ConvincingnessMatrix {
    let mut cells = Vec::new();
    for judge in judges {
        let outcomes = single_sentence_outcomes(None, *judge, corpus, jobs);
        cells.push(cell(NO_EVIDENCE_AGENT, judge.id(), &outcomes));
    }
    for agent in agents {
        // each agent picks once; only the judging differs per column
        let picks = single_picks(*agent, corpus, jobs);
        for judge in judges {
            let outcomes = par_map(&picks, jobs, |p| {
                let (e, answer, sentence) = p.clone()?;
                let ex = &corpus.examples[e];
                let verdict = judge
                    .score(ex, corpus.passage_of(ex), &Evidence::single(sentence))
                    .map_err(|err| format!("{}#{answer}: {err}", ex.id))?;
                Ok(SingleSentenceOutcome {
                    example_id: ex.id.clone(),
                    answer_index: answer,
                    gold_index: ex.gold_index,
                    sentence_index: Some(sentence),
                    prob: verdict.probs[answer],
                    judge_choice: verdict.argmax(),
                })
            });
            cells.push(cell(agent.id(), judge.id(), &outcomes));
        }
    }
    ConvincingnessMatrix { cells }
}

type PickResult = Result<(usize, usize, usize), String>;

fn single_picks(agent: &dyn EvidenceAgent, corpus: &Corpus, jobs: usize) -> Vec<PickResult> {
    let pairs: Vec<(usize, usize)> = corpus
        .examples
        .iter()
        .enumerate()
        .flat_map(|(e, ex)| (0..ex.num_options()).map(move |i| (e, i)))
        .collect();
    par_map(&pairs, jobs, |&(e, answer)| {
        let ex = &corpus.examples[e];
        agent
            .pick(ex, corpus.passage_of(ex), answer, &Evidence::new())
            .map(|p| (e, answer, p.index))
            .map_err(|err| format!("{}#{answer}: {err}", ex.id))
    })
}
