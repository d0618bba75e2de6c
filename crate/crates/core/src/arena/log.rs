use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{run_free_for_all, run_round_robin, ArenaConfig, ArenaError, PoolResult, Protocol, RoundRobinResult};
use crate::agents::{run_agent, EvidenceAgent, EvidenceSelection};
use crate::corpus::{Corpus, CorpusError, Example};
use crate::judges::{Judge, JudgeVerdict};
use crate::parallel::par_map;
use crate::seed::config_hash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum ArenaOutcome {
    /// Each answer's agent alone, judged on its own evidence.
    Individual {
        selections: Vec<EvidenceSelection>,
        verdicts: Vec<JudgeVerdict>,
    },
    FreeForAll(PoolResult),
    RoundRobin(RoundRobinResult),
}

impl ArenaOutcome {
    /// The answer the judge ends up favouring.
    pub fn predicted_index(&self) -> usize {
        match self {
            ArenaOutcome::Individual { verdicts, .. } => {
                let own: Vec<f64> = verdicts.iter().enumerate().map(|(i, v)| v.probs[i]).collect();
                crate::judges::argmax(&own)
            }
            ArenaOutcome::FreeForAll(pool) => pool.final_verdict.argmax(),
            ArenaOutcome::RoundRobin(rr) => rr.predicted_index,
        }
    }

    /// Distinct sentences shown to the judge in the deciding call(s).
    pub fn evidence_size(&self) -> f64 {
        match self {
            ArenaOutcome::Individual { selections, .. } => {
                selections.iter().map(|s| s.sentence_indices.len()).sum::<usize>() as f64
                    / selections.len().max(1) as f64
            }
            ArenaOutcome::FreeForAll(pool) => pool.pooled_indices.len() as f64,
            ArenaOutcome::RoundRobin(rr) => {
                rr.pairwise.iter().map(|r| r.pool.pooled_indices.len()).sum::<usize>() as f64
                    / rr.pairwise.len().max(1) as f64
            }
        }
    }
}

/// One line of an arena log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaRecord {
    pub example_id: String,
    pub gold_index: usize,
    pub agent_id: String,
    pub judge_id: String,
    pub turns: usize,
    pub config_hash: String,
    pub outcome: ArenaOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArenaFailure {
    pub example_id: String,
    pub error: String,
}

pub fn run_on_example(
    protocol: Protocol,
    agent: &dyn EvidenceAgent,
    judge: &dyn Judge,
    corpus: &Corpus,
    example: &Example,
    turns: usize,
) -> Result<ArenaOutcome, ArenaError> {
    let passage = corpus.passage_of(example);
    let n = example.num_options();
    let agents: Vec<&dyn EvidenceAgent> = vec![agent; n];
    Ok(match protocol {
        Protocol::Individual => {
            let selections = (0..n)
                .map(|i| run_agent(agent, example, passage, i, turns))
                .collect::<Result<Vec<_>, _>>()?;
            let verdicts = selections
                .iter()
                .map(|s| judge.score(example, passage, &s.sentence_indices))
                .collect::<Result<Vec<_>, _>>()?;
            ArenaOutcome::Individual { selections, verdicts }
        }
        Protocol::FreeForAll => {
            ArenaOutcome::FreeForAll(run_free_for_all(&agents, judge, example, passage, turns)?)
        }
        Protocol::RoundRobin => {
            ArenaOutcome::RoundRobin(run_round_robin(&agents, judge, example, passage, turns)?)
        }
    })
}

/// Run one protocol over every example of `corpus`. The same agent argues
/// for every answer. Failed examples are reported, not fatal.
pub fn run_arena(
    config: &ArenaConfig,
    agent: &dyn EvidenceAgent,
    judge: &dyn Judge,
    corpus: &Corpus,
    jobs: usize,
) -> (Vec<ArenaRecord>, Vec<ArenaFailure>) {
    let hash = config_hash(config);
    let results = par_map(&corpus.examples, jobs, |ex| {
        run_on_example(config.protocol, agent, judge, corpus, ex, config.turns_per_agent)
            .map(|outcome| ArenaRecord {
                example_id: ex.id.clone(),
                gold_index: ex.gold_index,
                agent_id: agent.id().to_string(),
                judge_id: judge.id().to_string(),
                turns: config.turns_per_agent,
                config_hash: hash.clone(),
                outcome,
            })
            .map_err(|e| ArenaFailure {
                example_id: ex.id.clone(),
                error: e.to_string(),
            })
    });
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(f) => {
                log::warn!("arena: {}: {}", f.example_id, f.error);
                failures.push(f);
            }
        }
    }
    (records, failures)
}

pub fn write_arena_log<W: Write>(mut writer: W, records: &[ArenaRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_arena_log(path: &Path) -> Result<Vec<ArenaRecord>, CorpusError> {
    let io = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", n + 1),
        })?);
    }
    Ok(out)
}
