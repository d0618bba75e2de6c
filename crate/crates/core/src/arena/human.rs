use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{check_answer, pick_from_ranking, AgentError, EvidenceAgent, Pick};
use crate::corpus::{CorpusError, Example, Passage};
use crate::evidence::Evidence;

/// One annotator's choice of the strongest sentence for an answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanSelection {
    pub example_id: String,
    pub answer_index: usize,
    pub sentence_index: usize,
}

pub fn write_human_selections<W: Write>(mut writer: W, rows: &[HumanSelection]) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_human_selections(path: &Path) -> Result<Vec<HumanSelection>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", n + 1),
        })?);
    }
    Ok(rows)
}

/// Replays recorded human selections. Sentences are ranked by how many
/// annotators chose them.
#[derive(Debug, Clone, Default)]
pub struct HumanRecordedAgent {
    votes: HashMap<(String, usize), HashMap<usize, usize>>,
}

impl HumanRecordedAgent {
    pub fn new(rows: &[HumanSelection]) -> Self {
        let mut votes: HashMap<(String, usize), HashMap<usize, usize>> = HashMap::new();
        for r in rows {
            *votes
                .entry((r.example_id.clone(), r.answer_index))
                .or_default()
                .entry(r.sentence_index)
                .or_default() += 1;
        }
        Self { votes }
    }

    pub fn covers(&self, example_id: &str, answer: usize) -> bool {
        self.votes.contains_key(&(example_id.to_string(), answer))
    }
}

impl EvidenceAgent for HumanRecordedAgent {
    fn id(&self) -> &str {
        "human"
    }

    fn pick(
        &self,
        example: &Example,
        passage: &Passage,
        answer: usize,
        snapshot: &Evidence,
    ) -> Result<Pick, AgentError> {
        check_answer(example, answer)?;
        let missing = || AgentError::NoRecordedSelection {
            example: example.id.clone(),
            answer,
        };
        let votes = self
            .votes
            .get(&(example.id.clone(), answer))
            .ok_or_else(missing)?;
        let mut scores = vec![0.0; passage.len()];
        for (&s, &c) in votes {
            if let Some(slot) = scores.get_mut(s) {
                *slot = c as f64;
            }
        }
        if scores.iter().all(|&s| s == 0.0) {
            return Err(missing());
        }
        let pick = pick_from_ranking(scores, snapshot);
        // never pad with sentences nobody chose
        if pick.candidate_scores[pick.index] == 0.0 {
            let best = crate::agents::rank_descending(&pick.candidate_scores)[0];
            return Ok(Pick { index: best, ..pick });
        }
        Ok(pick)
    }
}
