//! Judge reactions to single sentences, precomputed once at `t = 1` and
//! reused as training targets for every selection step.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FeatureExtractor;
use super::TrainingGroup;
use crate::corpus::{Corpus, CorpusError, Example};
use crate::evidence::Evidence;
use crate::judges::{argmax, Judge, JudgeError};
use crate::parallel::par_map;

/// For one `(example, answer)`: the judge's probability of the answer
/// given each single sentence, the empty-evidence probability, and their
/// difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceTargets {
    pub example_id: String,
    pub answer_index: usize,
    pub p_with: Vec<f64>,
    pub p_base: f64,
    pub delta: Vec<f64>,
    /// Sentence with the highest `p_with`, lowest index on ties.
    pub argmax_index: usize,
}

impl SentenceTargets {
    pub fn new(example_id: String, answer_index: usize, p_with: Vec<f64>, p_base: f64) -> Self {
        let delta = p_with.iter().map(|p| p - p_base).collect();
        let argmax_index = argmax(&p_with);
        Self {
            example_id,
            answer_index,
            p_with,
            p_base,
            delta,
            argmax_index,
        }
    }

    pub fn len(&self) -> usize {
        self.p_with.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_with.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetFailure {
    pub example_id: String,
    pub error: JudgeError,
}

#[derive(Debug, Default)]
pub struct TargetsOutcome {
    pub targets: Vec<SentenceTargets>,
    pub failures: Vec<TargetFailure>,
}

fn example_targets(
    judge: &dyn Judge,
    corpus: &Corpus,
    example: &Example,
) -> Result<Vec<SentenceTargets>, JudgeError> {
    let passage = corpus.passage_of(example);
    let base = judge.score(example, passage, &Evidence::new())?;
    let singles = (0..passage.len())
        .map(|s| judge.score(example, passage, &Evidence::single(s)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((0..example.num_options())
        .map(|i| {
            SentenceTargets::new(
                example.id.clone(),
                i,
                singles.iter().map(|v| v.probs[i]).collect(),
                base.probs[i],
            )
        })
        .collect())
}

/// Targets for every answer of every example. Gold labels are never read.
/// A judge failure drops that example and is reported; the batch goes on.
pub fn precompute_targets(judge: &dyn Judge, corpus: &Corpus, jobs: usize) -> TargetsOutcome {
    let results = par_map(&corpus.examples, jobs, |ex| {
        (ex.id.clone(), example_targets(judge, corpus, ex))
    });
    let mut out = TargetsOutcome::default();
    for (example_id, r) in results {
        match r {
            Ok(t) => out.targets.extend(t),
            Err(error) => {
                log::warn!("targets for {example_id} failed: {error}");
                out.failures.push(TargetFailure { example_id, error });
            }
        }
    }
    out
}

/// Pair every target row with the feature vectors of its passage.
pub fn build_training_groups(
    corpus: &Corpus,
    targets: &[SentenceTargets],
    features: &FeatureExtractor,
) -> Result<Vec<TrainingGroup>, CorpusError> {
    targets
        .iter()
        .map(|t| {
            let example = corpus.example(&t.example_id).ok_or_else(|| CorpusError::Malformed {
                path: "targets".into(),
                detail: format!("unknown example {}", t.example_id),
            })?;
            let passage = corpus.passage_of(example);
            Ok(TrainingGroup {
                features: features.featurize_passage(example, passage, t.answer_index),
                targets: t.clone(),
            })
        })
        .collect()
}

pub fn write_targets<W: Write>(mut writer: W, targets: &[SentenceTargets]) -> std::io::Result<()> {
    for t in targets {
        serde_json::to_writer(&mut writer, t)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_targets(path: &Path) -> Result<Vec<SentenceTargets>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
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
