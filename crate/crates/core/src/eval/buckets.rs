use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agents::{rank_descending, ScorerModel, TrainingGroup};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub correct: usize,
    /// Top-1 agreement with search; `None` for an empty bucket.
    pub rate: Option<f64>,
}

/// Groups `(example, answer)` pairs by `|delta|` of the sentence search
/// picks, then reports how often the scorer's top sentence is that same
/// sentence. Buckets are `[e_k, e_{k+1})`, the last one closed. Rows whose
/// `|delta|` falls outside the edges are skipped.
pub fn confidence_bucket_report(
    model: &ScorerModel,
    groups: &[TrainingGroup],
    edges: &[f64],
) -> Result<Vec<BucketRow>, EvalError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EvalError::Config(
            "bucket edges must be at least two strictly increasing values".into(),
        ));
    }
    let mut rows: Vec<BucketRow> = edges
        .windows(2)
        .map(|w| BucketRow {
            lower: w[0],
            upper: w[1],
            count: 0,
            correct: 0,
            rate: None,
        })
        .collect();
    let last = rows.len() - 1;
    for g in groups {
        let target = g.targets.argmax_index;
        let size = g.targets.delta[target].abs();
        let slot = rows
            .iter()
            .position(|r| size >= r.lower && size < r.upper)
            .or_else(|| (size == rows[last].upper).then_some(last));
        let Some(slot) = slot else {
            log::debug!("bucket: |delta| {size} outside edges for {}", g.targets.example_id);
            continue;
        };
        let predicted = rank_descending(&model.score_all(&g.features))[0];
        rows[slot].count += 1;
        rows[slot].correct += usize::from(predicted == target);
    }
    for r in &mut rows {
        r.rate = (r.count > 0).then(|| r.correct as f64 / r.count as f64);
    }
    Ok(rows)
}

/// Edges splitting the search sentences' `|delta|` values into `k`
/// roughly equal-count buckets, from 0 to the largest value.
pub fn quantile_edges(groups: &[TrainingGroup], k: usize) -> Vec<f64> {
    let mut sizes: Vec<f64> = groups
        .iter()
        .map(|g| g.targets.delta[g.targets.argmax_index].abs())
        .collect();
    sizes.sort_by(f64::total_cmp);
    let Some(&max) = sizes.last() else {
        return vec![0.0, 1.0];
    };
    let mut edges = vec![0.0];
    for q in 1..k {
        let e = sizes[q * sizes.len() / k];
        if e > *edges.last().unwrap() && e < max {
            edges.push(e);
        }
    }
    edges.push(if max > 0.0 { max } else { 1.0 });
    edges
}
