//! Linear per-sentence scorer trained on one of three objectives:
//!
//! | objective     | loss | target                                  |
//! |---------------|------|-----------------------------------------|
//! | `search-ce`   | CE   | index of the sentence search would pick |
//! | `p-mse`       | MSE  | `p(i | {s})`                            |
//! | `delta-p-mse` | MSE  | `p(i | {s}) - p(i | {})`                |
//!
//! For `search-ce` the softmax runs over the sentences of one passage.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{rank_descending, SentenceTargets, FEATURE_NAMES};
use crate::judges::softmax;
use crate::seed::{rng_for, stable_hash};

const FORMAT_HEADER: &str = "evarena-scorer 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    SearchCe,
    PMse,
    DeltaPMse,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::SearchCe, Objective::PMse, Objective::DeltaPMse];

    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::SearchCe => "search-ce",
            Objective::PMse => "p-mse",
            Objective::DeltaPMse => "delta-p-mse",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "search-ce" => Ok(Objective::SearchCe),
            "p-mse" => Ok(Objective::PMse),
            "delta-p-mse" => Ok(Objective::DeltaPMse),
            _ => Err(format!("unknown objective `{s}` (search-ce, p-mse, delta-p-mse)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("no training groups")]
    Empty,
    #[error("every group fell into the held-out split")]
    NoTrainingGroups,
    #[error("example {example_id} answer {answer}: {detail}")]
    TargetMismatch {
        example_id: String,
        answer: usize,
        detail: String,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The sentences of one `(example, answer)` pair with their targets.
#[derive(Debug, Clone)]
pub struct TrainingGroup {
    pub features: Vec<Vec<f64>>,
    pub targets: SentenceTargets,
}

impl TrainingGroup {
    fn target_values(&self, objective: Objective) -> &[f64] {
        match objective {
            Objective::PMse | Objective::SearchCe => &self.targets.p_with,
            Objective::DeltaPMse => &self.targets.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    /// Step size of the first epoch; epoch `k` uses
    /// `learning_rate / (1 + decay * k)`.
    pub learning_rate: f64,
    pub decay: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.02,
            decay: 0.2,
            epochs: 60,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerModel {
    pub objective: Objective,
    pub feature_names: Vec<String>,
    /// Per-feature standardization applied before the dot product.
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
    pub weights: Vec<f64>,
    pub trained_on: String,
}

impl ScorerModel {
    pub fn score(&self, features: &[f64]) -> f64 {
        features
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .zip(&self.weights)
            .map(|((x, (m, s)), w)| w * (x - m) / s)
            .sum()
    }

    pub fn score_all(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.score(r)).collect()
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        format!(
            "{FORMAT_HEADER}\nobjective {}\ntrained_on {}\nfeatures {}\nmeans {}\nscales {}\nweights {}\n",
            self.objective,
            self.trained_on,
            self.feature_names.join(" "),
            join(&self.means),
            join(&self.scales),
            join(&self.weights),
        )
    }

    pub fn from_text(text: &str) -> Result<Self, TrainError> {
        let mut lines = text.lines();
        if lines.next() != Some(FORMAT_HEADER) {
            return Err(TrainError::Format(format!("expected header `{FORMAT_HEADER}`")));
        }
        let mut field = |key: &str| -> Result<String, TrainError> {
            let line = lines
                .next()
                .ok_or_else(|| TrainError::Format(format!("missing `{key}` line")))?;
            line.strip_prefix(key)
                .map(|rest| rest.trim().to_string())
                .ok_or_else(|| TrainError::Format(format!("expected `{key}`, found `{line}`")))
        };
        let nums = |s: String| -> Result<Vec<f64>, TrainError> {
            s.split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|e| TrainError::Format(e.to_string())))
                .collect()
        };
        let objective = field("objective")?.parse().map_err(TrainError::Format)?;
        let trained_on = field("trained_on")?;
        let feature_names: Vec<String> =
            field("features")?.split_whitespace().map(str::to_string).collect();
        let means = nums(field("means")?)?;
        let scales = nums(field("scales")?)?;
        let weights = nums(field("weights")?)?;
        let d = feature_names.len();
        if means.len() != d || scales.len() != d || weights.len() != d {
            return Err(TrainError::Format(format!(
                "dimension mismatch: {d} features, {} means, {} scales, {} weights",
                means.len(),
                scales.len(),
                weights.len()
            )));
        }
        Ok(Self {
            objective,
            feature_names,
            means,
            scales,
            weights,
            trained_on,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub objective: Objective,
    /// Training loss after each epoch.
    pub epoch_losses: Vec<f64>,
    pub train_groups: usize,
    pub heldout_groups: usize,
    pub train_loss: f64,
    pub heldout_loss: Option<f64>,
    /// Held-out loss of a model that ignores the sentence: the training
    /// target mean for MSE objectives, a uniform distribution for CE.
    pub heldout_baseline_loss: Option<f64>,
    /// Fraction of groups whose top-scored sentence is the search choice.
    pub train_top1: f64,
    pub heldout_top1: Option<f64>,
    pub mean_sentences: f64,
}

/// Deterministic 90/10 split on a hash of the example id.
pub fn is_heldout(example_id: &str) -> bool {
    stable_hash(&["heldout", example_id]) % 10 == 0
}

fn validate(groups: &[TrainingGroup]) -> Result<usize, TrainError> {
    let dim = groups
        .first()
        .and_then(|g| g.features.first())
        .map(Vec::len)
        .ok_or(TrainError::Empty)?;
    for g in groups {
        let mismatch = |detail: String| TrainError::TargetMismatch {
            example_id: g.targets.example_id.clone(),
            answer: g.targets.answer_index,
            detail,
        };
        if g.features.is_empty() {
            return Err(mismatch("no sentences".into()));
        }
        if g.features.len() != g.targets.p_with.len() || g.targets.delta.len() != g.targets.p_with.len() {
            return Err(mismatch(format!(
                "{} feature rows but {} target values",
                g.features.len(),
                g.targets.p_with.len()
            )));
        }
        if g.targets.argmax_index >= g.features.len() {
            return Err(mismatch("search target outside passage".into()));
        }
        if g.features.iter().any(|r| r.len() != dim) {
            return Err(mismatch(format!("feature rows must all have {dim} values")));
        }
        if g.targets.p_with.iter().chain(&g.targets.delta).any(|v| !v.is_finite()) {
            return Err(mismatch("non-finite target".into()));
        }
    }
    Ok(dim)
}

fn standardization(groups: &[&TrainingGroup], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let rows: Vec<&Vec<f64>> = groups.iter().flat_map(|g| g.features.iter()).collect();
    let n = rows.len() as f64;
    let mut means = vec![0.0; dim];
    let mut scales = vec![1.0; dim];
    for k in 0..dim {
        let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / n;
        // constant columns (the bias) pass through unchanged
        if var.sqrt() > 1e-12 {
            means[k] = mean;
            scales[k] = var.sqrt();
        }
    }
    (means, scales)
}

fn group_loss(model: &ScorerModel, g: &TrainingGroup) -> f64 {
    let scores = model.score_all(&g.features);
    match model.objective {
        Objective::SearchCe => -softmax(&scores)[g.targets.argmax_index].max(1e-300).ln(),
        obj => {
            let y = g.target_values(obj);
            scores.iter().zip(y).map(|(s, t)| (s - t).powi(2)).sum::<f64>() / y.len() as f64
        }
    }
}

fn mean_loss(model: &ScorerModel, groups: &[&TrainingGroup]) -> f64 {
    groups.iter().map(|g| group_loss(model, g)).sum::<f64>() / groups.len() as f64
}

fn top1(model: &ScorerModel, groups: &[&TrainingGroup]) -> f64 {
    let hits = groups
        .iter()
        .filter(|g| rank_descending(&model.score_all(&g.features))[0] == g.targets.argmax_index)
        .count();
    hits as f64 / groups.len() as f64
}

fn baseline_loss(objective: Objective, train: &[&TrainingGroup], heldout: &[&TrainingGroup]) -> f64 {
    match objective {
        Objective::SearchCe => {
            heldout.iter().map(|g| (g.features.len() as f64).ln()).sum::<f64>() / heldout.len() as f64
        }
        obj => {
            let (sum, n) = train
                .iter()
                .flat_map(|g| g.target_values(obj))
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            let mean = sum / n as f64;
            heldout
                .iter()
                .map(|g| {
                    let y = g.target_values(obj);
                    y.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / y.len() as f64
                })
                .sum::<f64>()
                / heldout.len() as f64
        }
    }
}

/// Per-group gradient step. Weights act on standardized features.
fn sgd_step(model: &mut ScorerModel, g: &TrainingGroup, lr: f64) {
    let scores = model.score_all(&g.features);
    let residuals: Vec<f64> = match model.objective {
        Objective::SearchCe => {
            let mut p = softmax(&scores);
            p[g.targets.argmax_index] -= 1.0;
            p
        }
        obj => {
            let m = scores.len() as f64;
            scores
                .iter()
                .zip(g.target_values(obj))
                .map(|(s, t)| 2.0 * (s - t) / m)
                .collect()
        }
    };
    let dim = model.weights.len();
    let mut grad = vec![0.0; dim];
    for (row, r) in g.features.iter().zip(&residuals) {
        for k in 0..dim {
            grad[k] += r * (row[k] - model.means[k]) / model.scales[k];
        }
    }
    for (w, gk) in model.weights.iter_mut().zip(grad) {
        *w -= lr * gk;
    }
}

/// Train a scorer with plain SGD over shuffled groups. Groups whose
/// example id hashes into the held-out tenth are only evaluated.
pub fn train_scorer(
    groups: &[TrainingGroup],
    objective: Objective,
    params: TrainParams,
    trained_on: &str,
) -> Result<(ScorerModel, TrainReport), TrainError> {
    let dim = validate(groups)?;
    let (heldout, train): (Vec<&TrainingGroup>, Vec<&TrainingGroup>) =
        groups.iter().partition(|g| is_heldout(&g.targets.example_id));
    if train.is_empty() {
        return Err(TrainError::NoTrainingGroups);
    }
    let (means, scales) = standardization(&train, dim);
    let feature_names = if dim == FEATURE_NAMES.len() {
        FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (0..dim).map(|k| format!("f{k}")).collect()
    };
    let mut model = ScorerModel {
        objective,
        feature_names,
        means,
        scales,
        weights: vec![0.0; dim],
        trained_on: trained_on.to_string(),
    };

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut epoch_losses = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let mut rng = rng_for(params.seed, &format!("scorer-epoch-{epoch}"));
        order.shuffle(&mut rng);
        let lr = params.learning_rate / (1.0 + params.decay * epoch as f64);
        for &i in &order {
            sgd_step(&mut model, train[i], lr);
        }
        epoch_losses.push(mean_loss(&model, &train));
    }

    let held = (!heldout.is_empty()).then_some(&heldout);
    let report = TrainReport {
        objective,
        train_groups: train.len(),
        heldout_groups: heldout.len(),
        train_loss: mean_loss(&model, &train),
        heldout_loss: held.map(|h| mean_loss(&model, h)),
        heldout_baseline_loss: held.map(|h| baseline_loss(objective, &train, h)),
        train_top1: top1(&model, &train),
        heldout_top1: held.map(|h| top1(&model, h)),
        mean_sentences: groups.iter().map(|g| g.features.len()).sum::<usize>() as f64
            / groups.len() as f64,
        epoch_losses,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Groups whose targets are an exact linear function of two features.
    fn linear_groups(count: usize, f: impl Fn(f64, f64) -> f64) -> Vec<TrainingGroup> {
        (0..count)
            .map(|g| {
                let rows: Vec<Vec<f64>> = (0..5)
                    .map(|s| {
                        let a = ((g * 7 + s * 3) % 11) as f64 / 11.0;
                        let b = ((g * 5 + s * 2) % 13) as f64 / 13.0;
                        vec![1.0, a, b]
                    })
                    .collect();
                let p: Vec<f64> = rows.iter().map(|r| f(r[1], r[2])).collect();
                TrainingGroup {
                    features: rows,
                    targets: SentenceTargets::new(format!("ex{g}"), 0, p, 0.25),
                }
            })
            .collect()
    }

    #[test]
    fn realizable_targets_are_learned() {
        let groups = linear_groups(80, |a, b| 0.1 + 0.5 * a - 0.2 * b);
        let params = TrainParams { learning_rate: 0.05, decay: 0.0, epochs: 300, seed: 1 };
        let (_, report) = train_scorer(&groups, Objective::PMse, params, "t").unwrap();
        assert!(report.heldout_groups > 0);
        assert!(report.heldout_loss.unwrap() < 1e-6, "{report:?}");
    }

    #[test]
    fn constant_targets() {
        let groups = linear_groups(40, |_, _| 0.3);
        let (model, report) =
            train_scorer(&groups, Objective::PMse, TrainParams::default(), "t").unwrap();
        let pred = model.score(&groups[0].features[0]);
        assert!((pred - 0.3).abs() < 1e-3, "{pred}");
        assert!(report.heldout_loss.unwrap() <= report.heldout_baseline_loss.unwrap() + 1e-9);
    }

    #[test]
    fn deterministic_given_seed() {
        let groups = linear_groups(30, |a, b| a * b);
        let p = TrainParams { seed: 9, ..TrainParams::default() };
        let a = train_scorer(&groups, Objective::SearchCe, p, "t").unwrap();
        let b = train_scorer(&groups, Objective::SearchCe, p, "t").unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn mismatched_targets_rejected() {
        let mut groups = linear_groups(3, |a, _| a);
        groups[1].targets.p_with.pop();
        assert!(matches!(
            train_scorer(&groups, Objective::PMse, TrainParams::default(), "t"),
            Err(TrainError::TargetMismatch { .. })
        ));
        assert!(matches!(
            train_scorer(&[], Objective::PMse, TrainParams::default(), "t"),
            Err(TrainError::Empty)
        ));
    }

    #[test]
    fn text_round_trip() {
        let groups = linear_groups(20, |a, b| a - b);
        let (model, _) =
            train_scorer(&groups, Objective::DeltaPMse, TrainParams::default(), "fixture").unwrap();
        let back = ScorerModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back, model);
        assert!(ScorerModel::from_text("nope").is_err());
    }
}
