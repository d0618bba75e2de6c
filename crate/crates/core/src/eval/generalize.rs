use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{qa_accuracy, AccuracyResult, EvalError, EvalReport, EvalRow, EvidenceSource, Provenance};
use crate::agents::{
    build_training_groups, precompute_targets, train_scorer, EvidenceAgent, FeatureExtractor,
    LearnedAgent, Objective, SearchAgent, TrainParams,
};
use crate::arena::{AnswerFreeAgent, AnswerFreeMethod, AnswerFreeSelector};
use crate::corpus::{build_idf, Corpus, IdfTable, Passage, SourceTag, Vocabulary};
use crate::judges::{EmbeddingTable, Judge, JudgeConfig, JudgeKind, TfidfJudge, TfidfTarget};
use crate::seed::config_hash;

/// A predicate over examples, by passage length and source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub name: String,
    pub min_sentences: Option<usize>,
    pub max_sentences: Option<usize>,
    /// Accepted sources; empty accepts all.
    pub tags: Vec<SourceTag>,
}

impl SplitSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    pub fn min_sentences(mut self, n: usize) -> Self {
        self.min_sentences = Some(n);
        self
    }

    pub fn max_sentences(mut self, n: usize) -> Self {
        self.max_sentences = Some(n);
        self
    }

    pub fn tags(mut self, tags: &[SourceTag]) -> Self {
        self.tags = tags.to_vec();
        self
    }

    pub fn matches(&self, passage: &Passage) -> bool {
        let m = passage.len();
        self.min_sentences.map_or(true, |lo| m >= lo)
            && self.max_sentences.map_or(true, |hi| m <= hi)
            && (self.tags.is_empty() || self.tags.contains(&passage.source_tag))
    }

    pub fn apply(&self, corpus: &Corpus) -> Corpus {
        corpus.filter(|_, p| self.matches(p))
    }
}

/// Agents evaluated by round robin on the eval split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GenAgent {
    Search,
    /// A linear scorer trained on the train split against the train judge.
    Learned { objective: Objective },
    AnswerFree { method: AnswerFreeMethod },
}

impl GenAgent {
    pub fn label(&self) -> String {
        match self {
            GenAgent::Search => "search".into(),
            GenAgent::Learned { objective } => format!("learned:{objective}"),
            GenAgent::AnswerFree { method } => format!("answer-free:{method}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationConfig {
    pub experiment: String,
    pub train: SplitSpec,
    pub eval: SplitSpec,
    pub judge: JudgeKind,
    pub vocab: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub agents: Vec<GenAgent>,
    pub turns: Vec<usize>,
    /// Random baseline draws `random_factor * T` sentences per question.
    pub random_factor: usize,
    pub require_disjoint: bool,
    pub seed: u64,
}

impl GeneralizationConfig {
    pub fn new(experiment: impl Into<String>, train: SplitSpec, eval: SplitSpec, judge: JudgeKind) -> Self {
        Self {
            experiment: experiment.into(),
            train,
            eval,
            judge,
            vocab: None,
            embeddings: None,
            endpoint: None,
            agents: vec![GenAgent::Search],
            turns: vec![3, 4, 5, 6],
            random_factor: 2,
            require_disjoint: true,
            seed: 0,
        }
    }
}

struct Resources {
    idf: Arc<IdfTable>,
    vocab: Option<Arc<Vocabulary>>,
    embeddings: Option<Arc<EmbeddingTable>>,
    judge: Arc<dyn Judge>,
}

fn load_resources(config: &GeneralizationConfig, train: &Corpus) -> Result<Resources, EvalError> {
    let vocab = config
        .vocab
        .as_deref()
        .map(Vocabulary::load)
        .transpose()?
        .map(Arc::new);
    let embeddings = config
        .embeddings
        .as_deref()
        .map(EmbeddingTable::load)
        .transpose()?
        .map(Arc::new);
    let idf = Arc::new(build_idf(
        &train.passages,
        vocab.as_deref(),
        &format!("train:{}", config.train.name),
    )?);
    let mut jc = JudgeConfig::new(config.judge)
        .with_idf(idf.clone())
        .with_vocab(vocab.clone());
    if let Some(e) = &embeddings {
        jc = jc.with_embeddings(e.clone());
    }
    if let Some(ep) = &config.endpoint {
        jc = jc.with_endpoint(ep.clone());
    }
    let judge = jc.build()?;
    Ok(Resources {
        idf,
        vocab,
        embeddings,
        judge,
    })
}

fn build_agent(
    spec: &GenAgent,
    res: &Resources,
    train: &Corpus,
    seed: u64,
    jobs: usize,
) -> Result<Box<dyn EvidenceAgent>, EvalError> {
    Ok(match spec {
        GenAgent::Search => Box::new(SearchAgent::new(res.judge.clone())),
        GenAgent::Learned { objective } => {
            let features = FeatureExtractor::new(res.idf.clone(), res.vocab.clone(), res.embeddings.clone());
            let outcome = precompute_targets(res.judge.as_ref(), train, jobs);
            for f in &outcome.failures {
                log::warn!("targets: {}: {}", f.example_id, f.error);
            }
            let groups = build_training_groups(train, &outcome.targets, &features)?;
            let params = TrainParams {
                seed,
                ..TrainParams::default()
            };
            let (model, report) = train_scorer(&groups, *objective, params, &train_label(train))?;
            log::info!(
                "scorer {objective}: train loss {:.4}, held-out {:?}",
                report.train_loss,
                report.heldout_loss
            );
            Box::new(LearnedAgent::new(spec.label(), Arc::new(model), features))
        }
        GenAgent::AnswerFree { method } => {
            let mut sel = AnswerFreeSelector::new(*method, seed).with_tfidf(Arc::new(TfidfJudge::new(
                TfidfTarget::Option,
                res.idf.clone(),
                res.vocab.clone(),
            )));
            if let Some(e) = &res.embeddings {
                sel = sel.with_embeddings(e.clone());
            }
            Box::new(AnswerFreeAgent::new(sel))
        }
    })
}

fn train_label(train: &Corpus) -> String {
    format!("{} examples", train.examples.len())
}

/// Judge resources come from the train split only. On the eval split the
/// report has the full-passage and no-evidence rows, then for every turn
/// budget a random-sentence row and a round-robin row per agent. The best
/// budget of each series is flagged.
pub fn generalization_experiment(
    corpus: &Corpus,
    config: &GeneralizationConfig,
    jobs: usize,
) -> Result<EvalReport, EvalError> {
    let train = config.train.apply(corpus);
    let eval = config.eval.apply(corpus);
    if train.examples.is_empty() {
        return Err(EvalError::EmptySplit(config.train.name.clone()));
    }
    if eval.examples.is_empty() {
        return Err(EvalError::EmptySplit(config.eval.name.clone()));
    }
    if config.turns.iter().any(|&t| t == 0) {
        return Err(EvalError::Config("turn budgets must be at least 1".into()));
    }
    if config.require_disjoint {
        let train_ids: HashSet<&str> = train.passages.iter().map(|p| p.id.as_str()).collect();
        if let Some(p) = eval.passages.iter().find(|p| train_ids.contains(p.id.as_str())) {
            return Err(EvalError::Config(format!(
                "passage {} is in both `{}` and `{}`",
                p.id, config.train.name, config.eval.name
            )));
        }
    }
    let res = load_resources(config, &train)?;
    let judge = res.judge.as_ref();
    let experiment_hash = config_hash(config);
    let mut rows = Vec::new();
    let row = |mode: &str, agent: Option<String>, turns: Option<usize>, r: AccuracyResult| EvalRow {
        experiment: config.experiment.clone(),
        judge_id: judge.id().to_string(),
        mode: mode.to_string(),
        config_hash: config_hash(&(config, mode, &agent, turns)),
        agent_id: agent,
        turns,
        accuracy: r.accuracy,
        mean_sentences: r.mean_sentences,
        evaluated: r.evaluated,
        failures: r.failures,
        best: false,
    };

    rows.push(row("full-passage", None, None, qa_accuracy(judge, &eval, &EvidenceSource::FullPassage, jobs)));
    rows.push(row("none", None, None, qa_accuracy(judge, &eval, &EvidenceSource::None, jobs)));

    let mut series: Vec<Vec<usize>> = Vec::new();
    let mut random_rows = Vec::new();
    for &t in &config.turns {
        let source = EvidenceSource::Selector {
            selector: AnswerFreeSelector::new(AnswerFreeMethod::RandomK, config.seed),
            k: config.random_factor * t,
        };
        random_rows.push(rows.len());
        rows.push(row("random-k", None, Some(t), qa_accuracy(judge, &eval, &source, jobs)));
    }
    series.push(random_rows);

    for spec in &config.agents {
        let agent = build_agent(spec, &res, &train, config.seed, jobs)?;
        let mut idx = Vec::new();
        for &t in &config.turns {
            let source = EvidenceSource::RoundRobin {
                agent: agent.as_ref(),
                turns: t,
            };
            idx.push(rows.len());
            rows.push(row(
                "round-robin",
                Some(spec.label()),
                Some(t),
                qa_accuracy(judge, &eval, &source, jobs),
            ));
        }
        series.push(idx);
    }
    for s in series {
        let best = s
            .iter()
            .copied()
            .reduce(|a, b| if rows[b].accuracy > rows[a].accuracy { b } else { a });
        if let Some(b) = best {
            rows[b].best = true;
        }
    }

    Ok(EvalReport {
        config: serde_json::to_value(config).map_err(std::io::Error::from)?,
        config_hash: experiment_hash,
        provenance: Provenance {
            seed: config.seed,
            turns: config.turns.clone(),
            judge_ids: vec![judge.id().to_string()],
            train_examples: train.examples.len(),
            eval_examples: eval.examples.len(),
            idf_document_count: Some(res.idf.document_count),
        },
        rows,
    })
}
