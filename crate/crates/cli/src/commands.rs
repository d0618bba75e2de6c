use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use evarena::agents::{
    build_training_groups, precompute_targets, read_targets, run_agent, train_scorer, write_targets,
    EvidenceAgent, ScorerModel, TrainParams,
};
use evarena::arena::{run_arena, write_arena_log, AnswerFreeMethod, ArenaConfig};
use evarena::corpus::{build_idf, import_dream, import_race, write_corpus, Vocabulary};
use evarena::eval::{
    confidence_bucket_report, convincingness_matrix, generalization_experiment, human_agreement_report,
    qa_accuracy, quantile_edges, single_sentence_outcomes, write_csv, EvidenceMode, EvidenceSource,
    GenAgent, GeneralizationConfig, HumanResponse, SplitSpec,
};
use evarena::judges::Judge;
use evarena::seed::config_hash;
use evarena::Evidence;
use evarena_service::{Catalog, ServeConfig, Service};
use serde::Serialize;

use crate::args::*;
use crate::resources::{create, io_error, load_corpus, output, require, Resources};
use crate::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let (seed, jobs) = (cli.seed, cli.jobs);
    match cli.command {
        Command::Ingest(a) => ingest(&a),
        Command::BuildIdf(a) => build_idf_cmd(&a),
        Command::PrecomputeTargets(a) => targets(&a, jobs),
        Command::TrainScorer(a) => train(&a, seed),
        Command::Select(a) => select(&a, seed, jobs),
        Command::Compete(a) => compete(&a, seed, jobs),
        Command::Matrix(a) => matrix(&a, seed, jobs),
        Command::Accuracy(a) => accuracy(&a, seed, jobs),
        Command::Generalize(a) => generalize(&a, seed, jobs),
        Command::Report(a) => match a.kind {
            ReportKind::Buckets(b) => buckets(&b),
            ReportKind::Human(h) => human(&h, seed, jobs),
        },
        Command::Serve(a) => serve(&a, seed),
    }
}

fn check_turns(turns: usize) -> Result<(), CliError> {
    if turns == 0 {
        return Err(CliError::Usage("--turns must be at least 1".into()));
    }
    Ok(())
}

fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    require(&a.input)?;
    let outcome = match a.dataset {
        Dataset::Race => import_race(&a.input)?,
        Dataset::Dream => import_dream(&a.input)?,
    };
    for d in &outcome.diagnostics {
        log::warn!("skipped {d:?}");
    }
    let skipped = outcome.diagnostics.len();
    let corpus = outcome.into_corpus()?;
    write_corpus(create(&a.out)?, &corpus).map_err(|e| io_error(&a.out, e))?;
    log::info!(
        "{} passages, {} examples, {skipped} skipped",
        corpus.passages.len(),
        corpus.examples.len()
    );
    Ok(())
}

fn build_idf_cmd(a: &BuildIdfArgs) -> Result<(), CliError> {
    let corpus = load_corpus(&a.corpus)?;
    if let Some(v) = &a.vocab {
        require(v)?;
    }
    let vocab = a.vocab.as_deref().map(Vocabulary::load).transpose()?;
    let table = build_idf(&corpus.passages, vocab.as_ref(), &a.corpus.display().to_string())?;
    table.save(&a.out)?;
    Ok(())
}

fn targets(a: &TargetsArgs, jobs: usize) -> Result<(), CliError> {
    let res = Resources::load(&a.res)?;
    let judge = res.judge(a.judge)?;
    let outcome = precompute_targets(judge.as_ref(), &res.corpus, jobs);
    for f in &outcome.failures {
        log::warn!("{}: {}", f.example_id, f.error);
    }
    write_targets(create(&a.out)?, &outcome.targets).map_err(|e| io_error(&a.out, e))?;
    log::info!("{} targets, {} failed examples", outcome.targets.len(), outcome.failures.len());
    Ok(())
}

fn train(a: &TrainArgs, seed: u64) -> Result<(), CliError> {
    let res = Resources::load(&a.res)?;
    require(&a.targets)?;
    let targets = read_targets(&a.targets)?;
    let groups = build_training_groups(&res.corpus, &targets, &res.features())?;
    let params = TrainParams {
        learning_rate: a.learning_rate,
        decay: a.decay,
        epochs: a.epochs,
        seed,
    };
    let (model, report) = train_scorer(&groups, a.objective, params, &a.targets.display().to_string())?;
    model.save(&a.out)?;
    if let Some(path) = &a.report {
        serde_json::to_writer_pretty(create(path)?, &report)?;
    }
    log::info!("train loss {:.6}, held-out {:?}", report.train_loss, report.heldout_loss);
    Ok(())
}

#[derive(Serialize)]
struct SelectRow<'a> {
    example_id: &'a str,
    answer_index: usize,
    agent_id: &'a str,
    judge_id: &'a str,
    turns: usize,
    sentence_indices: Evidence,
    /// Judge probability of the answer given the selection.
    prob: f64,
    config_hash: &'a str,
}

fn select(a: &SelectArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    check_turns(a.turns)?;
    let res = Resources::load(&a.res)?;
    let judge = res.judge(a.judge)?;
    let agent = res.agent(&a.agent.agent, &a.agent, a.judge, seed)?;
    let examples: Vec<_> = match &a.example {
        Some(id) => vec![res
            .corpus
            .example(id)
            .ok_or_else(|| CliError::Usage(format!("unknown example {id}")))?],
        None => res.corpus.examples.iter().collect(),
    };
    let hash = config_hash(&(agent.id(), judge.id(), a.turns, seed));
    let rows = evarena::parallel::par_map(&examples, jobs, |ex| {
        let passage = res.corpus.passage_of(ex);
        (0..ex.num_options())
            .map(|answer| {
                let sel = run_agent(agent.as_ref(), ex, passage, answer, a.turns)?;
                let verdict = judge.score(ex, passage, &sel.sentence_indices)?;
                Ok::<_, CliError>((ex.id.as_str(), answer, sel.sentence_indices, verdict.probs[answer]))
            })
            .collect::<Result<Vec<_>, _>>()
    });
    let mut out = output(a.out.as_deref())?;
    for (ex, result) in examples.iter().zip(rows) {
        match result {
            Ok(rows) => {
                for (example_id, answer_index, sentence_indices, prob) in rows {
                    let row = SelectRow {
                        example_id,
                        answer_index,
                        agent_id: agent.id(),
                        judge_id: judge.id(),
                        turns: a.turns,
                        sentence_indices,
                        prob,
                        config_hash: &hash,
                    };
                    serde_json::to_writer(&mut out, &row)?;
                    writeln!(out).map_err(|e| io_error(Path::new("-"), e))?;
                }
            }
            Err(e) => log::warn!("{}: {e}", ex.id),
        }
    }
    out.flush().map_err(|e| io_error(Path::new("-"), e))
}

fn compete(a: &CompeteArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    check_turns(a.turns)?;
    let res = Resources::load(&a.res)?;
    let judge = res.judge(a.judge)?;
    let agent = res.agent(&a.agent.agent, &a.agent, a.judge, seed)?;
    let config = ArenaConfig {
        protocol: a.protocol,
        turns_per_agent: a.turns,
        agent: agent.id().to_string(),
        judge: judge.id().to_string(),
        seed,
    };
    let (records, failures) = run_arena(&config, agent.as_ref(), judge.as_ref(), &res.corpus, jobs);
    for f in &failures {
        log::warn!("{}: {}", f.example_id, f.error);
    }
    let mut out = output(a.out.as_deref())?;
    write_arena_log(&mut out, &records).map_err(|e| io_error(Path::new("-"), e))?;
    let correct = records.iter().filter(|r| r.outcome.predicted_index() == r.gold_index).count();
    log::info!("{} records, {} correct, {} failures", records.len(), correct, failures.len());
    Ok(())
}

fn matrix(a: &MatrixArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    let res = Resources::load(&a.res)?;
    let judges = a.judge.iter().map(|&k| res.judge(k)).collect::<Result<Vec<_>, _>>()?;
    let agent_args = AgentArgs {
        agent: String::new(),
        model: a.model.clone(),
        human_selections: a.human_selections.clone(),
    };
    let mut agents: Vec<Arc<dyn EvidenceAgent>> = Vec::new();
    for spec in &a.agent {
        if spec == "search" {
            for &k in &a.judge {
                agents.push(res.agent(spec, &agent_args, k, seed)?);
            }
        } else {
            agents.push(res.agent(spec, &agent_args, a.judge[0], seed)?);
        }
    }
    let agent_refs: Vec<&dyn EvidenceAgent> = agents.iter().map(|x| x.as_ref()).collect();
    let judge_refs: Vec<&dyn Judge> = judges.iter().map(|x| x.as_ref()).collect();
    let m = convincingness_matrix(&agent_refs, &judge_refs, &res.corpus, jobs);
    write_csv(output(a.out.as_deref())?, &m.cells)?;
    Ok(())
}

/// One accuracy measurement, as printed by `accuracy`.
#[derive(Debug, Serialize)]
pub struct AccuracyRow {
    pub judge_id: String,
    pub mode: EvidenceMode,
    pub agent_id: Option<String>,
    pub k: Option<usize>,
    pub turns: Option<usize>,
    pub accuracy: f64,
    pub mean_sentences: f64,
    pub correct: usize,
    pub evaluated: usize,
    pub failures: usize,
    pub config_hash: String,
}

fn accuracy(a: &AccuracyArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    check_turns(a.turns)?;
    let res = Resources::load(&a.res)?;
    let judge = res.judge(a.judge)?;
    let agent = match a.mode {
        EvidenceMode::AgentPool | EvidenceMode::RoundRobin => {
            Some(res.agent(&a.agent.agent, &a.agent, a.judge, seed)?)
        }
        _ => None,
    };
    let (source, k, turns) = match a.mode {
        EvidenceMode::FullPassage => (EvidenceSource::FullPassage, None, None),
        EvidenceMode::None => (EvidenceSource::None, None, None),
        EvidenceMode::RandomK => (
            EvidenceSource::Selector {
                selector: res.selector(AnswerFreeMethod::RandomK, seed),
                k: a.k,
            },
            Some(a.k),
            None,
        ),
        EvidenceMode::AnswerFree => (
            EvidenceSource::Selector {
                selector: res.selector(a.method, seed),
                k: a.k,
            },
            Some(a.k),
            None,
        ),
        EvidenceMode::AgentPool => (
            EvidenceSource::Pool {
                agent: agent.as_deref().expect("agent loaded for pool mode"),
                turns: a.turns,
            },
            None,
            Some(a.turns),
        ),
        EvidenceMode::RoundRobin => (
            EvidenceSource::RoundRobin {
                agent: agent.as_deref().expect("agent loaded for round-robin mode"),
                turns: a.turns,
            },
            None,
            Some(a.turns),
        ),
    };
    let result = qa_accuracy(judge.as_ref(), &res.corpus, &source, jobs);
    let agent_id = agent.as_ref().map(|x| x.id().to_string());
    let hash = config_hash(&(judge.id(), result.mode, &agent_id, k, turns, seed));
    let row = AccuracyRow {
        judge_id: judge.id().to_string(),
        mode: result.mode,
        agent_id,
        k,
        turns,
        accuracy: result.accuracy,
        mean_sentences: result.mean_sentences,
        correct: result.correct,
        evaluated: result.evaluated,
        failures: result.failures,
        config_hash: hash,
    };
    write_csv(output(a.out.as_deref())?, &[row])?;
    Ok(())
}

fn gen_agent(spec: &str) -> Result<GenAgent, CliError> {
    match spec.split_once(':') {
        None if spec == "search" => Ok(GenAgent::Search),
        Some(("learned", o)) => Ok(GenAgent::Learned {
            objective: o.parse().map_err(CliError::Usage)?,
        }),
        Some(("answer-free", m)) => Ok(GenAgent::AnswerFree {
            method: m.parse().map_err(CliError::Usage)?,
        }),
        _ => Err(CliError::Usage(format!(
            "unknown agent `{spec}` (search, learned:<objective>, answer-free:<method>)"
        ))),
    }
}

fn split(name: &str, min: Option<usize>, max: Option<usize>) -> SplitSpec {
    let mut s = SplitSpec::named(name);
    if let Some(n) = min {
        s = s.min_sentences(n);
    }
    if let Some(n) = max {
        s = s.max_sentences(n);
    }
    s
}

fn generalize(a: &GeneralizeArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    let corpus = load_corpus(&a.res.corpus)?;
    if a.res.idf.is_some() {
        log::warn!("--idf is ignored: generalize builds IDF from the train split");
    }
    for p in [&a.res.vocab, &a.res.embeddings].into_iter().flatten() {
        require(p)?;
    }
    let train = split("train", a.train_min_sentences, a.train_max_sentences);
    let eval = split("eval", a.eval_min_sentences, a.eval_max_sentences);
    let mut config = GeneralizationConfig::new(&a.experiment, train, eval, a.judge);
    config.vocab = a.res.vocab.clone();
    config.embeddings = a.res.embeddings.clone();
    config.endpoint = a.res.endpoint.clone();
    config.agents = a.agents.iter().map(|s| gen_agent(s)).collect::<Result<_, _>>()?;
    config.turns = a.turns.0.clone();
    config.random_factor = a.random_factor;
    config.require_disjoint = !a.allow_overlap;
    config.seed = seed;
    let report = generalization_experiment(&corpus, &config, jobs)?;
    if let Some(path) = &a.out {
        report.write_json(path)?;
    }
    write_csv(output(None)?, &report.rows)?;
    Ok(())
}

fn buckets(a: &BucketArgs) -> Result<(), CliError> {
    let res = Resources::load(&a.res)?;
    require(&a.model)?;
    require(&a.targets)?;
    let model = ScorerModel::load(&a.model)?;
    let targets = read_targets(&a.targets)?;
    let groups = build_training_groups(&res.corpus, &targets, &res.features())?;
    let edges = if a.edges.is_empty() {
        if a.buckets == 0 {
            return Err(CliError::Usage("--buckets must be at least 1".into()));
        }
        quantile_edges(&groups, a.buckets)
    } else {
        a.edges.clone()
    };
    let rows = confidence_bucket_report(&model, &groups, &edges)?;
    write_csv(output(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn human(a: &HumanArgs, seed: u64, jobs: usize) -> Result<(), CliError> {
    let res = Resources::load(&a.res)?;
    require(&a.responses)?;
    let file = std::fs::File::open(&a.responses).map_err(|e| io_error(&a.responses, e))?;
    let mut responses = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| io_error(&a.responses, e))?;
        if !line.trim().is_empty() {
            responses.push(serde_json::from_str::<HumanResponse>(&line)?);
        }
    }
    let judge = res.judge(a.judge)?;
    let agent = res.agent(&a.agent.agent, &a.agent, a.judge, seed)?;
    let outcomes: Vec<_> = single_sentence_outcomes(Some(agent.as_ref()), judge.as_ref(), &res.corpus, jobs)
        .into_iter()
        .filter_map(|o| o.map_err(|e| log::warn!("{e}")).ok())
        .collect();
    let rows = human_agreement_report(&responses, &outcomes);
    write_csv(output(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn serve(a: &ServeArgs, seed: u64) -> Result<(), CliError> {
    let corpus = load_corpus(&a.corpus)?;
    if let Some(p) = &a.embeddings {
        require(p)?;
    }
    let embeddings = a
        .embeddings
        .as_deref()
        .map(evarena::judges::EmbeddingTable::load)
        .transpose()?
        .map(Arc::new);
    let catalog = Arc::new(Catalog::standard(corpus, embeddings, seed)?);
    let mut config = ServeConfig::from_env()?;
    if let Some(p) = a.port {
        config.port = p;
    }
    if let Some(d) = &a.data_dir {
        config.data_dir = d.clone();
    }
    config.static_dir = a.static_dir.clone();
    let service = Arc::new(Service::open(catalog, &config.data_dir)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| io_error(Path::new("tokio"), e))?;
    runtime.block_on(evarena_service::serve(service, &config))?;
    Ok(())
}
