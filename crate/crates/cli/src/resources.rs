//! Loading corpora, judges and agents from command-line arguments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use evarena::agents::{EvidenceAgent, FeatureExtractor, LearnedAgent, ScorerModel, SearchAgent};
use evarena::arena::{
    read_human_selections, AnswerFreeAgent, AnswerFreeMethod, AnswerFreeSelector, HumanRecordedAgent,
};
use evarena::corpus::{build_idf, read_corpus, Corpus, IdfTable, Vocabulary};
use evarena::judges::{EmbeddingTable, Judge, JudgeConfig, JudgeKind, TfidfJudge, TfidfTarget};

use crate::args::{AgentArgs, JudgeArgs};
use crate::CliError;

/// Missing inputs are usage errors.
pub fn require(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("missing input: {}", path.display())))
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CliError> {
    require(path)?;
    Ok(read_corpus(path)?)
}

/// Data to `path`, or to stdout.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|source| io_error(path, source))
}

pub fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub struct Resources {
    pub corpus: Corpus,
    pub idf: Arc<IdfTable>,
    pub vocab: Option<Arc<Vocabulary>>,
    pub embeddings: Option<Arc<EmbeddingTable>>,
    endpoint: Option<String>,
    timeout: Option<Duration>,
}

impl Resources {
    pub fn load(args: &JudgeArgs) -> Result<Self, CliError> {
        let corpus = load_corpus(&args.corpus)?;
        for p in [&args.idf, &args.vocab, &args.embeddings].into_iter().flatten() {
            require(p)?;
        }
        let vocab = args.vocab.as_deref().map(Vocabulary::load).transpose()?.map(Arc::new);
        let idf = match &args.idf {
            Some(p) => IdfTable::load(p)?,
            None => build_idf(&corpus.passages, vocab.as_deref(), &args.corpus.display().to_string())?,
        };
        let embeddings = args
            .embeddings
            .as_deref()
            .map(EmbeddingTable::load)
            .transpose()?
            .map(Arc::new);
        Ok(Self {
            corpus,
            idf: Arc::new(idf),
            vocab,
            embeddings,
            endpoint: args.endpoint.clone(),
            timeout: args.timeout_ms.map(Duration::from_millis),
        })
    }

    pub fn judge(&self, kind: JudgeKind) -> Result<Arc<dyn Judge>, CliError> {
        let mut config = JudgeConfig::new(kind)
            .with_idf(self.idf.clone())
            .with_vocab(self.vocab.clone());
        if let Some(e) = &self.embeddings {
            config = config.with_embeddings(e.clone());
        }
        if let Some(e) = &self.endpoint {
            config = config.with_endpoint(e.clone());
        }
        config.timeout = self.timeout;
        Ok(config.build()?)
    }

    pub fn features(&self) -> FeatureExtractor {
        FeatureExtractor::new(self.idf.clone(), self.vocab.clone(), self.embeddings.clone())
    }

    /// Resolve an agent spec; plain `search` argues against `default_judge`.
    pub fn agent(
        &self,
        spec: &str,
        args: &AgentArgs,
        default_judge: JudgeKind,
        seed: u64,
    ) -> Result<Arc<dyn EvidenceAgent>, CliError> {
        let (head, tail) = match spec.split_once(':') {
            Some((h, t)) => (h, Some(t)),
            None => (spec, None),
        };
        Ok(match (head, tail) {
            ("search", None) => Arc::new(SearchAgent::new(self.judge(default_judge)?)),
            ("search", Some(kind)) => {
                let kind: JudgeKind = kind.parse().map_err(CliError::Usage)?;
                Arc::new(SearchAgent::new(self.judge(kind)?))
            }
            ("learned", _) => {
                let path = args
                    .model
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("learned agents need --model".into()))?;
                require(path)?;
                let model = Arc::new(ScorerModel::load(path)?);
                let id = format!("learned:{}", model.objective);
                Arc::new(LearnedAgent::new(id, model, self.features()))
            }
            ("answer-free", Some(method)) => {
                let method: AnswerFreeMethod = method.parse().map_err(CliError::Usage)?;
                Arc::new(AnswerFreeAgent::new(self.selector(method, seed)))
            }
            ("human", None) => {
                let path = args
                    .human_selections
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("the human agent needs --human-selections".into()))?;
                require(path)?;
                Arc::new(HumanRecordedAgent::new(&read_human_selections(path)?))
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "unknown agent `{spec}` (search, search:<judge>, learned, answer-free:<method>, human)"
                )))
            }
        })
    }

    pub fn selector(&self, method: AnswerFreeMethod, seed: u64) -> AnswerFreeSelector {
        let mut s = AnswerFreeSelector::new(method, seed).with_tfidf(Arc::new(TfidfJudge::new(
            TfidfTarget::Option,
            self.idf.clone(),
            self.vocab.clone(),
        )));
        if let Some(e) = &self.embeddings {
            s = s.with_embeddings(e.clone());
        }
        s
    }
}
