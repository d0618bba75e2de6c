//! Corpus, judges and agents a service instance can reference by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use evarena::agents::{EvidenceAgent, SearchAgent};
use evarena::arena::{AnswerFreeAgent, AnswerFreeMethod, AnswerFreeSelector};
use evarena::corpus::{build_idf, Corpus};
use evarena::judges::{EmbeddingTable, Judge, JudgeConfig, JudgeKind, TfidfJudge, TfidfTarget};

use crate::ServiceError;

pub struct Catalog {
    pub corpus: Corpus,
    judges: BTreeMap<String, Arc<dyn Judge>>,
    agents: BTreeMap<String, Arc<dyn EvidenceAgent>>,
    agent_judge: BTreeMap<String, String>,
}

impl Catalog {
    pub fn new(corpus: Corpus) -> Self {
        Self {
            corpus,
            judges: BTreeMap::new(),
            agents: BTreeMap::new(),
            agent_judge: BTreeMap::new(),
        }
    }

    /// Register a judge together with its search agent `search:<judge>`.
    pub fn with_judge(mut self, judge: Arc<dyn Judge>) -> Self {
        let agent = SearchAgent::new(judge.clone());
        self.agent_judge
            .insert(agent.id().to_string(), judge.id().to_string());
        self.agents.insert(agent.id().to_string(), Arc::new(agent));
        self.judges.insert(judge.id().to_string(), judge);
        self
    }

    pub fn with_agent(mut self, agent: Arc<dyn EvidenceAgent>) -> Self {
        self.agents.insert(agent.id().to_string(), agent);
        self
    }

    /// TF-IDF judges with an IDF table over the whole corpus, the
    /// embedding judge when vectors are given, their search agents, and
    /// the answer-free baselines.
    pub fn standard(
        corpus: Corpus,
        embeddings: Option<Arc<EmbeddingTable>>,
        seed: u64,
    ) -> Result<Self, ServiceError> {
        let idf = Arc::new(
            build_idf(&corpus.passages, None, "service")
                .map_err(|e| ServiceError::Config(e.to_string()))?,
        );
        let mut catalog = Catalog::new(corpus);
        let mut kinds = vec![JudgeKind::TfidfSqa, JudgeKind::TfidfSa];
        if embeddings.is_some() {
            kinds.push(JudgeKind::EmbeddingSa);
        }
        for kind in kinds {
            let mut config = JudgeConfig::new(kind).with_idf(idf.clone());
            if let Some(e) = &embeddings {
                config = config.with_embeddings(e.clone());
            }
            let judge = config.build().map_err(|e| ServiceError::Config(e.to_string()))?;
            catalog = catalog.with_judge(judge);
        }
        let question_tfidf = Arc::new(TfidfJudge::new(TfidfTarget::QuestionAndOption, idf, None));
        let selectors = [
            AnswerFreeSelector::new(AnswerFreeMethod::FirstN, seed),
            AnswerFreeSelector::new(AnswerFreeMethod::RandomK, seed),
            AnswerFreeSelector::new(AnswerFreeMethod::TfidfQuestion, seed).with_tfidf(question_tfidf),
        ];
        for s in selectors {
            catalog = catalog.with_agent(Arc::new(AnswerFreeAgent::new(s)));
        }
        Ok(catalog)
    }

    pub fn agent(&self, id: &str) -> Result<Arc<dyn EvidenceAgent>, ServiceError> {
        self.agents
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownAgent(id.to_string()))
    }

    pub fn judge(&self, id: &str) -> Result<Arc<dyn Judge>, ServiceError> {
        self.judges
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownJudge(id.to_string()))
    }

    /// The judge paired with an agent: its own judge for search agents,
    /// otherwise the first registered judge.
    pub fn judge_for(&self, agent: &str) -> Result<Arc<dyn Judge>, ServiceError> {
        match self.agent_judge.get(agent) {
            Some(j) => self.judge(j),
            None => self
                .judges
                .values()
                .next()
                .cloned()
                .ok_or_else(|| ServiceError::Config("no judge registered".into())),
        }
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = &str> {
        self.agents.keys().map(String::as_str)
    }

    pub fn judge_ids(&self) -> impl Iterator<Item = &str> {
        self.judges.keys().map(String::as_str)
    }
}
