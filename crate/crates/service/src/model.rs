use std::fmt;

use evarena::arena::HumanSelection;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// One agent-selected sentence per (question, answer) item.
    SingleAgentSentence,
    /// The deduplicated free-for-all pool, one item per question.
    PooledEvidence,
    FullPassage,
    /// Question and options only, one item per (question, answer).
    NoPassage,
    /// Full passage plus one option; the human picks the sentence that
    /// supports it best.
    HumanEvidenceAnnotation,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::SingleAgentSentence,
        Condition::PooledEvidence,
        Condition::FullPassage,
        Condition::NoPassage,
        Condition::HumanEvidenceAnnotation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::SingleAgentSentence => "single-agent-sentence",
            Condition::PooledEvidence => "pooled-evidence",
            Condition::FullPassage => "full-passage",
            Condition::NoPassage => "no-passage",
            Condition::HumanEvidenceAnnotation => "human-evidence-annotation",
        }
    }

    /// Whether items are per (question, answer) rather than per question.
    pub fn per_answer(&self) -> bool {
        matches!(
            self,
            Condition::SingleAgentSentence | Condition::NoPassage | Condition::HumanEvidenceAnnotation
        )
    }

    pub fn needs_agent(&self) -> bool {
        matches!(self, Condition::SingleAgentSentence | Condition::PooledEvidence)
    }

    pub fn choice_kind(&self) -> ChoiceKind {
        match self {
            Condition::HumanEvidenceAnnotation => ChoiceKind::Sentence,
            _ => ChoiceKind::Option,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Condition::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown condition `{s}`"))
    }
}

fn one() -> usize {
    1
}

/// Body of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub condition: Condition,
    /// Explicit example ids. When empty the slice is taken from corpus
    /// order with `dataset`, `offset` and `limit`.
    #[serde(default)]
    pub examples: Vec<String>,
    /// Source-tag prefix such as `race` or `dream`.
    #[serde(default)]
    pub dataset: Option<String>,
    #[serde(default)]
    pub offset: usize,
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub agent: Option<String>,
    /// Judge scoring the pooled evidence; defaults to the agent's own
    /// catalog judge.
    #[serde(default)]
    pub judge: Option<String>,
    #[serde(default = "one")]
    pub turns: usize,
    /// Target number of responses per item across the pool.
    #[serde(default = "one")]
    pub replication: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sessions naming the same pool share items and replication counts.
    #[serde(default)]
    pub pool: Option<String>,
}

impl CreateSession {
    pub fn new(condition: Condition) -> Self {
        Self {
            condition,
            examples: Vec::new(),
            dataset: None,
            offset: 0,
            limit: None,
            agent: None,
            judge: None,
            turns: 1,
            replication: 1,
            seed: 0,
            pool: None,
        }
    }

    pub fn agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }

    pub fn pool(mut self, pool: impl Into<String>) -> Self {
        self.pool = Some(pool.into());
        self
    }

    pub fn replication(mut self, replication: usize) -> Self {
        self.replication = replication;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn limit(mut self, limit: usize) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn dataset(mut self, dataset: impl Into<String>) -> Self {
        self.dataset = Some(dataset.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
    pub items: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiceKind {
    /// Answer with an option index.
    Option,
    /// Answer with a sentence index.
    Sentence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptionView {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub answered: usize,
    pub remaining: usize,
}

/// What a participant sees for one item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemView {
    pub item_id: String,
    pub question: String,
    pub options: Vec<OptionView>,
    /// Evidence sentences in passage order.
    pub sentences: Vec<String>,
    pub choose: ChoiceKind,
    /// Annotation only: the option the chosen sentence should support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supported_option: Option<OptionView>,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum NextItem {
    Item(ItemView),
    Done,
}

/// Body of `POST /sessions/{id}/answers`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitAnswer {
    pub item_id: String,
    pub choice: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerAck {
    pub accepted: bool,
    pub progress: Progress,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub hits: usize,
    pub count: usize,
    pub rate: Option<f64>,
}

impl Rate {
    pub fn new(hits: usize, count: usize) -> Self {
        let rate = (count > 0).then(|| hits as f64 / count as f64);
        Self { hits, count, rate }
    }

    pub fn merge(self, other: Rate) -> Rate {
        Rate::new(self.hits + other.hits, self.count + other.count)
    }
}

/// Metrics over one session's (or one pool's) responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scope: String,
    pub condition: Condition,
    pub responses: usize,
    /// How often the human chose the agent's answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick_rate: Option<Rate>,
    /// Pick rate on items whose agent argued for the gold answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick_rate_agent_right: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pick_rate_agent_wrong: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_accuracy: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_sentences_shown: Option<f64>,
    /// Annotation only; usable as recorded human selections.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selections: Vec<HumanSelection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

/// Letter label for option `i`: A, B, ...
pub fn option_label(i: usize) -> String {
    char::from_u32('A' as u32 + i as u32)
        .map(String::from)
        .unwrap_or_else(|| format!("#{}", i + 1))
}
