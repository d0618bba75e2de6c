//! Dataset ingestion and text preprocessing.
//!
//! Passages are tokenized at the word level (lowercase, punctuation split
//! off) and segmented at `.`, `?`, `!` and the final token. Subword units
//! are applied later, by whatever consumes the tokens (IDF tables and the
//! TF-IDF judge), so that word-level consumers such as the word-vector
//! judge see whole words.

mod dream;
mod idf;
mod race;
mod segment;
mod store;
mod tokenize;
mod vocab;

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dream::import_dream;
pub use idf::{build_idf, IdfTable};
pub use race::import_race;
pub use segment::{segment_sentences, sentence_bounds, SENTENCE_MARKERS};
pub use store::{read_corpus, write_corpus, Record};
pub use tokenize::{basic_tokens, subword_tokens, tokenize, tokenize_spans, wordpiece, Token};
pub use vocab::{Vocabulary, CONTINUATION_PREFIX, UNK_UNIT};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("degenerate passage: no tokens to segment")]
    DegeneratePassage,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {detail}")]
    Malformed { path: PathBuf, detail: String },
    #[error("cannot build IDF from an empty corpus")]
    EmptyCorpus,
    #[error("example {example} references unknown passage {passage}")]
    UnknownPassage { example: String, passage: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    RaceMiddle,
    RaceHigh,
    Dream,
    Other,
}

impl SourceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::RaceMiddle => "race-middle",
            SourceTag::RaceHigh => "race-high",
            SourceTag::Dream => "dream",
            SourceTag::Other => "other",
        }
    }

    /// Number of answer options every question of this source carries.
    pub fn option_count(&self) -> Option<usize> {
        match self {
            SourceTag::RaceMiddle | SourceTag::RaceHigh => Some(4),
            SourceTag::Dream => Some(3),
            SourceTag::Other => None,
        }
    }
}

impl std::str::FromStr for SourceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "race-middle" => Ok(SourceTag::RaceMiddle),
            "race-high" => Ok(SourceTag::RaceHigh),
            "dream" => Ok(SourceTag::Dream),
            "other" => Ok(SourceTag::Other),
            _ => Err(format!("unknown source tag `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub tokens: Vec<String>,
    /// Byte offsets `[start, end)` into the passage raw text.
    pub char_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub id: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
    pub source_tag: SourceTag,
}

impl Passage {
    pub fn from_text(
        id: impl Into<String>,
        raw_text: impl Into<String>,
        source_tag: SourceTag,
    ) -> Result<Self, CorpusError> {
        let raw_text = raw_text.into();
        let tokens = tokenize_spans(&raw_text, None);
        let sentences = segment_sentences(&tokens)?;
        Ok(Self {
            id: id.into(),
            raw_text,
            sentences,
            source_tag,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Original text of one sentence.
    pub fn sentence_text(&self, index: usize) -> &str {
        let (s, e) = self.sentences[index].char_span;
        &self.raw_text[s..e]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.sentences
            .iter()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
    }
}

/// Raw text plus its word tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Text {
    pub raw: String,
    pub tokens: Vec<String>,
}

impl Text {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw, None);
        Self { raw, tokens }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub passage_id: String,
    pub question: Text,
    pub options: Vec<Text>,
    pub gold_index: usize,
}

impl Example {
    pub fn num_options(&self) -> usize {
        self.options.len()
    }
}

/// Passages and the examples that refer to them.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub passages: Vec<Passage>,
    pub examples: Vec<Example>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(passages: Vec<Passage>, examples: Vec<Example>) -> Result<Self, CorpusError> {
        let by_id = passages
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect::<HashMap<_, _>>();
        for ex in &examples {
            if !by_id.contains_key(&ex.passage_id) {
                return Err(CorpusError::UnknownPassage {
                    example: ex.id.clone(),
                    passage: ex.passage_id.clone(),
                });
            }
        }
        Ok(Self {
            passages,
            examples,
            by_id,
        })
    }

    pub fn passage(&self, id: &str) -> Option<&Passage> {
        self.by_id.get(id).map(|&i| &self.passages[i])
    }

    /// The passage of an example. Panics only if the corpus invariant
    /// (every example references a stored passage) was broken.
    pub fn passage_of(&self, example: &Example) -> &Passage {
        self.passage(&example.passage_id)
            .expect("corpus invariant: example passage present")
    }

    pub fn example(&self, id: &str) -> Option<&Example> {
        self.examples.iter().find(|e| e.id == id)
    }

    pub fn merge(mut self, other: Corpus) -> Result<Self, CorpusError> {
        self.passages.extend(other.passages);
        self.examples.extend(other.examples);
        Corpus::new(self.passages, self.examples)
    }

    /// Keep only examples accepted by `keep`, and the passages they use.
    pub fn filter(&self, mut keep: impl FnMut(&Example, &Passage) -> bool) -> Corpus {
        let examples: Vec<Example> = self
            .examples
            .iter()
            .filter(|e| keep(e, self.passage_of(e)))
            .cloned()
            .collect();
        let mut used: Vec<&str> = examples.iter().map(|e| e.passage_id.as_str()).collect();
        used.sort_unstable();
        used.dedup();
        let passages = self
            .passages
            .iter()
            .filter(|p| used.binary_search(&p.id.as_str()).is_ok())
            .cloned()
            .collect();
        Corpus::new(passages, examples).expect("filtered corpus keeps referenced passages")
    }
}

/// Outcome of a dataset import: the records that parsed, and one
/// diagnostic per rejected file or question.
#[derive(Debug, Default)]
pub struct ImportOutcome {
    pub passages: Vec<Passage>,
    pub examples: Vec<Example>,
    pub diagnostics: Vec<ImportDiagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportDiagnostic {
    pub path: PathBuf,
    pub message: String,
}

impl std::fmt::Display for ImportDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl ImportOutcome {
    pub fn into_corpus(self) -> Result<Corpus, CorpusError> {
        Corpus::new(self.passages, self.examples)
    }
}
