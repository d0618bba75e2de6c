use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{subword_tokens, CorpusError, Passage, Vocabulary};

/// Smoothed inverse document frequencies, one passage per document:
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`. Unseen tokens get
/// `ln(1 + N) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    pub weights: BTreeMap<String, f64>,
    pub document_count: usize,
    pub built_from: String,
    /// Whether the documents were split into subword units.
    pub subword: bool,
}

impl IdfTable {
    pub fn weight(&self, token: &str) -> f64 {
        self.weights
            .get(token)
            .copied()
            .unwrap_or_else(|| self.unseen_weight())
    }

    pub fn unseen_weight(&self) -> f64 {
        (1.0 + self.document_count as f64).ln() + 1.0
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let json = serde_json::to_string(self).expect("idf table serializes");
        std::fs::write(path, json).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn build_idf<'a, I>(
    passages: I,
    vocab: Option<&Vocabulary>,
    scope: &str,
) -> Result<IdfTable, CorpusError>
where
    I: IntoIterator<Item = &'a Passage>,
{
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut n = 0usize;
    for passage in passages {
        n += 1;
        let words: Vec<&str> = passage.tokens().collect();
        let distinct: HashSet<String> = match vocab {
            Some(v) => subword_tokens(&words, v).into_iter().collect(),
            None => words.iter().map(|w| w.to_string()).collect(),
        };
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if n == 0 {
        return Err(CorpusError::EmptyCorpus);
    }
    let total = n as f64;
    let weights = df
        .into_iter()
        .map(|(t, d)| (t, ((1.0 + total) / (1.0 + d as f64)).ln() + 1.0))
        .collect();
    Ok(IdfTable {
        weights,
        document_count: n,
        built_from: scope.to_string(),
        subword: vocab.is_some(),
    })
}
