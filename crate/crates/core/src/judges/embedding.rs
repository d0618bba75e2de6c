use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use super::{evidence_tokens, Judge, JudgeError};
use crate::corpus::{CorpusError, Example, Passage};
use crate::evidence::Evidence;

/// Word vectors loaded from the plain-text format: a `count dim` header,
/// then one `word v1 … vdim` line per word.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Keys are lowercased; the first casing of a word wins.
    pub fn insert(&mut self, word: &str, vector: Vec<f32>) -> Result<(), String> {
        if vector.len() != self.dim {
            return Err(format!(
                "vector for `{word}` has {} dims, expected {}",
                vector.len(),
                self.dim
            ));
        }
        self.vectors.entry(word.to_lowercase()).or_insert(vector);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let io_err = |source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        };
        let malformed = |line: usize, detail: String| CorpusError::Malformed {
            path: path.to_path_buf(),
            detail: format!("line {line}: {detail}"),
        };
        let file = std::fs::File::open(path).map_err(io_err)?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| malformed(1, "missing `count dim` header".into()))?
            .map_err(io_err)?;
        let dim = header
            .split_whitespace()
            .nth(1)
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| malformed(1, format!("bad header `{header}`")))?;
        let mut table = Self::new(dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(io_err)?;
            let mut parts = line.split(' ').filter(|s| !s.is_empty());
            let Some(word) = parts.next() else { continue };
            let vector: Result<Vec<f32>, _> = parts.map(str::parse::<f32>).collect();
            let vector = vector.map_err(|e| malformed(i + 2, e.to_string()))?;
            table.insert(word, vector).map_err(|e| malformed(i + 2, e))?;
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Mean of the in-vocabulary word vectors; zero vector when none are known.
pub fn avg_embedding<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Vec<f64> {
    let mut sum = vec![0.0f64; table.dim()];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t.as_ref()) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += *x as f64;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    sum
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine_dense(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

pub struct EmbeddingJudge {
    table: Arc<EmbeddingTable>,
}

impl EmbeddingJudge {
    pub fn new(table: Arc<EmbeddingTable>) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &EmbeddingTable {
        &self.table
    }
}

impl Judge for EmbeddingJudge {
    fn id(&self) -> &str {
        "embedding-sa"
    }

    fn direct_score(&self) -> bool {
        true
    }

    fn logits(
        &self,
        example: &Example,
        passage: &Passage,
        evidence: &Evidence,
    ) -> Result<Vec<f64>, JudgeError> {
        let ev = avg_embedding(&evidence_tokens(passage, evidence), &self.table);
        Ok(example
            .options
            .iter()
            .map(|o| cosine_dense(&ev, &avg_embedding(&o.tokens, &self.table)))
            .collect())
    }
}
