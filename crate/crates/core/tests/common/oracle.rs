//! Independent recomputations from raw token counts.

use std::collections::{HashMap, HashSet};

use evarena::corpus::{Corpus, Example, Passage};
use evarena::judges::EmbeddingTable;

pub struct OracleIdf {
    df: HashMap<String, usize>,
    n: usize,
}

impl OracleIdf {
    pub fn new(corpus: &Corpus) -> Self {
        let mut df = HashMap::new();
        for p in &corpus.passages {
            let distinct: HashSet<&str> = p
                .sentences
                .iter()
                .flat_map(|s| s.tokens.iter().map(String::as_str))
                .collect();
            for t in distinct {
                *df.entry(t.to_string()).or_insert(0) += 1;
            }
        }
        Self { df, n: corpus.passages.len() }
    }

    pub fn idf(&self, t: &str) -> f64 {
        let n = self.n as f64;
        match self.df.get(t) {
            Some(&d) => ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0,
            None => (1.0 + n).ln() + 1.0,
        }
    }

    pub fn vector(&self, tokens: &[&str]) -> HashMap<String, f64> {
        let mut counts: HashMap<String, f64> = HashMap::new();
        for t in tokens {
            *counts.entry(t.to_string()).or_insert(0.0) += 1.0;
        }
        counts.into_iter().map(|(t, c)| {
            let w = c * self.idf(&t);
            (t, w)
        }).collect()
    }
}

pub fn cosine_map(u: &HashMap<String, f64>, v: &HashMap<String, f64>) -> f64 {
    let nu: f64 = u.values().map(|x| x * x).sum::<f64>().sqrt();
    let nv: f64 = v.values().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let dot: f64 = u.iter().map(|(t, x)| x * v.get(t).copied().unwrap_or(0.0)).sum();
    dot / (nu * nv)
}

pub fn cosine_vec(u: &[f64], v: &[f64]) -> f64 {
    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv)
}

pub fn mean_vector(tokens: &[&str], table: &EmbeddingTable) -> Vec<f64> {
    let known: Vec<&[f32]> = tokens.iter().filter_map(|t| table.get(t)).collect();
    let mut out = vec![0.0; table.dim()];
    if known.is_empty() {
        return out;
    }
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = known.iter().map(|v| v[k] as f64).sum::<f64>() / known.len() as f64;
    }
    out
}

/// Evidence tokens in passage order.
pub fn evidence_words<'a>(passage: &'a Passage, evidence: &[usize]) -> Vec<&'a str> {
    let mut idx = evidence.to_vec();
    idx.sort_unstable();
    idx.dedup();
    idx.iter()
        .flat_map(|&i| passage.sentences[i].tokens.iter().map(String::as_str))
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Sqa,
    Sa,
    Emb,
}

pub struct Oracle<'a> {
    pub idf: OracleIdf,
    pub table: &'a EmbeddingTable,
}

impl Oracle<'_> {
    /// Similarity logits of every option given `evidence`.
    pub fn logits(&self, kind: Kind, ex: &Example, passage: &Passage, evidence: &[usize]) -> Vec<f64> {
        let words = evidence_words(passage, evidence);
        (0..ex.options.len())
            .map(|i| {
                let option: Vec<&str> = ex.options[i].tokens.iter().map(String::as_str).collect();
                match kind {
                    Kind::Sa => cosine_map(&self.idf.vector(&words), &self.idf.vector(&option)),
                    Kind::Sqa => {
                        let mut qa: Vec<&str> = ex.question.tokens.iter().map(String::as_str).collect();
                        qa.extend(option);
                        cosine_map(&self.idf.vector(&words), &self.idf.vector(&qa))
                    }
                    Kind::Emb => cosine_vec(&mean_vector(&words, self.table), &mean_vector(&option, self.table)),
                }
            })
            .collect()
    }
}

pub fn softmax(l: &[f64]) -> Vec<f64> {
    let m = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = l.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|x| x / z).collect()
}

/// Index of the maximum; on values within `tol` of it, the lowest index.
pub fn scan_argmax(values: &[f64], tol: f64) -> usize {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= max - tol).unwrap()
}
