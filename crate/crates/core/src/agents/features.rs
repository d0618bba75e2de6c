use std::collections::HashSet;
use std::sync::Arc;

use crate::corpus::{Example, IdfTable, Passage, Vocabulary};
use crate::judges::{
    avg_embedding, cosine_dense, cosine_sparse, EmbeddingTable, SparseVector, TfidfJudge,
    TfidfTarget,
};

/// Order of the values returned by [`FeatureExtractor::featurize`].
pub const FEATURE_NAMES: [&str; 13] = [
    "bias",
    "tfidf_option",
    "tfidf_question",
    "tfidf_question_option",
    "tfidf_max_other_option",
    "emb_option",
    "emb_question",
    "emb_question_option",
    "emb_max_other_option",
    "overlap_question",
    "overlap_option",
    "position",
    "length",
];

/// Hand-built per-sentence features conditioned on the supported answer.
/// Embedding features are zero when no word vectors are loaded.
#[derive(Clone)]
pub struct FeatureExtractor {
    tfidf: Arc<TfidfJudge>,
    embeddings: Option<Arc<EmbeddingTable>>,
}

struct Targets<T> {
    option: Vec<T>,
    question: T,
    question_option: Vec<T>,
}

impl FeatureExtractor {
    pub fn new(
        idf: Arc<IdfTable>,
        vocab: Option<Arc<Vocabulary>>,
        embeddings: Option<Arc<EmbeddingTable>>,
    ) -> Self {
        Self {
            tfidf: Arc::new(TfidfJudge::new(TfidfTarget::Option, idf, vocab)),
            embeddings,
        }
    }

    pub fn dim(&self) -> usize {
        FEATURE_NAMES.len()
    }

    fn qa_words(example: &Example, option: usize) -> Vec<String> {
        let mut w = example.question.tokens.clone();
        w.extend(example.options[option].tokens.iter().cloned());
        w
    }

    fn tfidf_targets(&self, example: &Example) -> Targets<SparseVector> {
        let n = example.num_options();
        Targets {
            option: example.options.iter().map(|o| self.tfidf.vector(&o.tokens)).collect(),
            question: self.tfidf.vector(&example.question.tokens),
            question_option: (0..n).map(|i| self.tfidf.vector(&Self::qa_words(example, i))).collect(),
        }
    }

    fn emb_targets(&self, table: &EmbeddingTable, example: &Example) -> Targets<Vec<f64>> {
        let n = example.num_options();
        Targets {
            option: example.options.iter().map(|o| avg_embedding(&o.tokens, table)).collect(),
            question: avg_embedding(&example.question.tokens, table),
            question_option: (0..n)
                .map(|i| avg_embedding(&Self::qa_words(example, i), table))
                .collect(),
        }
    }

    /// Features of every sentence of `passage` for supporting `answer`.
    pub fn featurize_passage(&self, example: &Example, passage: &Passage, answer: usize) -> Vec<Vec<f64>> {
        let tf = self.tfidf_targets(example);
        let emb = self
            .embeddings
            .as_ref()
            .map(|t| (t.as_ref(), self.emb_targets(t, example)));
        let question_words = content_set(&example.question.tokens);
        let option_words = content_set(&example.options[answer].tokens);
        let m = passage.len();

        passage
            .sentences
            .iter()
            .map(|sentence| {
                let sv = self.tfidf.vector(&sentence.tokens);
                let tfidf = four_cosines(&tf, answer, |t| cosine_sparse(&sv, t));
                let embs = match &emb {
                    Some((table, targets)) => {
                        let ev = avg_embedding(&sentence.tokens, table);
                        four_cosines(targets, answer, |t| cosine_dense(&ev, t))
                    }
                    None => [0.0; 4],
                };
                let words = content_set(&sentence.tokens);
                let position = if m > 1 {
                    sentence.index as f64 / (m - 1) as f64
                } else {
                    0.0
                };
                let mut f = Vec::with_capacity(FEATURE_NAMES.len());
                f.push(1.0);
                f.extend(tfidf);
                f.extend(embs);
                f.push(words.intersection(&question_words).count() as f64);
                f.push(words.intersection(&option_words).count() as f64);
                f.push(position);
                f.push(sentence.tokens.len() as f64);
                f
            })
            .collect()
    }

    pub fn featurize(&self, example: &Example, passage: &Passage, sentence: usize, answer: usize) -> Vec<f64> {
        self.featurize_passage(example, passage, answer)
            .swap_remove(sentence)
    }
}

fn four_cosines<T>(t: &Targets<T>, answer: usize, cos: impl Fn(&T) -> f64) -> [f64; 4] {
    let max_other = t
        .option
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != answer)
        .map(|(_, v)| cos(v))
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.max(c))))
        .unwrap_or(0.0);
    [
        cos(&t.option[answer]),
        cos(&t.question),
        cos(&t.question_option[answer]),
        max_other,
    ]
}

/// Distinct tokens that are not pure punctuation.
fn content_set(tokens: &[String]) -> HashSet<&str> {
    tokens
        .iter()
        .map(String::as_str)
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .collect()
}
