#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use evarena::corpus::{build_idf, import_dream, import_race, Corpus, IdfTable, Vocabulary};
use evarena::judges::{EmbeddingTable, Judge, JudgeConfig, JudgeKind};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn race() -> Corpus {
    let out = import_race(&fixture("race")).unwrap();
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    out.into_corpus().unwrap()
}

pub fn dream() -> Corpus {
    let out = import_dream(&fixture("dream/test.json")).unwrap();
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    out.into_corpus().unwrap()
}

pub fn corpus() -> Corpus {
    race().merge(dream()).unwrap()
}

pub fn idf(corpus: &Corpus) -> Arc<IdfTable> {
    Arc::new(build_idf(&corpus.passages, None, "fixture").unwrap())
}

pub fn embeddings() -> Arc<EmbeddingTable> {
    Arc::new(EmbeddingTable::load(&fixture("embeddings.txt")).unwrap())
}

pub fn vocab() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::load(&fixture("vocab.txt")).unwrap())
}

/// The three similarity judges over the fixture.
pub fn similarity_judges(corpus: &Corpus) -> Vec<Arc<dyn Judge>> {
    let idf = idf(corpus);
    let emb = embeddings();
    [JudgeKind::TfidfSqa, JudgeKind::TfidfSa, JudgeKind::EmbeddingSa]
        .into_iter()
        .map(|k| {
            JudgeConfig::new(k)
                .with_idf(idf.clone())
                .with_embeddings(emb.clone())
                .build()
                .unwrap()
        })
        .collect()
}
pub mod oracle;
pub mod fuzz;
