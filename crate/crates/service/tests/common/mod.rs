#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use evarena::corpus::{import_dream, import_race, Corpus};
use evarena::judges::EmbeddingTable;
use evarena_service::{Catalog, Service};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

pub fn corpus() -> Corpus {
    let race = import_race(&fixture("race")).unwrap().into_corpus().unwrap();
    let dream = import_dream(&fixture("dream/test.json")).unwrap().into_corpus().unwrap();
    race.merge(dream).unwrap()
}

pub fn catalog() -> Arc<Catalog> {
    let emb = Arc::new(EmbeddingTable::load(&fixture("embeddings.txt")).unwrap());
    Arc::new(Catalog::standard(corpus(), Some(emb), 0).unwrap())
}

pub fn service() -> Service {
    Service::in_memory(catalog())
}
