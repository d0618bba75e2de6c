//! Normalized corpus files: one JSON record per line, passages first.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError, Example, Passage};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Passage(Passage),
    Example(Example),
}

pub fn write_corpus<W: Write>(writer: W, corpus: &Corpus) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    for p in &corpus.passages {
        serde_json::to_writer(&mut w, &Record::Passage(p.clone()))?;
        w.write_all(b"\n")?;
    }
    for e in &corpus.examples {
        serde_json::to_writer(&mut w, &Record::Example(e.clone()))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut passages = Vec::new();
    let mut examples = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            path: path.to_path_buf(),
            detail: format!("line {}: {e}", lineno + 1),
        })?;
        match record {
            Record::Passage(p) => passages.push(p),
            Record::Example(e) => examples.push(e),
        }
    }
    Corpus::new(passages, examples)
}
