//! RACE: one JSON document per file under `middle/` and `high/`
//! directories, each with an `article`, parallel `questions` / `options` /
//! `answers` lists, and letter answers.

use std::path::{Component, Path};

use serde::Deserialize;
use walkdir::WalkDir;

use super::{CorpusError, Example, ImportDiagnostic, ImportOutcome, Passage, SourceTag, Text};

const RACE_OPTIONS: usize = 4;

#[derive(Debug, Deserialize)]
struct RaceRecord {
    article: String,
    questions: Vec<String>,
    options: Vec<Vec<String>>,
    answers: Vec<String>,
}

fn level_of(rel: &Path) -> SourceTag {
    rel.components()
        .rev()
        .find_map(|c| match c {
            Component::Normal(s) if s == "middle" => Some(SourceTag::RaceMiddle),
            Component::Normal(s) if s == "high" => Some(SourceTag::RaceHigh),
            _ => None,
        })
        .unwrap_or(SourceTag::Other)
}

fn letter_index(answer: &str) -> Option<usize> {
    let mut chars = answer.trim().chars();
    let c = chars.next()?;
    if chars.next().is_some() || !c.is_ascii_uppercase() {
        return None;
    }
    Some((c as u8 - b'A') as usize)
}

/// Import every record file below `root`. Files are visited in sorted
/// order so ids and ordering are reproducible.
pub fn import_race(root: &Path) -> Result<ImportOutcome, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::Malformed {
            path: root.to_path_buf(),
            detail: "RACE root is not a directory".into(),
        });
    }
    let mut out = ImportOutcome::default();
    let walker = WalkDir::new(root).sort_by_file_name();
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                out.diagnostics.push(ImportDiagnostic {
                    path: err.path().unwrap_or(root).to_path_buf(),
                    message: err.to_string(),
                });
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        let rel = path.strip_prefix(root).unwrap_or(path);
        if rel
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'))
        {
            continue;
        }
        if let Err(message) = import_file(path, rel, &mut out) {
            out.diagnostics.push(ImportDiagnostic {
                path: path.to_path_buf(),
                message,
            });
        }
    }
    Ok(out)
}

fn import_file(path: &Path, rel: &Path, out: &mut ImportOutcome) -> Result<(), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let record: RaceRecord =
        serde_json::from_str(&text).map_err(|e| format!("malformed record: {e}"))?;
    if record.questions.len() != record.options.len()
        || record.questions.len() != record.answers.len()
    {
        return Err(format!(
            "malformed record: {} questions, {} option lists, {} answers",
            record.questions.len(),
            record.options.len(),
            record.answers.len()
        ));
    }

    let passage_id = rel
        .with_extension("")
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/");
    let passage = Passage::from_text(passage_id.clone(), record.article, level_of(rel))
        .map_err(|e| e.to_string())?;

    for (q, ((question, options), answer)) in record
        .questions
        .into_iter()
        .zip(record.options)
        .zip(record.answers)
        .enumerate()
    {
        if options.len() != RACE_OPTIONS {
            out.diagnostics.push(ImportDiagnostic {
                path: path.to_path_buf(),
                message: format!(
                    "question {q}: expected {RACE_OPTIONS} options, found {}",
                    options.len()
                ),
            });
            continue;
        }
        let gold_index = match letter_index(&answer) {
            Some(i) if i < options.len() => i,
            _ => {
                out.diagnostics.push(ImportDiagnostic {
                    path: path.to_path_buf(),
                    message: format!("question {q}: invalid answer letter `{answer}`"),
                });
                continue;
            }
        };
        out.examples.push(Example {
            id: format!("{passage_id}#{q}"),
            passage_id: passage_id.clone(),
            question: Text::new(question),
            options: options.into_iter().map(Text::new).collect(),
            gold_index,
        });
    }
    out.passages.push(passage);
    Ok(())
}
