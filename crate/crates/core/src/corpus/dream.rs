//! DREAM: a JSON array of `[turns, questions, id]` triples. Turns keep
//! their speaker labels (`M:`, `W:`) and are joined one per line.

use std::path::Path;

use serde::Deserialize;

use super::{CorpusError, Example, ImportDiagnostic, ImportOutcome, Passage, SourceTag, Text};

const DREAM_OPTIONS: usize = 3;

#[derive(Debug, Deserialize)]
struct DreamQuestion {
    question: String,
    choice: Vec<String>,
    answer: String,
}

type DreamRecord = (Vec<String>, Vec<DreamQuestion>, String);

/// Import a DREAM split file, or every `*.json` file in a directory.
pub fn import_dream(path: &Path) -> Result<ImportOutcome, CorpusError> {
    let mut files = Vec::new();
    if path.is_dir() {
        let rd = std::fs::read_dir(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for entry in rd.flatten() {
            let p = entry.path();
            if p.extension().is_some_and(|e| e == "json") {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_path_buf());
    }

    let mut out = ImportOutcome::default();
    for file in files {
        let text = std::fs::read_to_string(&file).map_err(|source| CorpusError::Io {
            path: file.clone(),
            source,
        })?;
        let records: Vec<serde_json::Value> = match serde_json::from_str(&text) {
            Ok(r) => r,
            Err(e) => {
                out.diagnostics.push(ImportDiagnostic {
                    path: file.clone(),
                    message: format!("malformed file: {e}"),
                });
                continue;
            }
        };
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for (r, value) in records.into_iter().enumerate() {
            let record: DreamRecord = match serde_json::from_value(value) {
                Ok(rec) => rec,
                Err(e) => {
                    out.diagnostics.push(ImportDiagnostic {
                        path: file.clone(),
                        message: format!("record {r}: malformed: {e}"),
                    });
                    continue;
                }
            };
            import_record(&file, &stem, record, &mut out);
        }
    }
    Ok(out)
}

fn import_record(file: &Path, stem: &str, record: DreamRecord, out: &mut ImportOutcome) {
    let (turns, questions, id) = record;
    let passage_id = format!("{stem}/{id}");
    let passage = match Passage::from_text(passage_id.clone(), turns.join("\n"), SourceTag::Dream) {
        Ok(p) => p,
        Err(e) => {
            out.diagnostics.push(ImportDiagnostic {
                path: file.to_path_buf(),
                message: format!("dialogue {id}: {e}"),
            });
            return;
        }
    };
    for (q, dq) in questions.into_iter().enumerate() {
        if dq.choice.len() != DREAM_OPTIONS {
            out.diagnostics.push(ImportDiagnostic {
                path: file.to_path_buf(),
                message: format!(
                    "dialogue {id} question {q}: expected {DREAM_OPTIONS} choices, found {}",
                    dq.choice.len()
                ),
            });
            continue;
        }
        let gold = dq
            .choice
            .iter()
            .position(|c| c == &dq.answer)
            .or_else(|| dq.choice.iter().position(|c| c.trim() == dq.answer.trim()));
        let Some(gold_index) = gold else {
            out.diagnostics.push(ImportDiagnostic {
                path: file.to_path_buf(),
                message: format!(
                    "dialogue {id} question {q}: answer `{}` is not among the choices",
                    dq.answer
                ),
            });
            continue;
        };
        out.examples.push(Example {
            id: format!("{passage_id}#{q}"),
            passage_id: passage_id.clone(),
            question: Text::new(dq.question),
            options: dq.choice.into_iter().map(Text::new).collect(),
            gold_index,
        });
    }
    out.passages.push(passage);
}
