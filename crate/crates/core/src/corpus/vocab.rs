use std::collections::HashMap;
use std::path::Path;

use super::CorpusError;

pub const UNK_UNIT: &str = "[UNK]";
pub const CONTINUATION_PREFIX: &str = "##";

/// Ordered set of WordPiece units. Units starting with `##` continue a
/// word; all others begin one.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    units: Vec<String>,
    ids: HashMap<String, usize>,
    unk: usize,
}

impl Vocabulary {
    /// Duplicates keep their first id. `[UNK]` is appended if absent.
    pub fn from_units<I: IntoIterator<Item = String>>(units: I) -> Self {
        let mut out = Self {
            units: Vec::new(),
            ids: HashMap::new(),
            unk: 0,
        };
        for u in units {
            out.push(u);
        }
        out.unk = match out.ids.get(UNK_UNIT) {
            Some(&id) => id,
            None => out.push(UNK_UNIT.to_string()),
        };
        out
    }

    fn push(&mut self, unit: String) -> usize {
        if let Some(&id) = self.ids.get(&unit) {
            return id;
        }
        let id = self.units.len();
        self.ids.insert(unit.clone(), id);
        self.units.push(unit);
        id
    }

    /// One unit per line, as in BERT `vocab.txt`. Blank lines are skipped.
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_units(
            text.lines()
                .map(|l| l.trim_end_matches('\r'))
                .filter(|l| !l.is_empty())
                .map(str::to_string),
        ))
    }

    pub fn contains(&self, unit: &str) -> bool {
        self.ids.contains_key(unit)
    }

    pub fn id(&self, unit: &str) -> usize {
        self.ids.get(unit).copied().unwrap_or(self.unk)
    }

    pub fn unit(&self, id: usize) -> Option<&str> {
        self.units.get(id).map(String::as_str)
    }

    pub fn unk(&self) -> &str {
        &self.units[self.unk]
    }

    pub fn is_continuation(unit: &str) -> bool {
        unit.starts_with(CONTINUATION_PREFIX)
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}
