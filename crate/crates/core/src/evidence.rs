use std::fmt;

use serde::{Deserialize, Serialize};

/// A duplicate-free set of sentence indices, always kept in passage order.
///
/// Agents may pick sentences in any order; the judge only ever sees them
/// sorted, so the canonical form is the sorted one.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Evidence(Vec<usize>);

impl Evidence {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn single(index: usize) -> Self {
        Self(vec![index])
    }

    /// Adds a sentence. Returns `false` when it was already present (a no-op).
    pub fn insert(&mut self, index: usize) -> bool {
        match self.0.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, index);
                true
            }
        }
    }

    pub fn with(&self, index: usize) -> Self {
        let mut out = self.clone();
        out.insert(index);
        out
    }

    pub fn union(&self, other: &Evidence) -> Self {
        let mut out = self.clone();
        for &i in &other.0 {
            out.insert(i);
        }
        out
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Largest index, if any. Used for bounds checks against a passage.
    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl FromIterator<usize> for Evidence {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
