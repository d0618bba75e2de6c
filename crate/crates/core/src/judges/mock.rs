use std::collections::HashMap;

use super::{Judge, JudgeError};
use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;
use crate::seed::stable_hash;

/// What a [`MockJudge`] answers for evidence it has no entry for.
#[derive(Debug, Clone, PartialEq)]
pub enum MockDefault {
    /// All-zero logits (a uniform verdict) of the example's arity.
    Zeros,
    Fixed(Vec<f64>),
    /// Pseudo-random logits in `[-3, 3)`, a pure function of
    /// `(seed, example id, evidence, option)`. Used for fuzzing.
    Hashed { seed: u64 },
}

/// Table-driven test judge keyed by `(evidence, example id)`.
#[derive(Debug, Clone)]
pub struct MockJudge {
    id: String,
    table: HashMap<(Evidence, String), Vec<f64>>,
    default: MockDefault,
    direct: bool,
}

impl MockJudge {
    pub fn new(id: impl Into<String>, default: MockDefault) -> Self {
        Self {
            id: id.into(),
            table: HashMap::new(),
            default,
            direct: false,
        }
    }

    pub fn hashed(seed: u64) -> Self {
        Self::new(format!("mock-{seed}"), MockDefault::Hashed { seed })
    }

    /// Search this mock on raw logits instead of probabilities.
    pub fn direct(mut self, direct: bool) -> Self {
        self.direct = direct;
        self
    }

    pub fn set(&mut self, example_id: &str, evidence: Evidence, logits: Vec<f64>) {
        self.table.insert((evidence, example_id.to_string()), logits);
    }

    pub fn with(mut self, example_id: &str, evidence: &[usize], logits: Vec<f64>) -> Self {
        self.set(example_id, evidence.iter().copied().collect(), logits);
        self
    }

    fn default_logits(&self, example: &Example, evidence: &Evidence) -> Vec<f64> {
        match &self.default {
            MockDefault::Zeros => vec![0.0; example.num_options()],
            MockDefault::Fixed(l) => l.clone(),
            MockDefault::Hashed { seed } => {
                let seed = seed.to_string();
                let ev = evidence.to_string();
                (0..example.num_options())
                    .map(|j| {
                        let h = stable_hash(&[&seed, &example.id, &ev, &j.to_string()]);
                        // 53 high bits → [0, 1)
                        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
                        6.0 * u - 3.0
                    })
                    .collect()
            }
        }
    }
}

impl Judge for MockJudge {
    fn id(&self) -> &str {
        &self.id
    }

    fn direct_score(&self) -> bool {
        self.direct
    }

    fn logits(
        &self,
        example: &Example,
        _passage: &Passage,
        evidence: &Evidence,
    ) -> Result<Vec<f64>, JudgeError> {
        Ok(self
            .table
            .get(&(evidence.clone(), example.id.clone()))
            .cloned()
            .unwrap_or_else(|| self.default_logits(example, evidence)))
    }
}
