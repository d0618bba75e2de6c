//! Evidence agents for multiple-choice reading comprehension.
//!
//! For each answer option of a question, an agent picks the passage
//! sentences that most raise a judge model's belief in that option. The
//! crate is organised bottom-up:
//!
//! - [`corpus`]: RACE / DREAM ingestion, tokenization, sentence
//!   segmentation, IDF tables.
//! - [`judges`]: the judge contract plus TF-IDF, averaged word-vector,
//!   remote (HTTP) and mock judges.
//! - [`agents`]: greedy search agents, judge-target precomputation and
//!   trainable linear scorers ("learned" agents).
//! - [`arena`]: free-for-all and round-robin competitions and
//!   answer-free selection baselines.
//! - [`eval`]: convincingness matrices, accuracy, generalization sweeps,
//!   confidence buckets and human-agreement tables.

pub mod agents;
pub mod arena;
pub mod corpus;
pub mod eval;
pub mod evidence;
pub mod judges;
pub mod parallel;
pub mod seed;

pub use corpus::{Example, Passage, Sentence, SourceTag};
pub use evidence::Evidence;
pub use judges::{Judge, JudgeVerdict};
