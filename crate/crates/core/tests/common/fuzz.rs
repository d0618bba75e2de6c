//! Small synthetic worlds for fuzzing protocols against mock judges.

use evarena::corpus::{Example, Passage, SourceTag, Text};
use evarena::judges::MockJudge;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct World {
    pub example: Example,
    pub passage: Passage,
    pub judge: MockJudge,
    pub turns: usize,
}

pub fn world(seed: u64, options: usize) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=9);
    let text: Vec<String> = (0..m).map(|i| format!("sentence number {i} here.")).collect();
    let passage = Passage::from_text(format!("p{seed}"), text.join(" "), SourceTag::Other).unwrap();
    let example = Example {
        id: format!("fuzz-{seed}"),
        passage_id: passage.id.clone(),
        question: Text::new("what is it?"),
        options: (0..options).map(|i| Text::new(format!("option {i}"))).collect(),
        gold_index: rng.gen_range(0..options),
    };
    World {
        example,
        passage,
        judge: MockJudge::hashed(seed).direct(rng.gen_bool(0.3)),
        turns: rng.gen_range(1..=4),
    }
}
