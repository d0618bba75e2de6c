mod common;

use std::sync::Arc;

use common::fuzz::world;
use common::oracle::{self, OracleIdf};
use evarena::agents::{EvidenceAgent, SearchAgent};
use evarena::arena::{
    aggregate_rounds, play_pool, read_arena_log, run_arena, run_free_for_all, run_round_robin,
    write_arena_log, AnswerFreeAgent, AnswerFreeMethod, AnswerFreeSelector, ArenaConfig,
    ArenaOutcome, Protocol, Seat,
};
use evarena::judges::{Judge, TfidfJudge, TfidfTarget};
use proptest::prelude::*;

#[test]
fn two_answer_round_robin_is_one_free_for_all() {
    for seed in 0..1000 {
        let w = world(seed, 2);
        let judge: Arc<dyn Judge> = Arc::new(w.judge);
        let agent = SearchAgent::new(judge.clone());
        let agents: [&dyn EvidenceAgent; 2] = [&agent, &agent];
        let rr = run_round_robin(&agents, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
        let ffa = run_free_for_all(&agents, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
        assert_eq!(rr.pairwise.len(), 1);
        assert_eq!(rr.pairwise[0].pool, ffa, "seed {seed}");
        assert_eq!(rr.aggregated, ffa.final_verdict.probs, "seed {seed}");
        assert_eq!(rr.predicted_index, ffa.final_verdict.argmax());
    }
}

#[test]
fn four_answers_play_six_rounds() {
    let w = world(3, 4);
    let judge: Arc<dyn Judge> = Arc::new(w.judge);
    let agent = SearchAgent::new(judge.clone());
    let rr = run_round_robin(&[&agent as &dyn EvidenceAgent; 4], judge.as_ref(), &w.example, &w.passage, 2).unwrap();
    assert_eq!(rr.pairwise.len(), 6);
    for i in 0..4 {
        let rounds = rr.pairwise.iter().filter(|r| r.answers.0 == i || r.answers.1 == i).count();
        assert_eq!(rounds, 3);
    }
    assert!(rr.aggregated.iter().all(|p| (0.0..=1.0).contains(p)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pool_ignores_agent_order(seed in 0u64..10_000, n in 2usize..5, rot in 0usize..4) {
        let w = world(seed, n);
        let judge: Arc<dyn Judge> = Arc::new(w.judge);
        let agent = SearchAgent::new(judge.clone());
        let seats: Vec<Seat> = (0..n).map(|answer| Seat { answer, agent: &agent }).collect();
        let mut rotated = seats.clone();
        rotated.rotate_left(rot % n);
        let a = play_pool(&seats, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
        let b = play_pool(&rotated, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
        prop_assert_eq!(&a.pooled_indices, &b.pooled_indices);
        prop_assert_eq!(&a.final_verdict, &b.final_verdict);
        for sel in &a.per_agent {
            let other = b.per_agent.iter().find(|s| s.answer_index == sel.answer_index).unwrap();
            prop_assert_eq!(sel, other);
        }
    }

    #[test]
    fn aggregation_ignores_round_order(seed in 0u64..10_000, n in 2usize..5, shuffle_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let w = world(seed, n);
        let judge: Arc<dyn Judge> = Arc::new(w.judge);
        let agent = SearchAgent::new(judge.clone());
        let agents = vec![&agent as &dyn EvidenceAgent; n];
        let rr = run_round_robin(&agents, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
        let mut rounds = rr.pairwise.clone();
        rounds.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle_seed));
        prop_assert_eq!(aggregate_rounds(n, &rounds), rr.aggregated);
    }

    #[test]
    fn emitted_indices_are_valid_subsequences(seed in 0u64..10_000, n in 2usize..5) {
        let w = world(seed, n);
        let m = w.passage.len();
        let judge: Arc<dyn Judge> = Arc::new(w.judge);
        let search = SearchAgent::new(judge.clone());
        let random = AnswerFreeAgent::new(AnswerFreeSelector::new(AnswerFreeMethod::RandomK, seed));
        for agent in [&search as &dyn EvidenceAgent, &random] {
            let agents = vec![agent; n];
            let ffa = run_free_for_all(&agents, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
            let rr = run_round_robin(&agents, judge.as_ref(), &w.example, &w.passage, w.turns).unwrap();
            let mut sets = vec![ffa.pooled_indices.clone()];
            sets.extend(ffa.per_agent.iter().map(|s| s.sentence_indices.clone()));
            sets.extend(rr.pairwise.iter().map(|r| r.pool.pooled_indices.clone()));
            for s in sets {
                let idx = s.indices();
                prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(idx.iter().all(|&i| i < m));
                prop_assert!(idx.len() <= n * w.turns);
            }
            // the pool is exactly the union of the agents' picks
            let union = ffa.per_agent.iter().fold(evarena::Evidence::new(), |acc, s| acc.union(&s.sentence_indices));
            prop_assert_eq!(union, ffa.pooled_indices);
        }
    }
}

#[test]
fn answer_free_methods() {
    let c = common::corpus();
    let idf = common::idf(&c);
    let ex = c.examples.iter().find(|e| c.passage_of(e).len() >= 10).unwrap();
    let p = c.passage_of(ex);
    let first = AnswerFreeSelector::new(AnswerFreeMethod::FirstN, 0);
    assert_eq!(first.select(ex, p, 3).unwrap().indices(), &[0, 1, 2]);
    assert_eq!(first.select(ex, p, 500).unwrap().len(), p.len());

    let r1 = AnswerFreeSelector::new(AnswerFreeMethod::RandomK, 42).select(ex, p, 5).unwrap();
    let r2 = AnswerFreeSelector::new(AnswerFreeMethod::RandomK, 42).select(ex, p, 5).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(r1.len(), 5);
    let other: Vec<_> = (0..20)
        .map(|s| AnswerFreeSelector::new(AnswerFreeMethod::RandomK, s).select(ex, p, 5).unwrap())
        .collect();
    assert!(other.iter().any(|o| *o != r1));

    let oracle = OracleIdf::new(&c);
    let tfidf = Arc::new(TfidfJudge::new(TfidfTarget::Option, idf, None));
    let sel = AnswerFreeSelector::new(AnswerFreeMethod::TfidfQuestion, 0).with_tfidf(tfidf);
    for ex in &c.examples {
        let p = c.passage_of(ex);
        let q: Vec<&str> = ex.question.tokens.iter().map(String::as_str).collect();
        let scores: Vec<f64> = p
            .sentences
            .iter()
            .map(|s| {
                let words: Vec<&str> = s.tokens.iter().map(String::as_str).collect();
                oracle::cosine_map(&oracle.vector(&words), &oracle.vector(&q))
            })
            .collect();
        assert_eq!(sel.select(ex, p, 1).unwrap().indices(), &[oracle::scan_argmax(&scores, 1e-12)], "{}", ex.id);
    }

    let emb = AnswerFreeSelector::new(AnswerFreeMethod::EmbeddingQuestion, 0);
    assert!(emb.select(ex, p, 2).is_err());
    let emb = emb.with_embeddings(common::embeddings());
    let picked = emb.select(ex, p, 2).unwrap();
    assert_eq!(picked.len(), 2);
}

#[test]
fn arena_log_round_trip() {
    let c = common::corpus();
    let judges = common::similarity_judges(&c);
    let agent = SearchAgent::new(judges[1].clone());
    for protocol in [Protocol::Individual, Protocol::FreeForAll, Protocol::RoundRobin] {
        let config = ArenaConfig {
            protocol,
            turns_per_agent: 2,
            agent: "search".into(),
            judge: judges[1].id().into(),
            seed: 0,
        };
        let (records, failures) = run_arena(&config, &agent, judges[1].as_ref(), &c, 3);
        assert!(failures.is_empty());
        assert_eq!(records.len(), c.examples.len());
        let again = run_arena(&config, &agent, judges[1].as_ref(), &c, 1).0;
        assert_eq!(records, again);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("arena.jsonl");
        write_arena_log(std::fs::File::create(&path).unwrap(), &records).unwrap();
        let back = read_arena_log(&path).unwrap();
        assert_eq!(back, records);
        for r in &records {
            match (&r.outcome, protocol) {
                (ArenaOutcome::Individual { selections, .. }, Protocol::Individual) => {
                    assert!(selections.iter().all(|s| s.sentence_indices.len() <= 2))
                }
                (ArenaOutcome::FreeForAll(p), Protocol::FreeForAll) => {
                    assert!(p.pooled_indices.len() <= 2 * p.per_agent.len())
                }
                (ArenaOutcome::RoundRobin(rr), Protocol::RoundRobin) => assert!(!rr.pairwise.is_empty()),
                _ => panic!("protocol mismatch"),
            }
        }
    }
}
