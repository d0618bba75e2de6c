mod common;

use std::collections::HashMap;
use std::sync::Arc;

use evarena_service::{
    Condition, CreateSession, NextItem, Service, ServiceError, SubmitAnswer,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn next(service: &Service, id: &str) -> Option<evarena_service::ItemView> {
    match service.next_item(id).unwrap() {
        NextItem::Item(view) => Some(view),
        NextItem::Done => None,
    }
}

fn answer(service: &Service, id: &str, item_id: &str, choice: usize) -> Result<(), ServiceError> {
    service
        .submit_answer(id, &SubmitAnswer { item_id: item_id.into(), choice })
        .map(|_| ())
}

#[test]
fn single_agent_items_and_replication() {
    let service = common::service();
    let request = CreateSession::new(Condition::SingleAgentSentence)
        .agent("search:tfidf-sa")
        .dataset("race")
        .limit(10)
        .replication(5)
        .pool("study");
    let mut sessions = 0;
    let mut responses = 0;
    loop {
        let id = service.create_session(&request.clone().seed(sessions)).unwrap().session_id;
        let before = responses;
        while let Some(view) = next(&service, &id) {
            assert_eq!(view.sentences.len(), 1);
            assert_eq!(view.options.len(), 4);
            answer(&service, &id, &view.item_id, 0).unwrap();
            responses += 1;
        }
        sessions += 1;
        if responses == before {
            break;
        }
        assert!(responses - before <= 10, "a session sees each question once");
    }
    let counts = service.pool_counts("study").unwrap();
    assert_eq!(counts.len(), 10 * 4);
    assert!(counts.iter().all(|&c| c == 5), "{counts:?}");
    assert_eq!(responses, 200);
    assert_eq!(service.pool_report("study").unwrap().responses, 200);
}

#[test]
fn evidence_shown_per_condition() {
    let service = common::service();
    let corpus = common::corpus();
    for condition in Condition::ALL {
        let mut request = CreateSession::new(condition).limit(6);
        request.turns = 2;
        if condition.needs_agent() {
            request.agent = Some("search:tfidf-sqa".into());
        }
        let id = service.create_session(&request).unwrap().session_id;
        for (_, item) in service.session_items(&id).unwrap() {
            let m = corpus.passage_of(corpus.example(&item.example_id).unwrap()).len();
            let mut sorted = item.shown.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted, item.shown, "passage order, no duplicates");
            match condition {
                Condition::SingleAgentSentence => assert_eq!(item.shown.len(), 1),
                Condition::PooledEvidence => assert!((1..=8).contains(&item.shown.len())),
                Condition::FullPassage | Condition::HumanEvidenceAnnotation => {
                    assert_eq!(item.shown.len(), m)
                }
                Condition::NoPassage => assert!(item.shown.is_empty()),
            }
        }
    }
}

#[test]
fn creation_errors_and_determinism() {
    let service = common::service();
    let empty = CreateSession::new(Condition::FullPassage).dataset("nothing");
    assert_eq!(service.create_session(&empty), Err(ServiceError::EmptySlice));
    let mut unknown = CreateSession::new(Condition::FullPassage);
    unknown.examples = vec!["nope".into()];
    assert!(matches!(service.create_session(&unknown), Err(ServiceError::UnknownExample(_))));
    let no_agent = CreateSession::new(Condition::SingleAgentSentence);
    assert!(matches!(service.create_session(&no_agent), Err(ServiceError::InvalidRequest(_))));
    let bad_agent = CreateSession::new(Condition::PooledEvidence).agent("oracle");
    assert!(matches!(service.create_session(&bad_agent), Err(ServiceError::UnknownAgent(_))));
    let zero = CreateSession::new(Condition::NoPassage).replication(0);
    assert!(matches!(service.create_session(&zero), Err(ServiceError::InvalidRequest(_))));

    let request = CreateSession::new(Condition::NoPassage).seed(3);
    let queue = |r: &CreateSession| -> Vec<_> {
        let id = service.create_session(r).unwrap().session_id;
        service.session_items(&id).unwrap().into_iter().map(|(_, item)| item).collect()
    };
    assert_eq!(queue(&request), queue(&request));
    assert_ne!(queue(&request), queue(&request.clone().seed(4)));

    // a shared pool refuses a different configuration
    service.create_session(&request.clone().pool("p")).unwrap();
    let other = CreateSession::new(Condition::FullPassage).pool("p");
    assert_eq!(service.create_session(&other), Err(ServiceError::PoolConflict("p".into())));
}

#[test]
fn submission_rules() {
    let service = common::service();
    let id = service
        .create_session(&CreateSession::new(Condition::NoPassage).dataset("race-middle"))
        .unwrap()
        .session_id;
    assert!(matches!(service.next_item("missing"), Err(ServiceError::UnknownSession(_))));
    let first = next(&service, &id).unwrap();
    // served item stays in flight until answered
    assert_eq!(next(&service, &id).unwrap(), first);
    let items = service.session_items(&id).unwrap();
    let unserved = items.iter().find(|(iid, _)| *iid != first.item_id).unwrap();
    assert_eq!(answer(&service, &id, &unserved.0, 0), Err(ServiceError::NotServed));
    assert_eq!(answer(&service, &id, "zzz", 0), Err(ServiceError::UnknownItem));
    assert_eq!(
        answer(&service, &id, &first.item_id, 4),
        Err(ServiceError::ChoiceOutOfRange { choice: 4, arity: 4 })
    );
    answer(&service, &id, &first.item_id, 3).unwrap();
    assert_eq!(answer(&service, &id, &first.item_id, 2), Err(ServiceError::Duplicate));
    assert_ne!(next(&service, &id).unwrap().item_id, first.item_id);
    assert_eq!(service.session_report(&id).unwrap().responses, 1);
}

#[test]
fn annotation_choices_are_sentences() {
    let service = common::service();
    let corpus = common::corpus();
    let id = service
        .create_session(&CreateSession::new(Condition::HumanEvidenceAnnotation).dataset("dream").limit(2))
        .unwrap()
        .session_id;
    let items: HashMap<_, _> = service.session_items(&id).unwrap().into_iter().collect();
    let mut expected = Vec::new();
    while let Some(view) = next(&service, &id) {
        let item = &items[&view.item_id];
        let m = view.sentences.len();
        let supported = view.supported_option.clone().unwrap();
        let ex = corpus.example(&item.example_id).unwrap();
        assert_eq!(supported.text, ex.options[item.target.unwrap()].raw);
        assert!(matches!(
            answer(&service, &id, &view.item_id, m),
            Err(ServiceError::ChoiceOutOfRange { .. })
        ));
        answer(&service, &id, &view.item_id, m - 1).unwrap();
        expected.push((item.example_id.clone(), item.target.unwrap(), m - 1));
    }
    let report = service.session_report(&id).unwrap();
    let got: Vec<_> = report
        .selections
        .iter()
        .map(|s| (s.example_id.clone(), s.answer_index, s.sentence_index))
        .collect();
    assert_eq!(got, expected);
    assert_eq!(expected.len(), 2, "one item per question per session");
}

#[test]
fn scripted_responses_match_hand_counts() {
    let service = common::service();
    let corpus = common::corpus();
    let id = service
        .create_session(
            &CreateSession::new(Condition::SingleAgentSentence)
                .agent("search:embedding-sa")
                .dataset("race"),
        )
        .unwrap()
        .session_id;
    let items: HashMap<_, _> = service.session_items(&id).unwrap().into_iter().collect();
    let (mut picks, mut right, mut right_picks, mut correct, mut total) = (0, 0, 0, 0, 0);
    let mut k = 0;
    while let Some(view) = next(&service, &id) {
        let item = &items[&view.item_id];
        let gold = corpus.example(&item.example_id).unwrap().gold_index;
        let target = item.target.unwrap();
        // script: follow the agent every other item, otherwise choose option 1
        let choice = if k % 2 == 0 { target } else { 1 };
        k += 1;
        answer(&service, &id, &view.item_id, choice).unwrap();
        total += 1;
        picks += usize::from(choice == target);
        correct += usize::from(choice == gold);
        if target == gold {
            right += 1;
            right_picks += usize::from(choice == target);
        }
    }
    let r = service.session_report(&id).unwrap();
    assert_eq!(total, 22);
    assert_eq!((r.pick_rate.unwrap().hits, r.pick_rate.unwrap().count), (picks, total));
    let rr = r.pick_rate_agent_right.unwrap();
    assert_eq!((rr.hits, rr.count), (right_picks, right));
    let rw = r.pick_rate_agent_wrong.unwrap();
    assert_eq!((rw.hits, rw.count), (picks - right_picks, total - right));
    assert_eq!(r.human_accuracy.unwrap().hits, correct);
    assert_eq!(r.mean_sentences_shown, Some(1.0));
}

/// Uniform random responders who never see the passage pick the
/// hypothetical agent's answer one time in four.
fn simulated_no_passage_pick_rate(service: &Service, responses: usize, seed: u64) -> f64 {
    let request = CreateSession::new(Condition::NoPassage)
        .dataset("race")
        .replication(1000)
        .pool("no-passage");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut given = 0;
    let mut session = 0;
    while given < responses {
        let id = service.create_session(&request.clone().seed(session)).unwrap().session_id;
        session += 1;
        while let Some(view) = next(service, &id) {
            if given == responses {
                break;
            }
            answer(service, &id, &view.item_id, rng.gen_range(0..4)).unwrap();
            given += 1;
        }
    }
    service.pool_report("no-passage").unwrap().pick_rate.unwrap().rate.unwrap()
}

#[test]
fn random_humans_without_passage() {
    let service = common::service();
    let rate = simulated_no_passage_pick_rate(&service, 2000, 17);
    assert!((rate - 0.25).abs() <= 0.03, "pick rate {rate}");
}

#[test]
fn log_replay_restores_state() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = common::catalog();
    let (id, before, pending) = {
        let service = Service::open(catalog.clone(), dir.path()).unwrap();
        let id = service
            .create_session(&CreateSession::new(Condition::FullPassage).dataset("dream").seed(9))
            .unwrap()
            .session_id;
        for choice in [0, 2, 1, 1] {
            let view = next(&service, &id).unwrap();
            answer(&service, &id, &view.item_id, choice).unwrap();
        }
        let pending = next(&service, &id).unwrap();
        let report = service.session_report(&id).unwrap();
        (id, report, pending)
    };
    let lines = std::fs::read_to_string(dir.path().join("responses.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 1 + 5 + 4);
    let service = Service::open(catalog, dir.path()).unwrap();
    assert_eq!(service.session_report(&id).unwrap(), before);
    assert_eq!(next(&service, &id).unwrap(), pending);
    answer(&service, &id, &pending.item_id, 0).unwrap();
    assert_eq!(service.session_report(&id).unwrap().responses, 5);
}

#[test]
fn concurrent_sessions_share_a_pool() {
    let service = Arc::new(common::service());
    let request = CreateSession::new(Condition::NoPassage).replication(3).pool("shared");
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let service = service.clone();
            let request = request.clone().seed(t);
            std::thread::spawn(move || {
                let mut n = 0;
                for _ in 0..4 {
                    let id = service.create_session(&request).unwrap().session_id;
                    while let Some(view) = next(&service, &id) {
                        answer(&service, &id, &view.item_id, 0).unwrap();
                        n += 1;
                    }
                }
                n
            })
        })
        .collect();
    let answered: usize = handles.into_iter().map(|h| h.join().unwrap()).sum();
    let counts = service.pool_counts("shared").unwrap();
    assert_eq!(counts.iter().sum::<usize>(), answered);
    assert_eq!(service.pool_report("shared").unwrap().responses, answered);
}

#[derive(Debug, Clone)]
enum Op {
    Next,
    Submit { served: bool, choice: usize },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        Just(Op::Next),
        (any::<bool>(), 0usize..6).prop_map(|(served, choice)| Op::Submit { served, choice }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn responses_only_for_served_items(ops in prop::collection::vec(op(), 1..40), seed in 0u64..50) {
        let service = common::service();
        let id = service
            .create_session(&CreateSession::new(Condition::NoPassage).dataset("dream").seed(seed))
            .unwrap()
            .session_id;
        let items = service.session_items(&id).unwrap();
        let mut in_flight: Option<String> = None;
        let mut accepted: Vec<String> = Vec::new();
        for (k, op) in ops.into_iter().enumerate() {
            match op {
                Op::Next => {
                    in_flight = next(&service, &id).map(|v| v.item_id);
                }
                Op::Submit { served, choice } => {
                    let item = if served {
                        in_flight.clone().unwrap_or_else(|| items[0].0.clone())
                    } else {
                        items[k % items.len()].0.clone()
                    };
                    if answer(&service, &id, &item, choice).is_ok() {
                        prop_assert_eq!(in_flight.as_ref(), Some(&item));
                        prop_assert!(!accepted.contains(&item));
                        prop_assert!(choice < 3);
                        accepted.push(item);
                        in_flight = None;
                    }
                }
            }
        }
        prop_assert_eq!(service.session_report(&id).unwrap().responses, accepted.len());
    }
}
