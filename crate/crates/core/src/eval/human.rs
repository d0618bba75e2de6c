use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SingleSentenceOutcome;

/// A human's answer to an item that argued for `answer_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanResponse {
    pub example_id: String,
    pub answer_index: usize,
    pub choice: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub example_id: String,
    pub answer_index: usize,
    /// Judge probability of the answer given the agent's sentence.
    pub judge_prob: f64,
    /// Fraction of humans who chose the answer given the same sentence.
    pub human_rate: f64,
    pub responses: usize,
}

/// Pair judge and human reactions per `(example, answer)`. Pairs without
/// any human response are left out.
pub fn human_agreement_report(
    responses: &[HumanResponse],
    outcomes: &[SingleSentenceOutcome],
) -> Vec<AgreementRow> {
    let mut tallies: BTreeMap<(&str, usize), (usize, usize)> = BTreeMap::new();
    for r in responses {
        let t = tallies.entry((r.example_id.as_str(), r.answer_index)).or_default();
        t.0 += usize::from(r.choice == r.answer_index);
        t.1 += 1;
    }
    outcomes
        .iter()
        .filter_map(|o| {
            let &(hits, total) = tallies.get(&(o.example_id.as_str(), o.answer_index))?;
            Some(AgreementRow {
                example_id: o.example_id.clone(),
                answer_index: o.answer_index,
                judge_prob: o.prob,
                human_rate: hits as f64 / total as f64,
                responses: total,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(id: &str, answer: usize, prob: f64) -> SingleSentenceOutcome {
        SingleSentenceOutcome {
            example_id: id.into(),
            answer_index: answer,
            gold_index: 0,
            sentence_index: Some(0),
            prob,
            judge_choice: answer,
        }
    }

    fn resp(id: &str, answer: usize, choice: usize) -> HumanResponse {
        HumanResponse { example_id: id.into(), answer_index: answer, choice }
    }

    #[test]
    fn empty_and_unanimous() {
        assert!(human_agreement_report(&[], &[outcome("a", 0, 0.4)]).is_empty());
        let five: Vec<_> = (0..5).map(|_| resp("a", 2, 2)).collect();
        let rows = human_agreement_report(&five, &[outcome("a", 2, 0.6)]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].human_rate, 1.0);
        assert_eq!(rows[0].responses, 5);
    }

    #[test]
    fn hand_counts() {
        let responses = [
            resp("a", 0, 0),
            resp("a", 0, 1),
            resp("a", 0, 0),
            resp("a", 1, 3),
            resp("b", 2, 2),
            resp("b", 2, 0),
        ];
        let rows = human_agreement_report(
            &responses,
            &[outcome("a", 0, 0.5), outcome("a", 1, 0.2), outcome("b", 2, 0.9), outcome("c", 0, 0.1)],
        );
        let rates: Vec<(f64, usize)> = rows.iter().map(|r| (r.human_rate, r.responses)).collect();
        assert_eq!(rates, vec![(2.0 / 3.0, 3), (0.0, 1), (0.5, 2)]);
    }
}
