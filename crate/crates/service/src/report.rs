use evarena::arena::HumanSelection;

use crate::model::{Condition, Rate, SessionReport};
use crate::plan::PlannedItem;

/// One recorded response joined with what the server knows about its item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedResponse<'a> {
    pub item: &'a PlannedItem,
    pub gold: usize,
    pub choice: usize,
}

/// Metrics as a pure function of the responses.
pub fn build_report(scope: &str, condition: Condition, responses: &[ResolvedResponse<'_>]) -> SessionReport {
    let rate = |keep: &dyn Fn(&ResolvedResponse) -> bool, hit: &dyn Fn(&ResolvedResponse) -> bool| {
        let kept: Vec<_> = responses.iter().filter(|r| keep(r)).collect();
        Rate::new(kept.iter().filter(|r| hit(r)).count(), kept.len())
    };
    let picked = |r: &ResolvedResponse| r.item.target == Some(r.choice);
    let correct = |r: &ResolvedResponse| r.choice == r.gold;
    let mean_shown = (!responses.is_empty()).then(|| {
        responses.iter().map(|r| r.item.shown.len()).sum::<usize>() as f64 / responses.len() as f64
    });

    let mut report = SessionReport {
        scope: scope.to_string(),
        condition,
        responses: responses.len(),
        pick_rate: None,
        pick_rate_agent_right: None,
        pick_rate_agent_wrong: None,
        human_accuracy: None,
        mean_sentences_shown: None,
        selections: Vec::new(),
    };
    match condition {
        Condition::SingleAgentSentence | Condition::NoPassage => {
            report.pick_rate = Some(rate(&|_| true, &picked));
            report.pick_rate_agent_right = Some(rate(&|r| r.item.target == Some(r.gold), &picked));
            report.pick_rate_agent_wrong = Some(rate(&|r| r.item.target != Some(r.gold), &picked));
            report.human_accuracy = Some(rate(&|_| true, &correct));
            report.mean_sentences_shown = mean_shown;
        }
        Condition::PooledEvidence | Condition::FullPassage => {
            report.human_accuracy = Some(rate(&|_| true, &correct));
            report.mean_sentences_shown = mean_shown;
        }
        Condition::HumanEvidenceAnnotation => {
            report.selections = responses
                .iter()
                .filter_map(|r| {
                    Some(HumanSelection {
                        example_id: r.item.example_id.clone(),
                        answer_index: r.item.target?,
                        sentence_index: r.choice,
                    })
                })
                .collect();
        }
    }
    report
}
