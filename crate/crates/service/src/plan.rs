//! Materializing the items a pool serves.

use evarena::agents::run_agent;
use evarena::arena::{play_pool, Seat};
use evarena::corpus::Example;

use crate::catalog::Catalog;
use crate::model::{Condition, CreateSession};
use crate::ServiceError;

/// One servable item. `target` is the answer the item is about (agent's
/// answer, or the option to support); it never leaves the server except
/// as the annotation prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedItem {
    pub example_id: String,
    pub target: Option<usize>,
    /// Sentence indices shown, in passage order.
    pub shown: Vec<usize>,
}

/// Examples addressed by a request, in corpus order.
pub fn select_examples<'a>(
    catalog: &'a Catalog,
    request: &CreateSession,
) -> Result<Vec<&'a Example>, ServiceError> {
    let corpus = &catalog.corpus;
    let picked: Vec<&Example> = if request.examples.is_empty() {
        corpus
            .examples
            .iter()
            .filter(|ex| match &request.dataset {
                Some(d) => corpus.passage_of(ex).source_tag.as_str().starts_with(d.as_str()),
                None => true,
            })
            .skip(request.offset)
            .take(request.limit.unwrap_or(usize::MAX))
            .collect()
    } else {
        request
            .examples
            .iter()
            .map(|id| {
                corpus
                    .example(id)
                    .ok_or_else(|| ServiceError::UnknownExample(id.clone()))
            })
            .collect::<Result<_, _>>()?
    };
    if picked.is_empty() {
        return Err(ServiceError::EmptySlice);
    }
    Ok(picked)
}

pub fn validate(catalog: &Catalog, request: &CreateSession) -> Result<(), ServiceError> {
    if request.replication == 0 {
        return Err(ServiceError::InvalidRequest("replication must be at least 1".into()));
    }
    if request.turns == 0 {
        return Err(ServiceError::InvalidRequest("turns must be at least 1".into()));
    }
    if request.condition.needs_agent() {
        let agent = request.agent.as_deref().ok_or_else(|| {
            ServiceError::InvalidRequest(format!("condition {} needs an agent", request.condition))
        })?;
        catalog.agent(agent)?;
    }
    if let Some(j) = &request.judge {
        catalog.judge(j)?;
    }
    Ok(())
}

/// Items for a pool, in (example, answer) order.
pub fn plan_items(catalog: &Catalog, request: &CreateSession) -> Result<Vec<PlannedItem>, ServiceError> {
    validate(catalog, request)?;
    let examples = select_examples(catalog, request)?;
    let mut items = Vec::new();
    for ex in examples {
        let passage = catalog.corpus.passage_of(ex);
        let all: Vec<usize> = (0..passage.len()).collect();
        let item = |target, shown| PlannedItem {
            example_id: ex.id.clone(),
            target,
            shown,
        };
        match request.condition {
            Condition::SingleAgentSentence => {
                let agent = catalog.agent(request.agent.as_deref().unwrap_or_default())?;
                for answer in 0..ex.num_options() {
                    let sel = run_agent(agent.as_ref(), ex, passage, answer, 1)
                        .map_err(|e| ServiceError::Agent(e.to_string()))?;
                    items.push(item(Some(answer), sel.sentence_indices.indices().to_vec()));
                }
            }
            Condition::PooledEvidence => {
                let agent_id = request.agent.as_deref().unwrap_or_default();
                let agent = catalog.agent(agent_id)?;
                let judge = match &request.judge {
                    Some(j) => catalog.judge(j)?,
                    None => catalog.judge_for(agent_id)?,
                };
                let seats: Vec<Seat> = (0..ex.num_options())
                    .map(|answer| Seat { answer, agent: agent.as_ref() })
                    .collect();
                let pool = play_pool(&seats, judge.as_ref(), ex, passage, request.turns)
                    .map_err(|e| ServiceError::Agent(e.to_string()))?;
                items.push(item(None, pool.pooled_indices.indices().to_vec()));
            }
            Condition::FullPassage => items.push(item(None, all)),
            Condition::NoPassage => {
                for answer in 0..ex.num_options() {
                    items.push(item(Some(answer), Vec::new()));
                }
            }
            Condition::HumanEvidenceAnnotation => {
                for answer in 0..ex.num_options() {
                    items.push(item(Some(answer), all.clone()));
                }
            }
        }
    }
    Ok(items)
}
