//! Information-leak audit over participant-facing payloads.

use serde_json::Value;

/// Keys that must never reach a participant.
pub const FORBIDDEN_KEYS: &[&str] = &[
    "gold",
    "gold_index",
    "target",
    "target_answer",
    "answer_index",
    "agent",
    "agent_id",
    "judge",
    "judge_id",
    "example_id",
    "passage_id",
    "condition",
    "pool",
];

/// What the server knows about an item but must keep to itself.
#[derive(Debug, Clone, Default)]
pub struct Secrets {
    /// Identifiers that must not appear inside any string value.
    pub identifiers: Vec<String>,
    /// Passage sentences not shown for this item.
    pub hidden_sentences: Vec<String>,
}

/// Every finding in `payload`; empty means clean.
pub fn audit_value(payload: &Value, secrets: &Secrets) -> Vec<String> {
    let mut findings = Vec::new();
    walk(payload, "$", secrets, &mut findings);
    findings
}

fn walk(value: &Value, path: &str, secrets: &Secrets, out: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if FORBIDDEN_KEYS.contains(&k.as_str()) {
                    out.push(format!("{path}.{k}: forbidden key"));
                }
                walk(v, &format!("{path}.{k}"), secrets, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                walk(v, &format!("{path}[{i}]"), secrets, out);
            }
        }
        Value::String(s) => {
            for id in &secrets.identifiers {
                if !id.is_empty() && s.contains(id.as_str()) {
                    out.push(format!("{path}: contains identifier `{id}`"));
                }
            }
            for hidden in &secrets.hidden_sentences {
                if s.contains(hidden.as_str()) {
                    out.push(format!("{path}: contains a hidden sentence"));
                }
            }
        }
        _ => {}
    }
}
