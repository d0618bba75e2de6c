//! HTTP bridge to out-of-process judges.
//!
//! `POST {endpoint}/score` with a JSON body
//! `{example_id, question, options, evidence}` (raw strings, evidence in
//! passage order); the response is `{"logits": [..]}` with one finite
//! number per option. The remote model owns tokenization and truncation.

use std::io::ErrorKind;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Judge, JudgeError};
use crate::corpus::{Example, Passage};
use crate::evidence::Evidence;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteRequest {
    pub example_id: String,
    pub question: String,
    pub options: Vec<String>,
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteResponse {
    pub logits: Vec<f64>,
}

/// Thread-safe client; clones share one connection pool.
#[derive(Clone)]
pub struct RemoteJudge {
    endpoint: String,
    url: String,
    timeout: Duration,
    agent: ureq::Agent,
}

impl RemoteJudge {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let endpoint = endpoint.into();
        let url = format!("{}/score", endpoint.trim_end_matches('/'));
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        Self {
            endpoint,
            url,
            timeout,
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// One round trip. Returns exactly `request.options.len()` finite logits.
    pub fn call(&self, request: &RemoteRequest) -> Result<Vec<f64>, JudgeError> {
        let response = self
            .agent
            .post(&self.url)
            .set("Content-Type", "application/json")
            .send_json(request)
            .map_err(|e| self.classify(e))?;
        let body = response.into_string().map_err(|e| self.io_error(e))?;
        let parsed: RemoteResponse =
            serde_json::from_str(&body).map_err(|e| JudgeError::Malformed {
                endpoint: self.endpoint.clone(),
                detail: e.to_string(),
            })?;
        if parsed.logits.len() != request.options.len() {
            return Err(JudgeError::Arity {
                expected: request.options.len(),
                got: parsed.logits.len(),
            });
        }
        if parsed.logits.iter().any(|l| !l.is_finite()) {
            return Err(JudgeError::NonFinite);
        }
        Ok(parsed.logits)
    }

    fn io_error(&self, e: std::io::Error) -> JudgeError {
        if matches!(e.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock) {
            JudgeError::Timeout {
                endpoint: self.endpoint.clone(),
                timeout: self.timeout,
            }
        } else {
            JudgeError::Transport {
                endpoint: self.endpoint.clone(),
                detail: e.to_string(),
            }
        }
    }

    fn classify(&self, e: ureq::Error) -> JudgeError {
        match e {
            ureq::Error::Status(status, resp) => JudgeError::Status {
                endpoint: self.endpoint.clone(),
                status,
                body: resp.into_string().unwrap_or_default(),
            },
            ureq::Error::Transport(t) => {
                let timed_out = std::error::Error::source(&t)
                    .and_then(|s| s.downcast_ref::<std::io::Error>())
                    .is_some_and(|io| {
                        matches!(io.kind(), ErrorKind::TimedOut | ErrorKind::WouldBlock)
                    });
                if timed_out {
                    JudgeError::Timeout {
                        endpoint: self.endpoint.clone(),
                        timeout: self.timeout,
                    }
                } else {
                    JudgeError::Transport {
                        endpoint: self.endpoint.clone(),
                        detail: t.to_string(),
                    }
                }
            }
        }
    }

    pub fn request_for(example: &Example, passage: &Passage, evidence: &Evidence) -> RemoteRequest {
        RemoteRequest {
            example_id: example.id.clone(),
            question: example.question.raw.clone(),
            options: example.options.iter().map(|o| o.raw.clone()).collect(),
            evidence: evidence
                .iter()
                .map(|i| passage.sentence_text(i).to_string())
                .collect(),
        }
    }
}

impl Judge for RemoteJudge {
    fn id(&self) -> &str {
        &self.endpoint
    }

    fn logits(
        &self,
        example: &Example,
        passage: &Passage,
        evidence: &Evidence,
    ) -> Result<Vec<f64>, JudgeError> {
        self.call(&Self::request_for(example, passage, evidence))
    }
}
