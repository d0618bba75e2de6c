//! Published full-passage test accuracies, printed beside reproduced
//! numbers. Neural rows are listed for context only.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceAccuracy {
    pub judge: &'static str,
    pub dataset: &'static str,
    /// Percent.
    pub accuracy: f64,
    /// Accepted deviation of a reproduction, in points. `None` for rows
    /// that are not reproduced.
    pub tolerance: Option<f64>,
    pub note: &'static str,
}

const NEURAL: &str = "not reproduced: neural judge out of scope";

pub const REFERENCE_ACCURACIES: [ReferenceAccuracy; 10] = [
    ReferenceAccuracy { judge: "tfidf-sqa", dataset: "race", accuracy: 32.6, tolerance: Some(2.5), note: "" },
    ReferenceAccuracy { judge: "tfidf-sqa", dataset: "dream", accuracy: 44.4, tolerance: Some(2.5), note: "" },
    ReferenceAccuracy { judge: "tfidf-sa", dataset: "race", accuracy: 31.6, tolerance: Some(2.5), note: "" },
    ReferenceAccuracy { judge: "tfidf-sa", dataset: "dream", accuracy: 44.5, tolerance: Some(2.5), note: "" },
    ReferenceAccuracy { judge: "embedding-sa", dataset: "race", accuracy: 30.4, tolerance: Some(3.0), note: "300-d pretrained vectors" },
    ReferenceAccuracy { judge: "embedding-sa", dataset: "dream", accuracy: 38.4, tolerance: Some(3.0), note: "300-d pretrained vectors" },
    ReferenceAccuracy { judge: "bert-base", dataset: "race", accuracy: 65.4, tolerance: None, note: NEURAL },
    ReferenceAccuracy { judge: "bert-base", dataset: "dream", accuracy: 61.0, tolerance: None, note: NEURAL },
    ReferenceAccuracy { judge: "bert-large", dataset: "race", accuracy: 69.4, tolerance: None, note: NEURAL },
    ReferenceAccuracy { judge: "bert-large", dataset: "dream", accuracy: 64.9, tolerance: None, note: NEURAL },
];

pub fn reference_accuracy(judge: &str, dataset: &str) -> Option<&'static ReferenceAccuracy> {
    REFERENCE_ACCURACIES
        .iter()
        .find(|r| r.judge == judge && r.dataset == dataset)
}
