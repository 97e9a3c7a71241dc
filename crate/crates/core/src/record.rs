use serde::{Deserialize, Serialize};

use crate::perspective::PerspectiveKind;
use crate::response_parser::{Answer, RankedPerspective};

/// One scored prediction, as written to the record log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub dataset: String,
    pub method: String,
    pub instance_id: String,
    /// SHA-256 of the first prompt sent for this instance.
    pub prompt_hash: String,
    /// Cache keys of every response used, in call order.
    pub response_refs: Vec<String>,
    pub rankings: Vec<RankedPerspective>,
    pub chosen: Option<PerspectiveKind>,
    /// Perspective the model itself named on its reasoning header.
    #[serde(default)]
    pub stated_perspective: Option<PerspectiveKind>,
    /// Confidence attached to `chosen` in `rankings`.
    pub confidence: Option<f64>,
    pub answer: Answer,
    pub gold: String,
    pub correct: bool,
    pub response_length: u64,
    pub calls: u32,
    pub fallback_used: bool,
    #[serde(default)]
    pub reasoning: String,
    #[serde(default)]
    pub error: Option<String>,
}

impl PredictionRecord {
    /// Correctness rule: a parsed answer equal to the gold label.
    pub fn is_correct(answer: &Answer, gold: &str) -> bool {
        answer.label() == Some(gold)
    }

    pub fn is_parse_failure(&self) -> bool {
        self.error.is_none() && self.answer.is_failure()
    }

    /// (dataset, method, instance) identity used for resume.
    pub fn triple(&self) -> (&str, &str, &str) {
        (&self.dataset, &self.method, &self.instance_id)
    }
}
