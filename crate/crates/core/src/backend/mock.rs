use std::collections::HashMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;

use super::{BackendError, CompletionBackend, CompletionRequest, RawResponse};
use crate::seeding::sha256_hex;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Scripted {
    text: String,
    completion_tokens: Option<u64>,
}

/// One script entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockRule {
    /// Answer prompts whose SHA-256 hex digest equals `prompt_hash`;
    /// `sample` restricts the rule to one self-consistency draw.
    Hash { prompt_hash: String, sample: Option<u32>, response: String, completion_tokens: Option<u64> },
    /// Next slot of the ordered sequence, consumed by unmatched prompts.
    Sequence { response: String, completion_tokens: Option<u64> },
}

#[derive(Debug, thiserror::Error)]
pub enum MockScriptError {
    #[error("{path}:{line}: {message}")]
    Line { path: String, line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScriptLine {
    #[serde(default)]
    prompt_hash: Option<String>,
    #[serde(default)]
    prompt: Option<String>,
    #[serde(default)]
    sample: Option<u32>,
    #[serde(default)]
    sequence: bool,
    response: String,
    #[serde(default)]
    completion_tokens: Option<u64>,
}

/// Deterministic scripted backend. Hash rules win over sequence slots; a
/// prompt matching neither raises [`BackendError::ScriptedGap`].
#[derive(Debug, Default)]
pub struct MockBackend {
    by_hash: HashMap<(String, Option<u32>), Scripted>,
    sequence: Vec<Scripted>,
    cursor: AtomicUsize,
    calls: AtomicU64,
    prompts: Mutex<Vec<String>>,
}

impl MockBackend {
    pub fn new(rules: impl IntoIterator<Item = MockRule>) -> Self {
        let mut mock = MockBackend::default();
        for rule in rules {
            mock.register(rule);
        }
        mock
    }

    pub fn register(&mut self, rule: MockRule) {
        match rule {
            MockRule::Hash { prompt_hash, sample, response, completion_tokens } => {
                self.by_hash
                    .insert((prompt_hash.to_lowercase(), sample), Scripted { text: response, completion_tokens });
            }
            MockRule::Sequence { response, completion_tokens } => {
                self.sequence.push(Scripted { text: response, completion_tokens })
            }
        }
    }

    /// Rule answering exactly `prompt`.
    pub fn rule_for_prompt(prompt: &str, response: impl Into<String>) -> MockRule {
        MockRule::Hash {
            prompt_hash: sha256_hex(prompt.as_bytes()),
            sample: None,
            response: response.into(),
            completion_tokens: None,
        }
    }

    /// Loads every `*.jsonl` file of `dir` in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, MockScriptError> {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| MockScriptError::Io(format!("{}: {e}", dir.display())))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        let mut mock = MockBackend::default();
        for file in files {
            mock.load_file(&file)?;
        }
        Ok(mock)
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), MockScriptError> {
        let text = std::fs::read_to_string(path).map_err(|e| MockScriptError::Io(format!("{}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fail = |message: String| MockScriptError::Line { path: path.display().to_string(), line: i + 1, message };
            let parsed: ScriptLine = serde_json::from_str(line).map_err(|e| fail(e.to_string()))?;
            let hash = match (parsed.prompt_hash, parsed.prompt) {
                (Some(h), None) => Some(h),
                (None, Some(p)) => Some(sha256_hex(p.as_bytes())),
                (None, None) => None,
                (Some(_), Some(_)) => return Err(fail("give either prompt_hash or prompt, not both".into())),
            };
            let rule = match (hash, parsed.sequence) {
                (Some(prompt_hash), false) => MockRule::Hash {
                    prompt_hash,
                    sample: parsed.sample,
                    response: parsed.response,
                    completion_tokens: parsed.completion_tokens,
                },
                (None, true) => MockRule::Sequence { response: parsed.response, completion_tokens: parsed.completion_tokens },
                (Some(_), true) => return Err(fail("a sequence slot cannot also match a prompt".into())),
                (None, false) => return Err(fail("entry needs prompt_hash, prompt or \"sequence\": true".into())),
            };
            self.register(rule);
        }
        Ok(())
    }

    /// Completion calls served or refused so far.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// Prompts received, in arrival order.
    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).clone()
    }

    pub fn sequence_remaining(&self) -> usize {
        self.sequence.len().saturating_sub(self.cursor.load(Ordering::SeqCst))
    }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompts.lock().unwrap_or_else(|p| p.into_inner()).push(request.prompt.clone());
        let hash = sha256_hex(request.prompt.as_bytes());
        let scripted = self
            .by_hash
            .get(&(hash.clone(), Some(request.sample)))
            .or_else(|| self.by_hash.get(&(hash.clone(), None)))
            .cloned()
            .or_else(|| {
                let slot = self
                    .cursor
                    .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| (c < self.sequence.len()).then_some(c + 1))
                    .ok()?;
                self.sequence.get(slot).cloned()
            });
        match scripted {
            Some(s) => Ok(RawResponse {
                text: super::trim_provider_text(s.text),
                reported_completion_tokens: s.completion_tokens,
                latency: Duration::ZERO,
                from_cache: false,
            }),
            None => Err(BackendError::ScriptedGap { hash, sample: request.sample }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_script_is_a_gap() {
        let mock = MockBackend::default();
        let err = mock.complete(&CompletionRequest::new("anything", 0.0)).unwrap_err();
        match err {
            BackendError::ScriptedGap { hash, .. } => assert_eq!(hash, sha256_hex(b"anything")),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(mock.calls(), 1);
    }

    #[test]
    fn sequence_in_order() {
        let mock = MockBackend::new(
            ["one", "two", "three"].map(|r| MockRule::Sequence { response: r.into(), completion_tokens: None }),
        );
        let texts: Vec<_> = (0..3).map(|i| mock.complete(&CompletionRequest::new("p", 0.7).with_sample(i)).unwrap().text).collect();
        assert_eq!(texts, ["one", "two", "three"]);
        assert!(mock.complete(&CompletionRequest::new("p", 0.7)).is_err());
    }

    #[test]
    fn hash_rules_and_samples() {
        let mut mock = MockBackend::new([MockBackend::rule_for_prompt("q", "generic")]);
        mock.register(MockRule::Hash {
            prompt_hash: sha256_hex(b"q"),
            sample: Some(2),
            response: "second draw".into(),
            completion_tokens: Some(9),
        });
        assert_eq!(mock.complete(&CompletionRequest::new("q", 0.0)).unwrap().text, "generic");
        let r = mock.complete(&CompletionRequest::new("q", 0.0).with_sample(2)).unwrap();
        assert_eq!((r.text.as_str(), r.reported_completion_tokens), ("second draw", Some(9)));
    }

    #[test]
    fn script_file_validation() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.jsonl"), "{\"prompt\": \"x\", \"response\": \"y\"}\n").unwrap();
        let mock = MockBackend::from_dir(dir.path()).unwrap();
        assert_eq!(mock.complete(&CompletionRequest::new("x", 0.0)).unwrap().text, "y");
        std::fs::write(dir.path().join("b.jsonl"), "{\"response\": \"y\"}\n").unwrap();
        assert!(matches!(MockBackend::from_dir(dir.path()), Err(MockScriptError::Line { line: 1, .. })));
    }
}
