//! Per-method execution of a single instance.

use std::collections::BTreeMap;

use super::RunnerError;
use crate::backend::{BackendError, CacheKey, CompletionBackend, CompletionRequest, RawResponse};
use crate::datasets::TaskInstance;
use crate::perspective::{PerspectiveKind, PerspectiveSet};
use crate::prompt_forge::{Candidate, Demonstration, Method, PromptForge, StageSelection, TaskFrame};
use crate::record::PredictionRecord;
use crate::response_parser::{measure_response_length, parse_response, Answer, ParsedResponse, RankedPerspective};
use crate::seeding::sha256_hex;
use crate::selector::{select, SelectionOutcome, SelectionPolicy};

/// Settings shared by every instance of a run.
#[derive(Debug, Clone)]
pub struct EngineSettings {
    pub model_name: String,
    pub temperature: f64,
    pub policy: SelectionPolicy,
    pub enabled: PerspectiveSet,
    pub sc_samples: u32,
    pub sc_temperature: f64,
    pub annotated_demos: bool,
}

/// Builds prompts, calls the backend and scores one instance at a time.
pub struct Engine<'a, B: ?Sized> {
    pub forge: &'a PromptForge,
    pub backend: &'a B,
    pub settings: &'a EngineSettings,
}

struct Calls<'e, B: ?Sized> {
    backend: &'e B,
    model_name: &'e str,
    first_prompt: Option<String>,
    refs: Vec<String>,
    length: u64,
}

impl<B: CompletionBackend + ?Sized> Calls<'_, B> {
    fn call(&mut self, prompt: String, temperature: f64, sample: u32) -> Result<RawResponse, BackendError> {
        if self.first_prompt.is_none() {
            self.first_prompt = Some(prompt.clone());
        }
        self.refs.push(CacheKey::new(self.model_name, temperature, sample, &prompt).as_hex().to_string());
        let request = CompletionRequest { prompt, temperature, sample };
        let response = self.backend.complete(&request)?;
        self.length += measure_response_length(&response.text, response.reported_completion_tokens);
        Ok(response)
    }
}

/// What a method produced before scoring.
#[derive(Default)]
struct Outcome {
    rankings: Vec<RankedPerspective>,
    selection: Option<SelectionOutcome>,
    stated_perspective: Option<PerspectiveKind>,
    answer: Option<Answer>,
    reasoning: String,
}

impl<'a, B: CompletionBackend + ?Sized> Engine<'a, B> {
    pub fn new(forge: &'a PromptForge, backend: &'a B, settings: &'a EngineSettings) -> Self {
        Engine { forge, backend, settings }
    }

    /// Runs `method` on one instance. Backend failures yield an errored
    /// record; configuration problems are returned as errors.
    pub fn run_instance(
        &self,
        dataset: &str,
        method: Method,
        frame: &TaskFrame,
        instance: &TaskInstance,
        demos: &[Demonstration],
    ) -> Result<PredictionRecord, RunnerError> {
        let mut calls = Calls {
            backend: self.backend,
            model_name: &self.settings.model_name,
            first_prompt: None,
            refs: Vec::new(),
            length: 0,
        };
        let outcome = self.execute(method, frame, instance, demos, &mut calls);
        let (outcome, error) = match outcome {
            Ok(o) => (o, None),
            Err(RunnerError::Backend(e @ (BackendError::Transport { .. } | BackendError::Protocol(_) | BackendError::ScriptedGap { .. }))) => {
                log::warn!("{dataset}/{method}/{}: {e}", instance.id);
                (Outcome::default(), Some(e.to_string()))
            }
            Err(other) => return Err(other),
        };
        let answer = outcome.answer.unwrap_or(Answer::ParseFailure);
        let chosen = outcome.selection.as_ref().map(|s| s.chosen);
        let confidence = chosen.and_then(|c| outcome.rankings.iter().find(|r| r.kind == c).map(|r| r.confidence));
        Ok(PredictionRecord {
            dataset: dataset.to_string(),
            method: method.key().to_string(),
            instance_id: instance.id.clone(),
            prompt_hash: calls.first_prompt.as_deref().map(|p| sha256_hex(p.as_bytes())).unwrap_or_default(),
            calls: calls.refs.len() as u32,
            response_refs: calls.refs,
            rankings: outcome.rankings,
            chosen,
            stated_perspective: outcome.stated_perspective,
            confidence,
            correct: error.is_none() && PredictionRecord::is_correct(&answer, &instance.target),
            answer,
            gold: instance.target.clone(),
            response_length: calls.length,
            fallback_used: outcome.selection.is_some_and(|s| s.fallback_used),
            reasoning: outcome.reasoning,
            error,
        })
    }

    fn parse(&self, frame: &TaskFrame, response: &RawResponse) -> ParsedResponse {
        parse_response(&response.text, &frame.labels, response.reported_completion_tokens)
    }

    fn execute(
        &self,
        method: Method,
        frame: &TaskFrame,
        instance: &TaskInstance,
        demos: &[Demonstration],
        calls: &mut Calls<'_, B>,
    ) -> Result<Outcome, RunnerError> {
        let s = self.settings;
        let question = instance.input.as_str();
        let t = s.temperature;
        match method {
            Method::Rpt | Method::RptStaged if s.enabled.is_empty() => {
                let bundle = self.forge.build_simple_prompt(frame, question, demos, s.annotated_demos)?;
                let parsed = self.parse(frame, &calls.call(bundle.rendered, t, 0)?);
                Ok(Outcome { answer: Some(parsed.answer), reasoning: parsed.reasoning_text, ..Outcome::default() })
            }
            Method::Rpt if s.policy == SelectionPolicy::Highest => {
                let bundle = self.forge.build_unified_prompt_with(frame, question, &s.enabled, demos, s.annotated_demos)?;
                let parsed = self.parse(frame, &calls.call(bundle.rendered, t, 0)?);
                let selection = select(&parsed.rankings, s.policy, &s.enabled, &instance.id);
                Ok(Outcome {
                    rankings: parsed.rankings,
                    selection: Some(selection),
                    stated_perspective: parsed.stated_perspective,
                    answer: Some(parsed.answer),
                    reasoning: parsed.reasoning_text,
                })
            }
            Method::Rpt | Method::RptStaged => {
                let stages = self.forge.build_stage_prompts_with(frame, question, &s.enabled, demos, s.annotated_demos)?;
                if method == Method::RptStaged {
                    calls.call(stages.stage1, t, 0)?;
                }
                let ranked = self.parse(frame, &calls.call(stages.stage2, t, 0)?);
                let selection = select(&ranked.rankings, s.policy, &s.enabled, &instance.id);
                let how = match s.policy {
                    SelectionPolicy::Highest => StageSelection::HighestConfidence,
                    _ => StageSelection::Use(selection.chosen),
                };
                let final_prompt = stages.stage3.render(&selection.rankings, how);
                let parsed = self.parse(frame, &calls.call(final_prompt, t, 0)?);
                Ok(Outcome {
                    rankings: ranked.rankings,
                    selection: Some(selection),
                    stated_perspective: parsed.stated_perspective,
                    answer: Some(parsed.answer),
                    reasoning: parsed.reasoning_text,
                })
            }
            Method::Ensemble | Method::Reranking => {
                let mut members: Vec<(PerspectiveKind, ParsedResponse)> = Vec::new();
                for kind in PerspectiveKind::ALL.iter().copied().filter(|k| s.enabled.contains(k)) {
                    let bundle = self.forge.build_member_prompt(method, kind, frame, question, demos)?;
                    let parsed = self.parse(frame, &calls.call(bundle.rendered, t, 0)?);
                    members.push((kind, parsed));
                }
                if method == Method::Ensemble {
                    let answers: Vec<Answer> = members.iter().map(|(_, p)| p.answer.clone()).collect();
                    let reasoning = members.iter().map(|(_, p)| p.reasoning_text.as_str()).collect::<Vec<_>>().join("\n\n");
                    return Ok(Outcome { answer: Some(majority_vote_first(&answers)), reasoning, ..Outcome::default() });
                }
                let candidates: Vec<Candidate> = members
                    .iter()
                    .map(|(_, p)| Candidate { reasoning: p.reasoning_text.clone(), answer: p.answer.clone() })
                    .collect();
                let judge = self.forge.build_rerank_prompt(frame, question, &candidates)?;
                let parsed = self.parse(frame, &calls.call(judge, t, 0)?);
                Ok(Outcome { answer: Some(parsed.answer), reasoning: parsed.reasoning_text, ..Outcome::default() })
            }
            Method::CotSc => {
                let bundle = self.forge.build_baseline_prompt(method, frame, question, demos)?;
                let mut answers = Vec::new();
                let mut reasoning = Vec::new();
                for k in 0..s.sc_samples {
                    let parsed = self.parse(frame, &calls.call(bundle.rendered.clone(), s.sc_temperature, k)?);
                    answers.push(parsed.answer);
                    reasoning.push(parsed.reasoning_text);
                }
                Ok(Outcome { answer: Some(majority_vote_lexicographic(&answers)), reasoning: reasoning.join("\n\n"), ..Outcome::default() })
            }
            _ => {
                let bundle = self.forge.build_baseline_prompt(method, frame, question, demos)?;
                let parsed = self.parse(frame, &calls.call(bundle.rendered, t, 0)?);
                Ok(Outcome { answer: Some(parsed.answer), reasoning: parsed.reasoning_text, ..Outcome::default() })
            }
        }
    }
}

fn vote_counts(answers: &[Answer]) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for label in answers.iter().filter_map(Answer::label) {
        *counts.entry(label).or_default() += 1;
    }
    counts
}

/// Most common parsed answer; ties go to the tied label that appears first
/// in `answers`. Parse failures do not vote.
pub fn majority_vote_first(answers: &[Answer]) -> Answer {
    let counts = vote_counts(answers);
    let Some(top) = counts.values().max().copied() else {
        return Answer::ParseFailure;
    };
    answers
        .iter()
        .filter_map(Answer::label)
        .find(|l| counts[l] == top)
        .map_or(Answer::ParseFailure, |l| Answer::Label(l.to_string()))
}

/// Most common parsed answer; ties go to the lexicographically first label.
pub fn majority_vote_lexicographic(answers: &[Answer]) -> Answer {
    let counts = vote_counts(answers);
    let top = counts.values().max().copied();
    counts
        .into_iter()
        .find(|(_, c)| Some(*c) == top)
        .map_or(Answer::ParseFailure, |(l, _)| Answer::Label(l.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(x: &str) -> Answer {
        Answer::Label(x.into())
    }

    #[test]
    fn votes() {
        assert_eq!(majority_vote_first(&[a("True"), a("True"), a("False")]), a("True"));
        assert_eq!(majority_vote_first(&[a("False"), a("True"), Answer::ParseFailure]), a("False"));
        assert_eq!(majority_vote_first(&[Answer::ParseFailure]), Answer::ParseFailure);
        assert_eq!(majority_vote_lexicographic(&[a("A"), a("B"), a("A")]), a("A"));
        assert_eq!(majority_vote_lexicographic(&[a("C"), a("B")]), a("B"));
        assert_eq!(majority_vote_lexicographic(&[]), Answer::ParseFailure);
    }
}
