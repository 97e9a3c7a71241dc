//! Prompt rendering for the perspective-transition method and every baseline.

mod templates;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::perspective::{PerspectiveKind, PerspectiveSet};
use crate::response_parser::{Answer, LabelSpace, RankedPerspective};

pub use templates::{render, TemplateSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForgeError {
    #[error("at least one perspective must be enabled")]
    EmptyPerspectiveSet,
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    #[error("{0} is zero-shot only and does not take demonstrations")]
    DemosNotAllowed(Method),
    #[error("demonstration answer `{answer}` is not one of {labels:?}")]
    LabelOutsideSpace { answer: String, labels: Vec<String> },
    #[error("{0} issues several calls; use its dedicated builders")]
    CompositeMethod(Method),
    #[error("template error: {0}")]
    Template(String),
    #[error("{0}")]
    Io(String),
}

/// Prompting method identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    ZeroShotCot,
    Icl,
    FewShotCot,
    SelfAsk,
    ExpertPrompt,
    RolePlay,
    Spp,
    Ric,
    Ensemble,
    Reranking,
    CotSc,
    Rpt,
    RptStaged,
}

impl Method {
    pub const ALL: [Method; 14] = [
        Method::Direct,
        Method::ZeroShotCot,
        Method::Icl,
        Method::FewShotCot,
        Method::SelfAsk,
        Method::ExpertPrompt,
        Method::RolePlay,
        Method::Spp,
        Method::Ric,
        Method::Ensemble,
        Method::Reranking,
        Method::CotSc,
        Method::Rpt,
        Method::RptStaged,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ZeroShotCot => "zero-shot-cot",
            Method::Icl => "icl",
            Method::FewShotCot => "few-shot-cot",
            Method::SelfAsk => "self-ask",
            Method::ExpertPrompt => "expert-prompt",
            Method::RolePlay => "role-play",
            Method::Spp => "spp",
            Method::Ric => "ric",
            Method::Ensemble => "ensemble",
            Method::Reranking => "reranking",
            Method::CotSc => "cot-sc",
            Method::Rpt => "rpt",
            Method::RptStaged => "rpt-staged",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Method::Direct => "Direct",
            Method::ZeroShotCot => "Zero-Shot-CoT",
            Method::Icl => "ICL",
            Method::FewShotCot => "Few-Shot-CoT",
            Method::SelfAsk => "Self-Ask",
            Method::ExpertPrompt => "ExpertPrompt",
            Method::RolePlay => "Role-Play",
            Method::Spp => "SPP",
            Method::Ric => "RiC",
            Method::Ensemble => "Ensemble",
            Method::Reranking => "Reranking",
            Method::CotSc => "CoT-SC",
            Method::Rpt => "RPT",
            Method::RptStaged => "RPT (staged)",
        }
    }

    /// Methods whose prompt never carries demonstrations.
    pub fn zero_shot_only(self) -> bool {
        matches!(self, Method::ZeroShotCot | Method::RolePlay)
    }

    /// Methods built from the perspective instructions.
    pub fn uses_perspectives(self) -> bool {
        matches!(self, Method::Rpt | Method::RptStaged | Method::Ensemble | Method::Reranking)
    }

    fn single_template(self) -> Option<&'static str> {
        Some(match self {
            Method::Direct => "direct",
            Method::ZeroShotCot => "zero_shot_cot",
            Method::Icl => "icl",
            Method::FewShotCot => "few_shot_cot",
            Method::SelfAsk => "self_ask",
            Method::ExpertPrompt => "expert_prompt",
            Method::RolePlay => "role_play",
            Method::Spp => "spp",
            Method::Ric => "ric",
            Method::CotSc => "cot_sc",
            Method::Ensemble | Method::Reranking | Method::Rpt | Method::RptStaged => return None,
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = ForgeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squash = |x: &str| x.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_lowercase();
        let wanted = squash(s);
        Method::ALL
            .into_iter()
            .find(|m| squash(m.key()) == wanted || squash(m.display_name()) == wanted)
            .ok_or_else(|| ForgeError::UnknownMethod(s.to_string()))
    }
}

/// One worked example shown before the target question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub question: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

/// Task-level context shared by every prompt of a task: the description
/// that precedes each question and the accepted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFrame {
    pub description: String,
    pub labels: LabelSpace,
}

impl TaskFrame {
    pub fn new(description: impl Into<String>, labels: LabelSpace) -> Self {
        TaskFrame { description: description.into(), labels }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Unified { annotated: bool },
    Simple { annotated: bool },
    Baseline,
    Member(PerspectiveKind),
}

/// A rendered prompt together with what went into it.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptBundle {
    pub method: Method,
    pub task_description: String,
    pub question: String,
    pub rendered: String,
    pub enabled: PerspectiveSet,
    pub shots: usize,
    layout: Layout,
    labels: LabelSpace,
    demos: Vec<Demonstration>,
}

impl PromptBundle {
    pub fn demonstrations(&self) -> &[Demonstration] {
        &self.demos
    }

    pub fn label_space(&self) -> &LabelSpace {
        &self.labels
    }
}

/// How stage three chooses the perspective to reason from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageSelection {
    HighestConfidence,
    Use(PerspectiveKind),
}

/// The three sequential prompts. Stage three is completed once the ranking
/// from stage two is known.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePrompts {
    pub stage1: String,
    pub stage2: String,
    pub stage3: Stage3Template,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage3Template {
    template: String,
    base: Vec<(&'static str, String)>,
    highest: String,
    forced: String,
}

impl Stage3Template {
    pub fn render(&self, rankings: &[RankedPerspective], selection: StageSelection) -> String {
        let rankings_text = format_rankings(rankings);
        let selection_text = match selection {
            StageSelection::HighestConfidence => self.highest.clone(),
            StageSelection::Use(kind) => render(&self.forced, &[("perspective", kind.display_name())]),
        };
        let mut slots: Vec<(&str, &str)> = self.base.iter().map(|(k, v)| (*k, v.as_str())).collect();
        slots.push(("rankings", &rankings_text));
        slots.push(("selection", &selection_text));
        render(&self.template, &slots)
    }
}

/// `Third-person Perspective, 85%` lines, or `(none)` for an empty list.
pub fn format_rankings(rankings: &[RankedPerspective]) -> String {
    if rankings.is_empty() {
        return "(none)".to_string();
    }
    rankings
        .iter()
        .map(|r| format!("{}, {}%", r.kind.display_name(), format_percent(r.confidence)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn format_percent(confidence: f64) -> String {
    let pct = confidence * 100.0;
    if (pct - pct.round()).abs() < 1e-9 {
        format!("{}", pct.round() as i64)
    } else {
        let s = format!("{pct:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// A candidate shown to the reranking judge.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub reasoning: String,
    pub answer: Answer,
}

/// Renders prompts from a [`TemplateSet`]. Rendering is pure.
#[derive(Debug, Clone, Default)]
pub struct PromptForge {
    templates: TemplateSet,
}

impl PromptForge {
    pub fn new(templates: TemplateSet) -> Self {
        PromptForge { templates }
    }

    pub fn templates(&self) -> &TemplateSet {
        &self.templates
    }

    pub fn build_perspective_instructions(&self, enabled: &PerspectiveSet) -> Result<String, ForgeError> {
        if enabled.is_empty() {
            return Err(ForgeError::EmptyPerspectiveSet);
        }
        let mut lines = vec![self.templates.get("instructions_header")?.to_string()];
        for kind in PerspectiveKind::ALL.iter().filter(|k| enabled.contains(k)) {
            lines.push(self.instruction(*kind)?.to_string());
        }
        Ok(lines.join("\n"))
    }

    fn instruction(&self, kind: PerspectiveKind) -> Result<&str, ForgeError> {
        self.templates.get(match kind {
            PerspectiveKind::Direct => "instruction_direct",
            PerspectiveKind::Role => "instruction_role",
            PerspectiveKind::ThirdPerson => "instruction_third",
        })
    }

    /// The answer-format sentence for a label space.
    pub fn answer_format(&self, labels: &LabelSpace) -> Result<String, ForgeError> {
        let ls = labels.labels();
        let (name, joined) = match ls.len() {
            2 => ("answer_binary", join_or(ls)),
            3 => ("answer_3class", join_or(ls)),
            4 => ("answer_4class", join_or(ls)),
            _ => ("answer_free", ls.join(", ")),
        };
        self.templates.render(name, &[("labels", &joined)])
    }

    /// Demonstration section: numbered blocks separated by blank lines and
    /// followed by one. Empty when there are no demonstrations.
    pub fn render_demonstrations(&self, demos: &[Demonstration], with_reasoning: bool) -> Result<String, ForgeError> {
        if demos.is_empty() {
            return Ok(String::new());
        }
        let template = self.templates.get("demonstration")?;
        let blocks: Vec<String> = demos
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let reasoning = match (&d.reasoning, with_reasoning) {
                    (Some(r), true) if !r.trim().is_empty() => format!("Reasoning: {}\n", r.trim()),
                    _ => String::new(),
                };
                let index = (i + 1).to_string();
                render(
                    template,
                    &[("index", &index), ("question", &d.question), ("reasoning", &reasoning), ("answer", &d.answer)],
                )
            })
            .collect();
        Ok(format!("{}\n\n", blocks.join("\n\n")))
    }

    pub fn build_unified_prompt(
        &self,
        frame: &TaskFrame,
        question: &str,
        enabled: &PerspectiveSet,
        demos: &[Demonstration],
    ) -> Result<PromptBundle, ForgeError> {
        self.build_unified_prompt_with(frame, question, enabled, demos, false)
    }

    /// Unified single-call prompt; `annotated` keeps demonstration reasoning.
    pub fn build_unified_prompt_with(
        &self,
        frame: &TaskFrame,
        question: &str,
        enabled: &PerspectiveSet,
        demos: &[Demonstration],
        annotated: bool,
    ) -> Result<PromptBundle, ForgeError> {
        let mut bundle = self.empty_bundle(Method::Rpt, frame, question, enabled.clone(), Layout::Unified { annotated })?;
        if enabled.is_empty() {
            return Err(ForgeError::EmptyPerspectiveSet);
        }
        check_demos(demos, &frame.labels)?;
        bundle.demos = demos.to_vec();
        self.rerender(bundle)
    }

    /// Prompt used when every perspective has been removed: plain reasoning
    /// with no perspective instructions.
    pub fn build_simple_prompt(
        &self,
        frame: &TaskFrame,
        question: &str,
        demos: &[Demonstration],
        annotated: bool,
    ) -> Result<PromptBundle, ForgeError> {
        let mut bundle =
            self.empty_bundle(Method::Rpt, frame, question, PerspectiveSet::new(), Layout::Simple { annotated })?;
        check_demos(demos, &frame.labels)?;
        bundle.demos = demos.to_vec();
        self.rerender(bundle)
    }

    pub fn build_stage_prompts(
        &self,
        frame: &TaskFrame,
        question: &str,
        enabled: &PerspectiveSet,
    ) -> Result<StagePrompts, ForgeError> {
        self.build_stage_prompts_with(frame, question, enabled, &[], false)
    }

    /// Sequential prompts. Demonstrations appear only in stage three.
    pub fn build_stage_prompts_with(
        &self,
        frame: &TaskFrame,
        question: &str,
        enabled: &PerspectiveSet,
        demos: &[Demonstration],
        annotated: bool,
    ) -> Result<StagePrompts, ForgeError> {
        check_text(frame, question)?;
        check_demos(demos, &frame.labels)?;
        let perspectives = self.build_perspective_instructions(enabled)?;
        let explore = self.templates.get("trigger_explore")?;
        let rank = self.templates.get("trigger_rank")?;
        let common = [
            ("perspectives", perspectives.as_str()),
            ("task_description", frame.description.as_str()),
            ("question", question),
            ("explore", explore),
            ("rank", rank),
        ];
        let stage1 = self.templates.render("rpt_stage1", &common)?;
        let stage2 = self.templates.render("rpt_stage2", &common)?;
        let demonstrations = self.render_demonstrations(demos, annotated)?;
        let stage3 = Stage3Template {
            template: self.templates.get("rpt_stage3")?.to_string(),
            base: vec![
                ("perspectives", perspectives.clone()),
                ("demonstrations", demonstrations),
                ("task_description", frame.description.clone()),
                ("question", question.to_string()),
                ("answer_format", self.answer_format(&frame.labels)?),
            ],
            highest: self.templates.get("selection_highest")?.to_string(),
            forced: self.templates.get("selection_forced")?.to_string(),
        };
        Ok(StagePrompts { stage1, stage2, stage3 })
    }

    /// Single-prompt baselines. Ensemble and Reranking are assembled from
    /// [`Self::build_member_prompt`] and [`Self::build_rerank_prompt`]; RPT
    /// from the unified or staged builders.
    pub fn build_baseline_prompt(
        &self,
        method: Method,
        frame: &TaskFrame,
        question: &str,
        demos: &[Demonstration],
    ) -> Result<PromptBundle, ForgeError> {
        if method.single_template().is_none() {
            return Err(ForgeError::CompositeMethod(method));
        }
        let mut bundle = self.empty_bundle(method, frame, question, PerspectiveSet::new(), Layout::Baseline)?;
        if method.zero_shot_only() && !demos.is_empty() {
            return Err(ForgeError::DemosNotAllowed(method));
        }
        check_demos(demos, &frame.labels)?;
        bundle.demos = demos.to_vec();
        self.rerender(bundle)
    }

    /// Prompt asking for a solution from one fixed perspective.
    pub fn build_member_prompt(
        &self,
        method: Method,
        kind: PerspectiveKind,
        frame: &TaskFrame,
        question: &str,
        demos: &[Demonstration],
    ) -> Result<PromptBundle, ForgeError> {
        let enabled: PerspectiveSet = [kind].into_iter().collect();
        let mut bundle = self.empty_bundle(method, frame, question, enabled, Layout::Member(kind))?;
        check_demos(demos, &frame.labels)?;
        bundle.demos = demos.to_vec();
        self.rerender(bundle)
    }

    /// Judge prompt listing the candidates in order.
    pub fn build_rerank_prompt(
        &self,
        frame: &TaskFrame,
        question: &str,
        candidates: &[Candidate],
    ) -> Result<String, ForgeError> {
        check_text(frame, question)?;
        let template = self.templates.get("candidate")?;
        let listed: Vec<String> = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let index = (i + 1).to_string();
                let answer = c.answer.label().unwrap_or("(no answer)");
                render(template, &[("index", &index), ("reasoning", c.reasoning.trim()), ("answer", answer)])
            })
            .collect();
        let candidates_text = listed.join("\n\n");
        let format = self.answer_format(&frame.labels)?;
        self.templates.render(
            "rerank_judge",
            &[
                ("task_description", &frame.description),
                ("question", question),
                ("candidates", &candidates_text),
                ("answer_format", &format),
            ],
        )
    }

    /// Appends demonstrations, keeping their order, and re-renders.
    pub fn attach_demonstrations(&self, bundle: PromptBundle, demos: &[Demonstration]) -> Result<PromptBundle, ForgeError> {
        if demos.is_empty() {
            return Ok(bundle);
        }
        if bundle.method.zero_shot_only() {
            return Err(ForgeError::DemosNotAllowed(bundle.method));
        }
        check_demos(demos, &bundle.labels)?;
        let mut bundle = bundle;
        bundle.demos.extend_from_slice(demos);
        self.rerender(bundle)
    }

    fn empty_bundle(
        &self,
        method: Method,
        frame: &TaskFrame,
        question: &str,
        enabled: PerspectiveSet,
        layout: Layout,
    ) -> Result<PromptBundle, ForgeError> {
        check_text(frame, question)?;
        Ok(PromptBundle {
            method,
            task_description: frame.description.clone(),
            question: question.to_string(),
            rendered: String::new(),
            enabled,
            shots: 0,
            layout,
            labels: frame.labels.clone(),
            demos: Vec::new(),
        })
    }

    fn rerender(&self, mut bundle: PromptBundle) -> Result<PromptBundle, ForgeError> {
        let with_reasoning = match bundle.layout {
            Layout::Unified { annotated } | Layout::Simple { annotated } => annotated,
            Layout::Baseline => bundle.method != Method::Icl,
            Layout::Member(_) => true,
        };
        let demonstrations = self.render_demonstrations(&bundle.demos, with_reasoning)?;
        let answer_format = self.answer_format(&bundle.labels)?;
        let mut slots: Vec<(&str, String)> = vec![
            ("demonstrations", demonstrations),
            ("task_description", bundle.task_description.clone()),
            ("question", bundle.question.clone()),
            ("answer_format", answer_format),
        ];
        let template = match bundle.layout {
            Layout::Unified { .. } => {
                slots.push(("perspectives", self.build_perspective_instructions(&bundle.enabled)?));
                slots.push(("explore", self.templates.get("trigger_explore")?.to_string()));
                slots.push(("rank", self.templates.get("trigger_rank")?.to_string()));
                slots.push(("selection", self.templates.get("selection_highest")?.to_string()));
                "rpt_unified"
            }
            Layout::Simple { .. } => "rpt_simple",
            Layout::Baseline => bundle.method.single_template().ok_or(ForgeError::CompositeMethod(bundle.method))?,
            Layout::Member(kind) => {
                slots.push(("instruction", self.instruction(kind)?.to_string()));
                "perspective_member"
            }
        };
        let borrowed: Vec<(&str, &str)> = slots.iter().map(|(k, v)| (*k, v.as_str())).collect();
        bundle.rendered = self.templates.render(template, &borrowed)?;
        bundle.shots = bundle.demos.len();
        Ok(bundle)
    }
}

fn join_or(labels: &[String]) -> String {
    match labels.split_last() {
        Some((last, rest)) if !rest.is_empty() => format!("{} or {last}", rest.join(", ")),
        Some((last, _)) => last.clone(),
        None => String::new(),
    }
}

fn check_text(frame: &TaskFrame, question: &str) -> Result<(), ForgeError> {
    if frame.description.trim().is_empty() {
        return Err(ForgeError::EmptyField("task description"));
    }
    if question.trim().is_empty() {
        return Err(ForgeError::EmptyField("question"));
    }
    Ok(())
}

fn check_demos(demos: &[Demonstration], labels: &LabelSpace) -> Result<(), ForgeError> {
    match demos.iter().find(|d| !labels.contains(&d.answer)) {
        Some(d) => Err(ForgeError::LabelOutsideSpace { answer: d.answer.clone(), labels: labels.labels().to_vec() }),
        None => Ok(()),
    }
}
