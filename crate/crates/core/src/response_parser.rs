//! Extraction of ranked perspectives, reasoning and final answers from raw
//! model output.
//!
//! Everything here is total: any input text yields a value. Unrecoverable
//! answers are reported as [`Answer::ParseFailure`] rather than an error.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::perspective::PerspectiveKind;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelSpaceError {
    #[error("label space has no labels")]
    Empty,
    #[error("alias `{alias}` points at `{target}`, which is not a label")]
    DanglingAlias { alias: String, target: String },
    #[error("labels `{0}` and `{1}` are indistinguishable after normalization")]
    Collision(String, String),
}

/// Closed set of answers a task accepts, plus surface-form aliases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabelSpace", into = "RawLabelSpace")]
pub struct LabelSpace {
    labels: Vec<String>,
    aliases: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RawLabelSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    aliases: BTreeMap<String, String>,
}

impl TryFrom<RawLabelSpace> for LabelSpace {
    type Error = LabelSpaceError;

    fn try_from(raw: RawLabelSpace) -> Result<Self, Self::Error> {
        LabelSpace::new(raw.labels, raw.aliases)
    }
}

impl From<LabelSpace> for RawLabelSpace {
    fn from(space: LabelSpace) -> Self {
        RawLabelSpace { labels: space.labels, aliases: space.aliases }
    }
}

impl LabelSpace {
    pub fn new<L, S>(labels: L, aliases: BTreeMap<String, String>) -> Result<Self, LabelSpaceError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(LabelSpaceError::Empty);
        }
        for (i, a) in labels.iter().enumerate() {
            for b in &labels[i + 1..] {
                if normalize_text(a) == normalize_text(b) {
                    return Err(LabelSpaceError::Collision(a.clone(), b.clone()));
                }
            }
        }
        for (alias, target) in &aliases {
            if !labels.contains(target) {
                return Err(LabelSpaceError::DanglingAlias {
                    alias: alias.clone(),
                    target: target.clone(),
                });
            }
        }
        Ok(LabelSpace { labels, aliases })
    }

    /// A space without aliases.
    pub fn plain<L, S>(labels: L) -> Result<Self, LabelSpaceError>
    where
        L: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(labels, BTreeMap::new())
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    /// Surface forms (labels first, then aliases) as token sequences.
    fn surface_forms(&self) -> Vec<(Vec<String>, &str)> {
        let mut forms: Vec<(Vec<String>, &str)> = self
            .labels
            .iter()
            .map(|l| (tokens_of(l), l.as_str()))
            .collect();
        forms.extend(self.aliases.iter().map(|(a, l)| (tokens_of(a), l.as_str())));
        forms.retain(|(t, _)| !t.is_empty());
        forms
    }
}

/// A final answer: a member of the label space, or the parse-failure marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<String>", into = "Option<String>")]
pub enum Answer {
    Label(String),
    ParseFailure,
}

impl Answer {
    pub fn label(&self) -> Option<&str> {
        match self {
            Answer::Label(l) => Some(l),
            Answer::ParseFailure => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Answer::ParseFailure)
    }
}

impl From<Option<String>> for Answer {
    fn from(v: Option<String>) -> Self {
        v.map_or(Answer::ParseFailure, Answer::Label)
    }
}

impl From<Answer> for Option<String> {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Label(l) => Some(l),
            Answer::ParseFailure => None,
        }
    }
}

/// A perspective paired with the confidence the model stated for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedPerspective {
    pub kind: PerspectiveKind,
    pub confidence: f64,
}

impl RankedPerspective {
    pub fn new(kind: PerspectiveKind, confidence: f64) -> Self {
        RankedPerspective { kind, confidence }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedResponse {
    pub rankings: Vec<RankedPerspective>,
    pub answer: Answer,
    pub reasoning_text: String,
    /// Perspective named on the reasoning header line, if any.
    pub stated_perspective: Option<PerspectiveKind>,
    pub response_length: u64,
}

/// Mapping for confidences given as words instead of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceScale {
    qualitative: Vec<(String, f64)>,
}

impl Default for ConfidenceScale {
    fn default() -> Self {
        ConfidenceScale::new([("high", 0.9), ("medium", 0.7), ("low", 0.5)])
    }
}

impl ConfidenceScale {
    pub fn new<I, S>(levels: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut qualitative: Vec<(String, f64)> = levels
            .into_iter()
            .map(|(w, v)| (w.into().to_lowercase(), v))
            .collect();
        // longest first so "very high" wins over "high"
        qualitative.sort_by_key(|q| std::cmp::Reverse(q.0.len()));
        ConfidenceScale { qualitative }
    }
}

pub fn parse_perspective_rankings(text: &str) -> Vec<RankedPerspective> {
    parse_perspective_rankings_with(text, &ConfidenceScale::default())
}

/// Ranking lines pair a perspective name with a confidence, e.g.
/// `Third-person Perspective, 85%`, `- Role: 0.7`, `Direct (confidence: 60)`
/// or `Role: high`. A bare name line followed by `Confidence: 70%` also
/// counts. Listed order is preserved and repeated kinds keep the first entry.
pub fn parse_perspective_rankings_with(text: &str, scale: &ConfidenceScale) -> Vec<RankedPerspective> {
    let region = ranking_region(text);
    let lines: Vec<String> = region.lines().map(strip_decorations).collect();
    let mut out: Vec<RankedPerspective> = Vec::new();
    let push = |kind: PerspectiveKind, confidence: f64, out: &mut Vec<RankedPerspective>| {
        if !out.iter().any(|r| r.kind == kind) {
            out.push(RankedPerspective { kind, confidence });
        }
    };

    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].to_lowercase();
        i += 1;
        let Some((kind, rest)) = leading_perspective(&line) else {
            if let Some(name) = unknown_perspective_line(&line, scale) {
                log::warn!("dropping ranking line for unknown perspective `{name}`");
            }
            continue;
        };
        match ranking_value(rest, scale) {
            Some(conf) => push(kind, conf, &mut out),
            None if rest.trim_matches(|c: char| c.is_whitespace() || ":,-".contains(c)).is_empty() => {
                // name on its own line; confidence may follow on the next one
                if let Some(next) = lines[i..].iter().find(|l| !l.trim().is_empty()) {
                    let next = next.to_lowercase();
                    if let Some(after) = next.trim_start().strip_prefix("confidence") {
                        if let Some(conf) = ranking_value(after, scale) {
                            push(kind, conf, &mut out);
                            i += 1;
                        }
                    }
                }
            }
            None => {}
        }
    }
    out
}

/// Section of the text that may hold ranking lines: everything before the
/// reasoning header when one is present.
fn ranking_region(text: &str) -> &str {
    let lower = text.to_lowercase();
    match lower.find("selected perspective") {
        Some(pos) => {
            let line_start = lower[..pos].rfind('\n').map_or(0, |p| p + 1);
            &text[..line_start]
        }
        None => text,
    }
}

fn strip_decorations(line: &str) -> String {
    let cleaned: String = line.replace("**", "").replace("__", "").replace('`', "");
    let mut s = cleaned.trim();
    loop {
        let before = s;
        s = s.trim_start_matches(|c: char| "-*•>#|+".contains(c) || c.is_whitespace());
        if let Some(m) = numbering_re().find(s) {
            s = &s[m.end()..];
        }
        if s == before {
            break;
        }
    }
    s.to_string()
}

fn numbering_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\(?\d{1,2}[.)]\s+").unwrap())
}

fn leading_perspective(line: &str) -> Option<(PerspectiveKind, &str)> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^(third[\s-]*person|third|role|direct)\b(?:[\s-]*perspective\b)?").unwrap()
    });
    let m = re.captures(line)?;
    let name = m.get(1)?.as_str();
    let kind = if name.starts_with("third") {
        PerspectiveKind::ThirdPerson
    } else if name == "role" {
        PerspectiveKind::Role
    } else {
        PerspectiveKind::Direct
    };
    Some((kind, &line[m.get(0)?.end()..]))
}

fn unknown_perspective_line(line: &str, scale: &ConfidenceScale) -> Option<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^([a-z][a-z -]{0,40}?)\s+perspective\b(.*)$").unwrap());
    let caps = re.captures(line)?;
    ranking_value(caps.get(2)?.as_str(), scale)?;
    Some(caps.get(1)?.as_str().to_string())
}

/// Confidence following a perspective name: separators, an optional
/// parenthetical, an optional "confidence" keyword, then a value.
fn ranking_value(rest: &str, scale: &ConfidenceScale) -> Option<f64> {
    let mut s = rest.trim_start();
    if s.starts_with('(') {
        let (inner, after) = split_parenthetical(s)?;
        let inner_body = skip_confidence_keyword(inner.trim());
        if let Some(v) = leading_value(inner_body, scale) {
            return Some(v);
        }
        s = after;
    }
    s = s.trim_start_matches(|c: char| c.is_whitespace() || ",:;-\u{2013}\u{2014}=|".contains(c));
    s = skip_confidence_keyword(s);
    if let Some(paren) = s.strip_prefix('(') {
        s = paren;
    }
    leading_value(s, scale)
}

fn split_parenthetical(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&s[1..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

fn skip_confidence_keyword(s: &str) -> &str {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"^confidence(?:\s+(?:level|score))?\s*(?:[:=]|\bof\b|\bis\b)?\s*").unwrap()
    });
    match re.find(s) {
        Some(m) => &s[m.end()..],
        None => s,
    }
}

fn leading_value(s: &str, scale: &ConfidenceScale) -> Option<f64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"^(\d+(?:\.\d+)?|\.\d+)\s*(%)?").unwrap());
    let s = s.trim_start();
    if let Some(caps) = re.captures(s) {
        let end = caps.get(0)?.end();
        if s[end..].chars().next().is_some_and(|c| c.is_ascii_alphanumeric()) {
            return None;
        }
        let raw = caps.get(1)?.as_str();
        let v: f64 = raw.parse().ok()?;
        let value = if caps.get(2).is_some() || !raw.contains('.') || v > 1.0 {
            v / 100.0
        } else {
            v
        };
        return (0.0..=1.0).contains(&value).then_some(value);
    }
    scale.qualitative.iter().find_map(|(word, v)| {
        let tail = s.strip_prefix(word.as_str())?;
        let boundary = tail.chars().next().is_none_or(|c| !c.is_ascii_alphanumeric());
        boundary.then_some(*v)
    })
}

/// Case-insensitive, punctuation-insensitive match of `raw` against the
/// labels, then the aliases. An exact label match wins over an alias.
pub fn normalize_label(raw: &str, space: &LabelSpace) -> Answer {
    let norm = normalize_text(raw);
    if norm.is_empty() {
        return Answer::ParseFailure;
    }
    if let Some(l) = space.labels.iter().find(|l| normalize_text(l) == norm) {
        return Answer::Label(l.clone());
    }
    if let Some((_, l)) = space.aliases.iter().find(|(a, _)| normalize_text(a) == norm) {
        return Answer::Label(l.clone());
    }
    Answer::ParseFailure
}

/// Lowercase, replace every non-alphanumeric character by a space and
/// collapse runs of whitespace.
pub fn normalize_text(raw: &str) -> String {
    tokens_of(raw).join(" ")
}

fn tokens_of(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

struct Token {
    text: String,
    start: usize,
    end: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            start.get_or_insert(i);
        } else if let Some(s) = start.take() {
            out.push(Token { text: text[s..i].to_lowercase(), start: s, end: i });
        }
    }
    if let Some(s) = start {
        out.push(Token { text: text[s..].to_lowercase(), start: s, end: text.len() });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ScanMode {
    /// Inside the text following an answer marker.
    Span,
    /// Anywhere in the response.
    Anywhere,
}

struct LabelHit<'a> {
    first: usize,
    last: usize,
    label: &'a str,
}

/// Label occurrences in `text`, with matches nested inside a longer match
/// removed ("joke" inside "not a joke").
fn label_hits<'a>(text: &str, space: &'a LabelSpace, mode: ScanMode) -> Vec<LabelHit<'a>> {
    let tokens = tokenize(text);
    let forms = space.surface_forms();
    let mut hits: Vec<LabelHit<'a>> = Vec::new();
    for i in 0..tokens.len() {
        for (form, label) in &forms {
            let n = form.len();
            if i + n > tokens.len() || tokens[i..i + n].iter().zip(form).any(|(t, f)| &t.text != f) {
                continue;
            }
            if n == 1 && form[0].chars().count() == 1 && !single_char_ok(text, &tokens, i, mode) {
                continue;
            }
            hits.push(LabelHit { first: i, last: i + n - 1, label });
        }
    }
    let keep: Vec<bool> = hits
        .iter()
        .map(|h| {
            !hits.iter().any(|o| {
                o.first <= h.first && h.last <= o.last && (o.last - o.first) > (h.last - h.first)
            })
        })
        .collect();
    hits.into_iter().zip(keep).filter_map(|(h, k)| k.then_some(h)).collect()
}

/// Single-letter labels ("A".."D") collide with ordinary words, so they only
/// count when written as an option: `(b)`, `b)`, `option B`, or as the first
/// token right after an answer marker.
fn single_char_ok(text: &str, tokens: &[Token], i: usize, mode: ScanMode) -> bool {
    let tok = &tokens[i];
    let before = text[..tok.start].chars().next_back();
    let after = text[tok.end..].chars().next();
    if after == Some(')') || (before == Some('(') && after == Some(')')) {
        return true;
    }
    if mode == ScanMode::Span && i == 0 {
        return after.is_none_or(|c| !c.is_alphanumeric());
    }
    let upper = text[tok.start..tok.end].chars().all(|c| c.is_uppercase());
    let prev_word = i.checked_sub(1).map(|p| tokens[p].text.as_str());
    upper && matches!(prev_word, Some("option" | "choice" | "answer"))
}

fn answer_marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?i)\banswer\b[\s"'*_`]*(?:(?:[:：=\-–]|\bis\b)[\s"'*_`]*)+(?P<span>[^\n]*)"#).unwrap()
    })
}

fn label_in_span(span: &str, space: &LabelSpace) -> Option<String> {
    if let Answer::Label(l) = normalize_label(span, space) {
        return Some(l);
    }
    label_hits(span, space, ScanMode::Span)
        .into_iter()
        .min_by_key(|h| h.first)
        .map(|h| h.label.to_string())
}

/// Final answer of a response: the text after the last "Answer:"-style
/// marker that names a label, otherwise the last label mentioned anywhere.
pub fn parse_final_answer(text: &str, space: &LabelSpace) -> Answer {
    let spans: Vec<&str> = answer_marker_re()
        .captures_iter(text)
        .filter_map(|c| c.name("span").map(|m| m.as_str()))
        .collect();
    for span in spans.iter().rev() {
        if let Some(label) = label_in_span(span, space) {
            return Answer::Label(label);
        }
    }
    label_hits(text, space, ScanMode::Anywhere)
        .into_iter()
        .max_by_key(|h| h.first)
        .map_or(Answer::ParseFailure, |h| Answer::Label(h.label.to_string()))
}

/// Response length in cost units: the provider's completion-token count when
/// reported, otherwise the whitespace-delimited word count.
pub fn measure_response_length(text: &str, reported_completion_tokens: Option<u64>) -> u64 {
    reported_completion_tokens.unwrap_or_else(|| text.split_whitespace().count() as u64)
}

/// Reasoning section and the perspective named on its header line.
fn reasoning_section(text: &str) -> (String, Option<PerspectiveKind>) {
    let lower = text.to_lowercase();
    let Some(pos) = lower.find("selected perspective") else {
        return (text.trim().to_string(), None);
    };
    let line_end = text[pos..].find('\n').map_or(text.len(), |e| pos + e);
    let header = &lower[pos + "selected perspective".len()..line_end];
    let stated = header_perspective(header);
    (text[line_end..].trim().to_string(), stated)
}

fn header_perspective(header: &str) -> Option<PerspectiveKind> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"\b(third[\s-]*person|third|role|direct)\b").unwrap());
    let name = re.captures(header)?.get(1)?.as_str().to_string();
    name.parse().ok()
}

/// Full parse of one response.
pub fn parse_response(text: &str, space: &LabelSpace, reported_completion_tokens: Option<u64>) -> ParsedResponse {
    let (reasoning_text, stated_perspective) = reasoning_section(text);
    ParsedResponse {
        rankings: parse_perspective_rankings(text),
        answer: parse_final_answer(text, space),
        reasoning_text,
        stated_perspective,
        response_length: measure_response_length(text, reported_completion_tokens),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use PerspectiveKind::*;

    fn binary() -> LabelSpace {
        LabelSpace::plain(["True", "False"]).unwrap()
    }

    fn stance() -> LabelSpace {
        LabelSpace::plain(["FAVOR", "AGAINST", "NONE"]).unwrap()
    }

    fn humor() -> LabelSpace {
        let aliases = [("not a joke", "Not"), ("a joke", "Joke")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        LabelSpace::new(["Joke", "Not"], aliases).unwrap()
    }

    const WORKED: &str = include_str!("../fixtures/worked_example/response.txt");

    #[test]
    fn worked_example_rankings() {
        let r = parse_perspective_rankings(WORKED);
        assert_eq!(
            r,
            vec![
                RankedPerspective::new(ThirdPerson, 0.85),
                RankedPerspective::new(Role, 0.70),
                RankedPerspective::new(Direct, 0.60),
            ]
        );
    }

    #[test]
    fn decimal_single_entry() {
        assert_eq!(parse_perspective_rankings("Direct Perspective, 1.0"), vec![RankedPerspective::new(Direct, 1.0)]);
    }

    #[test]
    fn qualitative_levels() {
        assert_eq!(
            parse_perspective_rankings("Role: high\nDirect: low"),
            vec![RankedPerspective::new(Role, 0.9), RankedPerspective::new(Direct, 0.5)]
        );
    }

    #[test]
    fn integer_and_parenthetical_forms() {
        let text = "1. Role Perspective (confidence: 70%)\n2) Direct perspective - 55\n| Third-person | 90% |";
        assert_eq!(
            parse_perspective_rankings(text),
            vec![
                RankedPerspective::new(Role, 0.70),
                RankedPerspective::new(Direct, 0.55),
                RankedPerspective::new(ThirdPerson, 0.90),
            ]
        );
    }

    #[test]
    fn duplicate_keeps_first_and_unknown_dropped() {
        let text = "Role Perspective, 70%\nEmotional Perspective, 99%\nRole Perspective, 20%";
        assert_eq!(parse_perspective_rankings(text), vec![RankedPerspective::new(Role, 0.70)]);
    }

    #[test]
    fn instruction_echo_is_not_a_ranking() {
        let text = "Direct Perspective (answer the question directly).\n\
                    Role Perspective (assume you are some roles (e.g., expert) and answer the question).";
        assert!(parse_perspective_rankings(text).is_empty());
    }

    #[test]
    fn name_then_confidence_line() {
        let text = "Direct Perspective\nConfidence: 60%\nRole Perspective\nConfidence: 55%";
        assert_eq!(
            parse_perspective_rankings(text),
            vec![RankedPerspective::new(Direct, 0.60), RankedPerspective::new(Role, 0.55)]
        );
    }

    #[test]
    fn out_of_range_values_rejected() {
        assert!(parse_perspective_rankings("Role Perspective, 140%").is_empty());
        assert!(parse_perspective_rankings("Role Perspective, 250").is_empty());
    }

    #[test]
    fn reasoning_lines_after_header_are_ignored() {
        let text = "Role Perspective, 70%\n\nSelected Perspective Reasoning:\nDirect: 90%";
        assert_eq!(parse_perspective_rankings(text), vec![RankedPerspective::new(Role, 0.7)]);
    }

    #[test]
    fn no_rankings_gives_empty() {
        assert!(parse_perspective_rankings("I cannot decide.").is_empty());
    }

    #[test]
    fn worked_example_answer() {
        assert_eq!(parse_final_answer(WORKED, &binary()), Answer::Label("False".into()));
    }

    #[test]
    fn answer_is_phrase() {
        assert_eq!(parse_final_answer("The answer is FAVOR.", &stance()), Answer::Label("FAVOR".into()));
    }

    #[test]
    fn no_label_is_failure() {
        assert_eq!(parse_final_answer("I cannot decide.", &binary()), Answer::ParseFailure);
    }

    #[test]
    fn last_marker_wins() {
        let text = "Answer: True\nOn reflection the first reading fails.\nAnswer: False";
        assert_eq!(parse_final_answer(text, &binary()), Answer::Label("False".into()));
    }

    #[test]
    fn marker_without_label_falls_back() {
        let text = "Let me answer: carefully now.\nIt is false.";
        assert_eq!(parse_final_answer(text, &binary()), Answer::Label("False".into()));
    }

    #[test]
    fn nested_alias_prefers_longest() {
        assert_eq!(parse_final_answer("This is not a joke", &humor()), Answer::Label("Not".into()));
        assert_eq!(parse_final_answer("Answer: a joke", &humor()), Answer::Label("Joke".into()));
    }

    #[test]
    fn single_letters_need_option_form() {
        let space = LabelSpace::plain(["A", "B", "C", "D"]).unwrap();
        assert_eq!(parse_final_answer("A reading of the text.", &space), Answer::ParseFailure);
        assert_eq!(parse_final_answer("I pick option (c) here", &space), Answer::Label("C".into()));
        assert_eq!(parse_final_answer("Answer: b.", &space), Answer::Label("B".into()));
        assert_eq!(parse_final_answer("Answer: D because it is kind", &space), Answer::Label("D".into()));
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_label("true.", &binary()), Answer::Label("True".into()));
        assert_eq!(normalize_label("Favor", &stance()), Answer::Label("FAVOR".into()));
        assert_eq!(normalize_label("not a joke", &humor()), Answer::Label("Not".into()));
        assert_eq!(normalize_label("maybe", &binary()), Answer::ParseFailure);
        assert_eq!(normalize_label("", &binary()), Answer::ParseFailure);
    }

    #[test]
    fn exact_label_beats_alias() {
        let aliases = [("true".to_string(), "False".to_string())].into_iter().collect();
        let space = LabelSpace::new(["True", "False"], aliases).unwrap();
        assert_eq!(normalize_label("TRUE", &space), Answer::Label("True".into()));
    }

    #[test]
    fn label_space_validation() {
        assert_eq!(LabelSpace::plain(Vec::<String>::new()), Err(LabelSpaceError::Empty));
        let aliases = [("x".to_string(), "Maybe".to_string())].into_iter().collect();
        assert!(matches!(
            LabelSpace::new(["True", "False"], aliases),
            Err(LabelSpaceError::DanglingAlias { .. })
        ));
        assert!(matches!(LabelSpace::plain(["True", "true."]), Err(LabelSpaceError::Collision(..))));
    }

    #[test]
    fn response_length() {
        assert_eq!(measure_response_length("a b c", None), 3);
        assert_eq!(measure_response_length("anything at all", Some(120)), 120);
        let expected: u64 = include_str!("../fixtures/worked_example/word_count.txt").trim().parse().unwrap();
        assert_eq!(measure_response_length(WORKED, None), expected);
    }

    #[test]
    fn parse_response_splits_reasoning() {
        let parsed = parse_response(WORKED, &binary(), None);
        assert!(parsed.reasoning_text.starts_with("Tom: Adam did not understand"));
        assert!(parsed.reasoning_text.ends_with("Answer: False"));
        assert_eq!(parsed.stated_perspective, None);
        let with_header = "Role Perspective, 80%\nSelected Perspective Reasoning (Role Perspective):\nAs an editor...\nAnswer: True";
        assert_eq!(parse_response(with_header, &binary(), None).stated_perspective, Some(Role));
    }

    #[test]
    fn answer_serializes_as_nullable_label() {
        assert_eq!(serde_json::to_string(&Answer::Label("True".into())).unwrap(), "\"True\"");
        assert_eq!(serde_json::to_string(&Answer::ParseFailure).unwrap(), "null");
    }
}
