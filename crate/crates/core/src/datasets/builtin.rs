use std::collections::BTreeMap;

use super::MetricKind;
use crate::response_parser::LabelSpace;

/// Registered defaults for one of the evaluation tasks.
#[derive(Debug, Clone)]
pub struct BuiltinTask {
    pub name: &'static str,
    pub description: &'static str,
    pub labels: &'static [&'static str],
    pub aliases: &'static [(&'static str, &'static str)],
    pub metric: fn() -> MetricKind,
}

impl BuiltinTask {
    pub fn label_space(&self) -> LabelSpace {
        let aliases: BTreeMap<String, String> =
            self.aliases.iter().map(|(a, l)| (a.to_string(), l.to_string())).collect();
        LabelSpace::new(self.labels.iter().copied(), aliases).expect("built-in label spaces are valid")
    }
}

const NLI: &[&str] = &["Entailment", "Contradiction", "Neutral"];

fn accuracy() -> MetricKind {
    MetricKind::Accuracy
}

fn macro_all() -> MetricKind {
    MetricKind::MacroF1All
}

fn stance_subset() -> MetricKind {
    MetricKind::MacroF1Subset { classes: vec!["FAVOR".into(), "AGAINST".into()] }
}

pub const BUILTIN_TASKS: &[BuiltinTask] = &[
    BuiltinTask {
        name: "Metaphor",
        description: "Metaphor Recognition",
        labels: &["True", "False"],
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "SNARKS",
        description: "Sarcasm Detection",
        labels: &["A", "B"],
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "Humor",
        description: "Dark Humor Detection",
        labels: &["Joke", "Not"],
        aliases: &[("a joke", "Joke"), ("not a joke", "Not"), ("not joke", "Not")],
        metric: accuracy,
    },
    BuiltinTask {
        name: "Pronoun",
        description: "Pronoun Resolution",
        labels: &["A", "B", "C"],
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "Anachronisms",
        description: "Identifying Anachronisms",
        labels: &["Yes", "No"],
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "SEQ",
        description: "Simple Ethical Questions",
        labels: &["A", "B", "C", "D"],
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "SemEval",
        description: "Opinion Analysis",
        labels: &["FAVOR", "AGAINST", "NONE"],
        aliases: &[("favour", "FAVOR"), ("in favor", "FAVOR"), ("in favour", "FAVOR"), ("neutral", "NONE")],
        metric: stance_subset,
    },
    BuiltinTask {
        name: "SocNorm",
        description: "Sociocultural Norm NLI",
        labels: NLI,
        aliases: &[],
        metric: macro_all,
    },
    BuiltinTask {
        name: "e-SocNorm",
        description: "Sociocultural Norm NLI",
        labels: NLI,
        aliases: &[],
        metric: macro_all,
    },
    BuiltinTask {
        name: "CALI",
        description: "Culturally Aware NLI",
        labels: NLI,
        aliases: &[],
        metric: accuracy,
    },
    BuiltinTask {
        name: "Entailment",
        description: "Analytic Entailment",
        labels: &["Entailment", "No entailment"],
        aliases: &[("no-entailment", "No entailment"), ("not entailment", "No entailment")],
        metric: accuracy,
    },
    BuiltinTask {
        name: "IPA",
        description: "NLI in the International Phonetic Alphabet",
        labels: NLI,
        aliases: &[],
        metric: accuracy,
    },
];

/// Case-insensitive lookup by task name.
pub fn builtin(name: &str) -> Option<&'static BuiltinTask> {
    BUILTIN_TASKS.iter().find(|t| t.name.eq_ignore_ascii_case(name))
}
