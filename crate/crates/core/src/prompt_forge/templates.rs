use std::collections::BTreeMap;
use std::path::Path;

use super::ForgeError;

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../templates/", $name, ".txt")))),*]
    };
}

const BUILTIN: &[(&str, &str)] = builtin![
    "instructions_header",
    "instruction_direct",
    "instruction_role",
    "instruction_third",
    "trigger_explore",
    "trigger_rank",
    "selection_highest",
    "selection_forced",
    "rpt_unified",
    "rpt_stage1",
    "rpt_stage2",
    "rpt_stage3",
    "rpt_simple",
    "direct",
    "icl",
    "few_shot_cot",
    "zero_shot_cot",
    "cot_sc",
    "self_ask",
    "expert_prompt",
    "role_play",
    "spp",
    "ric",
    "perspective_member",
    "rerank_judge",
    "candidate",
    "demonstration",
    "answer_binary",
    "answer_3class",
    "answer_4class",
    "answer_free",
];

/// Named template texts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    texts: BTreeMap<&'static str, String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        let texts = BUILTIN.iter().map(|(n, t)| (*n, trim_one_newline(t).to_string())).collect();
        TemplateSet { texts }
    }

    /// Built-in templates with any `<name>.txt` found in `dir` taking
    /// precedence.
    pub fn with_overrides(dir: &Path) -> Result<Self, ForgeError> {
        if !dir.is_dir() {
            return Err(ForgeError::Io(format!("{} is not a directory", dir.display())));
        }
        let mut set = Self::builtin();
        for (name, text) in set.texts.iter_mut() {
            let path = dir.join(format!("{name}.txt"));
            if path.is_file() {
                let raw = std::fs::read_to_string(&path)
                    .map_err(|e| ForgeError::Io(format!("{}: {e}", path.display())))?;
                *text = trim_one_newline(&raw).to_string();
                log::debug!("template `{name}` overridden from {}", path.display());
            }
        }
        Ok(set)
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        BUILTIN.iter().map(|(n, _)| *n)
    }

    pub fn get(&self, name: &str) -> Result<&str, ForgeError> {
        self.texts
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| ForgeError::Template(format!("no template named `{name}`")))
    }

    pub fn render(&self, name: &str, slots: &[(&str, &str)]) -> Result<String, ForgeError> {
        Ok(render(self.get(name)?, slots))
    }
}

fn trim_one_newline(s: &str) -> &str {
    s.strip_suffix("\r\n").or_else(|| s.strip_suffix('\n')).unwrap_or(s)
}

/// Single-pass substitution of `{slot}` markers. Substituted text is not
/// rescanned; unknown markers stay literal.
pub fn render(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            slots.iter().find(|(n, _)| *n == name).map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}
