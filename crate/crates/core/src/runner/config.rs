use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::backend::ModelConfig;
use crate::datasets::Split;
use crate::perspective::{all_perspectives, PerspectiveSet};
use crate::prompt_forge::Method;
use crate::selector::SelectionPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Highest,
    Second,
    Lowest,
    Random,
}

impl std::str::FromStr for PolicyName {
    type Err = RunnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "highest" => Ok(PolicyName::Highest),
            "second" => Ok(PolicyName::Second),
            "lowest" => Ok(PolicyName::Lowest),
            "random" => Ok(PolicyName::Random),
            other => Err(RunnerError::Config(format!("unknown policy `{other}` (expected highest, second, lowest or random)"))),
        }
    }
}

/// Everything that determines an experiment's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<String>,
    pub methods: Vec<Method>,
    pub shots: usize,
    pub policy: PolicyName,
    /// Perspectives offered to the perspective methods. Empty means plain
    /// reasoning without perspective instructions.
    pub enabled: PerspectiveSet,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Self-consistency chains per question.
    pub sc_samples: u32,
    pub sc_temperature: f64,
    pub concurrency_limit: usize,
    /// Dataset manifest; relative dataset paths resolve against its folder.
    pub registry: Option<PathBuf>,
    pub templates_dir: Option<PathBuf>,
    pub annotated_demos: bool,
    /// Evaluate only the first `limit` instances of each dataset.
    pub limit: Option<usize>,
    pub split: Split,
    pub model: ModelConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: Vec::new(),
            methods: vec![Method::Rpt],
            shots: 0,
            policy: PolicyName::Highest,
            enabled: all_perspectives(),
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
            sc_samples: 3,
            sc_temperature: 0.7,
            concurrency_limit: 4,
            registry: None,
            templates_dir: None,
            annotated_demos: false,
            limit: None,
            split: Split::Test,
            model: ModelConfig::default(),
        }
    }
}

/// Keys ignored when comparing a run's snapshot with a supplied config.
const UNCOMPARED: &[&str] = &["output_dir", "concurrency_limit"];

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RunnerError> {
        toml::from_str(text).map_err(|e| RunnerError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, RunnerError> {
        toml::to_string(self).map_err(|e| RunnerError::Config(e.to_string()))
    }

    pub fn selection_policy(&self) -> SelectionPolicy {
        match self.policy {
            PolicyName::Highest => SelectionPolicy::Highest,
            PolicyName::Second => SelectionPolicy::Second,
            PolicyName::Lowest => SelectionPolicy::Lowest,
            PolicyName::Random => SelectionPolicy::Random { seed: self.seed },
        }
    }

    /// Checks that do not need the datasets.
    pub fn validate(&self) -> Result<(), RunnerError> {
        let fail = |m: String| Err(RunnerError::Config(m));
        if self.datasets.is_empty() {
            return fail("no datasets selected".into());
        }
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        if self.sc_samples == 0 {
            return fail("sc_samples must be at least 1".into());
        }
        if !(self.sc_temperature.is_finite() && self.sc_temperature >= 0.0) {
            return fail("sc_temperature must be >= 0".into());
        }
        if self.concurrency_limit == 0 {
            return fail("concurrency_limit must be at least 1".into());
        }
        if self.enabled.is_empty() {
            if let Some(m) = self.methods.iter().find(|m| matches!(m, Method::Ensemble | Method::Reranking)) {
                return fail(format!("{m} needs at least one enabled perspective"));
            }
        }
        if self.shots > 0 {
            if let Some(m) = self.methods.iter().find(|m| m.zero_shot_only()) {
                return fail(format!("{m} is zero-shot only; remove it or set shots = 0"));
            }
        }
        self.model.validate().map_err(|e| RunnerError::Config(e.to_string()))
    }

    /// Differences between two configs, ignoring output location and
    /// concurrency. Empty when they describe the same experiment.
    pub fn diff(&self, other: &ExperimentConfig) -> Vec<String> {
        let flat = |c: &ExperimentConfig| {
            let mut out = Vec::new();
            let value = toml::Value::try_from(c).expect("config serializes");
            flatten("", &value, &mut out);
            out.retain(|(k, _)| !UNCOMPARED.contains(&k.as_str()));
            out
        };
        let (a, b) = (flat(self), flat(other));
        let mut keys: Vec<&String> = a.iter().chain(&b).map(|(k, _)| k).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter_map(|k| {
                let get = |v: &[(String, String)]| v.iter().find(|(x, _)| x == k).map(|(_, s)| s.clone());
                let (x, y) = (get(&a), get(&b));
                (x != y).then(|| {
                    format!("{k}: {} -> {}", x.unwrap_or_else(|| "(unset)".into()), y.unwrap_or_else(|| "(unset)".into()))
                })
            })
            .collect()
    }
}

fn flatten(prefix: &str, value: &toml::Value, out: &mut Vec<(String, String)>) {
    match value {
        toml::Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig { datasets: vec!["Metaphor".into()], ..ExperimentConfig::default() }
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig { methods: vec![Method::Rpt, Method::CotSc], limit: Some(5), ..base() };
        let text = c.to_toml_string().unwrap();
        assert!(text.contains("methods = [\"rpt\", \"cot-sc\"]"));
        assert!(text.contains("enabled = [\"direct\", \"role\", \"third\"]"));
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn diff_ignores_location() {
        let a = base();
        let b = ExperimentConfig { output_dir: "elsewhere".into(), concurrency_limit: 9, ..base() };
        assert!(a.diff(&b).is_empty());
        let mut c = base();
        c.model.temperature = 0.5;
        assert_eq!(a.diff(&c), vec!["model.temperature: 0.0 -> 0.5".to_string()]);
    }

    #[test]
    fn validation() {
        base().validate().unwrap();
        assert!(ExperimentConfig { sc_samples: 0, ..base() }.validate().is_err());
        assert!(ExperimentConfig { shots: 2, methods: vec![Method::ZeroShotCot], ..base() }.validate().is_err());
        assert!(ExperimentConfig { enabled: PerspectiveSet::new(), methods: vec![Method::Ensemble], ..base() }
            .validate()
            .is_err());
        ExperimentConfig { enabled: PerspectiveSet::new(), methods: vec![Method::Rpt], ..base() }.validate().unwrap();
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml_str("datasets = [\"x\"]\nshotz = 3\n").is_err());
    }
}
