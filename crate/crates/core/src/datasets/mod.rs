//! Task files, label spaces, metrics and demonstration sampling.

mod builtin;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::prompt_forge::Demonstration;
use crate::response_parser::{normalize_label, Answer, LabelSpace, LabelSpaceError};
use crate::seeding::keyed_rng;

pub use builtin::{builtin, BuiltinTask, BUILTIN_TASKS};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: record {record}: missing field `{field}`")]
    MissingField { path: String, record: usize, field: &'static str },
    #[error("{path}: record {record}: {message}")]
    Malformed { path: String, record: usize, message: String },
    #[error("{path}: duplicate id `{id}`")]
    DuplicateId { path: String, id: String },
    #[error("{path}: task has no instances")]
    EmptyTask { path: String },
    #[error("{path}: instance `{id}` has target `{target}` outside the label space {labels:?}")]
    LabelOutsideSpace { path: String, id: String, target: String, labels: Vec<String> },
    #[error("dataset `{0}` is not registered")]
    Unregistered(String),
    #[error("label space: {0}")]
    LabelSpace(#[from] LabelSpaceError),
    #[error("asked for {requested} demonstrations but the train split has {available}")]
    NotEnoughTraining { requested: usize, available: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetFormat {
    BigbenchJson,
    Jsonl,
    Tsv,
}

impl FromStr for DatasetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bigbench-json" => Ok(DatasetFormat::BigbenchJson),
            "jsonl" => Ok(DatasetFormat::Jsonl),
            "tsv" => Ok(DatasetFormat::Tsv),
            other => Err(format!("unknown dataset format `{other}` (expected bigbench-json, jsonl or tsv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "validation" | "val" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Accuracy,
    MacroF1All,
    MacroF1Subset { classes: Vec<String> },
}

impl MetricKind {
    pub fn short_name(&self) -> &'static str {
        match self {
            MetricKind::Accuracy => "Acc.",
            MetricKind::MacroF1All | MetricKind::MacroF1Subset { .. } => "F1",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Accuracy => f.write_str("accuracy"),
            MetricKind::MacroF1All => f.write_str("macro-f1-all"),
            MetricKind::MacroF1Subset { classes } => write!(f, "macro-f1-subset[{}]", classes.join("|")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    pub input: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    pub split: Split,
    /// Worked reasoning, used by chain-of-thought demonstrations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
}

impl TaskInstance {
    pub fn to_demonstration(&self) -> Demonstration {
        Demonstration { question: self.input.clone(), answer: self.target.clone(), reasoning: self.reasoning.clone() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    pub description: String,
    pub label_space: LabelSpace,
    pub metric: MetricKind,
    pub splits: SplitCounts,
}

/// A loaded task: its specification and instances in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub spec: TaskSpec,
    pub instances: Vec<TaskInstance>,
}

impl Task {
    pub fn split(&self, split: Split) -> Vec<&TaskInstance> {
        self.instances.iter().filter(|i| i.split == split).collect()
    }

    pub fn train(&self) -> Vec<TaskInstance> {
        self.split(Split::Train).into_iter().cloned().collect()
    }

    pub fn has_train(&self) -> bool {
        self.spec.splits.train > 0
    }

    /// Dev instances; a task without a dev split gets a seeded 10% carve-out
    /// of train instead.
    pub fn dev_or_carve_out(&self, seed: u64) -> Vec<TaskInstance> {
        if self.spec.splits.dev > 0 {
            return self.split(Split::Dev).into_iter().cloned().collect();
        }
        carve_out(&self.train(), seed, &self.spec.name, 0.1).0
    }
}

/// Overrides for a task's specification; unset fields fall back to the
/// built-in table and then to the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskOverrides {
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub aliases: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub metric: Option<MetricKind>,
}

/// Label space of a loaded task.
pub fn label_space(spec: &TaskSpec) -> &LabelSpace {
    &spec.label_space
}

/// Label space registered for a task name.
pub fn registered_label_space(name: &str) -> Result<LabelSpace, DatasetError> {
    builtin(name).map(BuiltinTask::label_space).ok_or_else(|| DatasetError::Unregistered(name.to_string()))
}

struct RawInstance {
    id: Option<String>,
    input: String,
    target: String,
    choices: Option<Vec<String>>,
    split: Split,
    reasoning: Option<String>,
}

struct RawTask {
    name: Option<String>,
    description: Option<String>,
    label_order: Vec<String>,
    instances: Vec<RawInstance>,
}

/// Loads a task file. `name` defaults to the file's own name field, then to
/// the file stem.
pub fn load_task(
    path: &Path,
    format: DatasetFormat,
    name: Option<&str>,
    overrides: &TaskOverrides,
) -> Result<Task, DatasetError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io { path: shown.clone(), message: e.to_string() })?;
    let raw = match format {
        DatasetFormat::BigbenchJson => parse_bigbench(&text, &shown)?,
        DatasetFormat::Jsonl => parse_jsonl(&text, &shown)?,
        DatasetFormat::Tsv => parse_tsv(&text, &shown)?,
    };
    let name = name
        .map(str::to_string)
        .or(raw.name.clone())
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    assemble(raw, name, overrides, &shown)
}

fn assemble(raw: RawTask, name: String, overrides: &TaskOverrides, path: &str) -> Result<Task, DatasetError> {
    if raw.instances.is_empty() {
        return Err(DatasetError::EmptyTask { path: path.to_string() });
    }
    let known = builtin(&name);
    let label_space = match (&overrides.labels, known) {
        (Some(labels), _) => LabelSpace::new(labels.clone(), overrides.aliases.clone().unwrap_or_default())?,
        (None, Some(b)) => match &overrides.aliases {
            Some(extra) => {
                let mut aliases = b.label_space().aliases().clone();
                aliases.extend(extra.clone());
                LabelSpace::new(b.labels.iter().copied(), aliases)?
            }
            None => b.label_space(),
        },
        (None, None) => {
            let mut order = raw.label_order.clone();
            for inst in &raw.instances {
                if !order.contains(&inst.target) {
                    order.push(inst.target.clone());
                }
            }
            LabelSpace::new(order, overrides.aliases.clone().unwrap_or_default())?
        }
    };
    let description = overrides
        .description
        .clone()
        .or_else(|| known.map(|b| b.description.to_string()))
        .or(raw.description)
        .unwrap_or_else(|| name.clone());
    let metric = overrides.metric.clone().or_else(|| known.map(|b| (b.metric)())).unwrap_or(MetricKind::Accuracy);

    let mut seen = HashSet::new();
    let mut instances = Vec::with_capacity(raw.instances.len());
    let mut splits = SplitCounts::default();
    for (index, r) in raw.instances.into_iter().enumerate() {
        let id = r.id.unwrap_or_else(|| format!("{name}-{index}"));
        if !seen.insert(id.clone()) {
            return Err(DatasetError::DuplicateId { path: path.to_string(), id });
        }
        let outside = |target: &str| DatasetError::LabelOutsideSpace {
            path: path.to_string(),
            id: id.clone(),
            target: target.to_string(),
            labels: label_space.labels().to_vec(),
        };
        let target = match normalize_label(&r.target, &label_space) {
            Answer::Label(l) => l,
            Answer::ParseFailure => return Err(outside(&r.target)),
        };
        if let Some(choices) = &r.choices {
            if !choices.iter().any(|c| normalize_label(c, &label_space) == Answer::Label(target.clone())) {
                return Err(outside(&r.target));
            }
        }
        match r.split {
            Split::Train => splits.train += 1,
            Split::Dev => splits.dev += 1,
            Split::Test => splits.test += 1,
        }
        instances.push(TaskInstance {
            id,
            input: normalize_whitespace(&r.input),
            target,
            choices: r.choices,
            split: r.split,
            reasoning: r.reasoning.map(|s| normalize_whitespace(&s)),
        });
    }
    Ok(Task { spec: TaskSpec { name, description, label_space, metric, splits }, instances })
}

/// Trims each line and the whole text; line structure is kept.
fn normalize_whitespace(s: &str) -> String {
    s.lines().map(str::trim).collect::<Vec<_>>().join("\n").trim().to_string()
}

fn parse_bigbench(text: &str, path: &str) -> Result<RawTask, DatasetError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| DatasetError::Malformed { path: path.into(), record: 0, message: e.to_string() })?;
    let examples = root
        .get("examples")
        .and_then(Value::as_array)
        .ok_or(DatasetError::MissingField { path: path.into(), record: 0, field: "examples" })?;
    let mut label_order: Vec<String> = Vec::new();
    let mut instances = Vec::with_capacity(examples.len());
    for (i, ex) in examples.iter().enumerate() {
        let input = ex
            .get("input")
            .and_then(Value::as_str)
            .ok_or(DatasetError::MissingField { path: path.into(), record: i, field: "input" })?;
        let target = match ex.get("target_scores").and_then(Value::as_object) {
            Some(scores) => {
                let mut best: Option<(&String, f64)> = None;
                for (label, score) in scores {
                    if !label_order.contains(label) {
                        label_order.push(label.clone());
                    }
                    let s = score.as_f64().ok_or_else(|| DatasetError::Malformed {
                        path: path.into(),
                        record: i,
                        message: format!("score for `{label}` is not a number"),
                    })?;
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((label, s));
                    }
                }
                best.map(|(l, _)| l.clone())
            }
            None => ex.get("target").and_then(|t| match t {
                Value::String(s) => Some(s.clone()),
                Value::Array(a) => a.first().and_then(Value::as_str).map(str::to_string),
                _ => None,
            }),
        }
        .ok_or(DatasetError::MissingField { path: path.into(), record: i, field: "target_scores" })?;
        let split = match ex.get("split").and_then(Value::as_str) {
            Some(s) => s.parse().map_err(|m| DatasetError::Malformed { path: path.into(), record: i, message: m })?,
            None => Split::Test,
        };
        instances.push(RawInstance {
            id: ex.get("id").and_then(Value::as_str).map(str::to_string),
            input: input.to_string(),
            target,
            choices: None,
            split,
            reasoning: ex.get("reasoning").and_then(Value::as_str).map(str::to_string),
        });
    }
    Ok(RawTask {
        name: root.get("name").and_then(Value::as_str).map(str::to_string),
        description: root.get("description").and_then(Value::as_str).map(str::to_string),
        label_order,
        instances,
    })
}

#[derive(Deserialize)]
struct JsonlRecord {
    #[serde(default)]
    id: Option<Value>,
    input: Option<String>,
    target: Option<String>,
    #[serde(default)]
    choices: Option<Vec<String>>,
    #[serde(default)]
    split: Option<String>,
    #[serde(default)]
    reasoning: Option<String>,
}

fn parse_jsonl(text: &str, path: &str) -> Result<RawTask, DatasetError> {
    let mut instances = Vec::new();
    let mut label_order: Vec<String> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: JsonlRecord =
            serde_json::from_str(line).map_err(|e| DatasetError::Malformed { path: path.into(), record: i + 1, message: e.to_string() })?;
        let input = rec.input.ok_or(DatasetError::MissingField { path: path.into(), record: i + 1, field: "input" })?;
        let target = rec.target.ok_or(DatasetError::MissingField { path: path.into(), record: i + 1, field: "target" })?;
        for c in rec.choices.iter().flatten() {
            if !label_order.contains(c) {
                label_order.push(c.clone());
            }
        }
        let split = match rec.split {
            Some(s) => s.parse().map_err(|m| DatasetError::Malformed { path: path.into(), record: i + 1, message: m })?,
            None => Split::Test,
        };
        let id = rec.id.map(|v| match v {
            Value::String(s) => s,
            other => other.to_string(),
        });
        instances.push(RawInstance { id, input, target, choices: rec.choices, split, reasoning: rec.reasoning });
    }
    Ok(RawTask { name: None, description: None, label_order, instances })
}

fn parse_tsv(text: &str, path: &str) -> Result<RawTask, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Malformed { path: path.into(), record: 0, message: e.to_string() })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let missing = |field: &'static str| DatasetError::MissingField { path: path.into(), record: 0, field };
    let entity = col("target-entity").or_else(|| col("target")).ok_or_else(|| missing("target-entity"))?;
    let tweet = col("tweet").ok_or_else(|| missing("tweet"))?;
    let stance = col("stance").ok_or_else(|| missing("stance"))?;
    let id_col = col("id");
    let split_col = col("split");
    let mut instances = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| DatasetError::Malformed { path: path.into(), record: i + 1, message: e.to_string() })?;
        let field = |c: usize| row.get(c).unwrap_or("").trim().to_string();
        let split = match split_col.map(field) {
            Some(s) if !s.is_empty() => {
                s.parse().map_err(|m| DatasetError::Malformed { path: path.into(), record: i + 1, message: m })?
            }
            _ => Split::Test,
        };
        instances.push(RawInstance {
            id: id_col.map(field).filter(|s| !s.is_empty()),
            input: format!("Target: {}\nText: {}", field(entity), field(tweet)),
            target: field(stance),
            choices: None,
            split,
            reasoning: None,
        });
    }
    Ok(RawTask { name: None, description: None, label_order: Vec::new(), instances })
}

/// Deterministic demonstrations from the train split. A smaller `d` yields a
/// prefix of a larger one for the same seed, so every method and every shot
/// count within a run sees consistent examples.
pub fn sample_demonstrations(
    train: &[TaskInstance],
    d: usize,
    seed: u64,
    task_name: &str,
) -> Result<Vec<Demonstration>, DatasetError> {
    if d == 0 {
        return Ok(Vec::new());
    }
    let pool: Vec<&TaskInstance> = train.iter().filter(|i| i.split == Split::Train).collect();
    if d > pool.len() {
        return Err(DatasetError::NotEnoughTraining { requested: d, available: pool.len() });
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(&mut keyed_rng(seed, "demonstrations", task_name));
    Ok(order[..d].iter().map(|&i| pool[i].to_demonstration()).collect())
}

/// Splits `train` into (held-out, remaining) with `fraction` held out,
/// rounded up, by a seeded shuffle.
pub fn carve_out(train: &[TaskInstance], seed: u64, task_name: &str, fraction: f64) -> (Vec<TaskInstance>, Vec<TaskInstance>) {
    let held = ((train.len() as f64) * fraction).ceil() as usize;
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut keyed_rng(seed, "dev-carve-out", task_name));
    let mut held_idx: Vec<usize> = order[..held.min(train.len())].to_vec();
    held_idx.sort_unstable();
    let held_set: HashSet<usize> = held_idx.iter().copied().collect();
    let dev = held_idx.iter().map(|&i| train[i].clone()).collect();
    let rest = (0..train.len()).filter(|i| !held_set.contains(i)).map(|i| train[i].clone()).collect();
    (dev, rest)
}

/// Manifest mapping dataset names to files.
#[derive(Debug, Clone, PartialEq)]
pub struct Registry {
    base_dir: PathBuf,
    entries: Vec<RegistryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistryEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: DatasetFormat,
    #[serde(flatten)]
    pub overrides: TaskOverrides,
}

#[derive(Deserialize)]
struct RegistryFile {
    #[serde(default)]
    dataset: Vec<RegistryEntry>,
}

impl Registry {
    /// Reads a TOML manifest; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::Io { path: shown.clone(), message: e.to_string() })?;
        let file: RegistryFile =
            toml::from_str(&text).map_err(|e| DatasetError::Malformed { path: shown.clone(), record: 0, message: e.to_string() })?;
        let mut names = HashSet::new();
        for e in &file.dataset {
            if !names.insert(e.name.to_lowercase()) {
                return Err(DatasetError::DuplicateId { path: shown, id: e.name.clone() });
            }
        }
        Ok(Registry { base_dir: path.parent().unwrap_or(Path::new(".")).to_path_buf(), entries: file.dataset })
    }

    pub fn entries(&self) -> &[RegistryEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Result<&RegistryEntry, DatasetError> {
        self.entries
            .iter()
            .find(|e| e.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| DatasetError::Unregistered(name.to_string()))
    }

    pub fn resolve(&self, entry: &RegistryEntry) -> PathBuf {
        if entry.path.is_absolute() {
            entry.path.clone()
        } else {
            self.base_dir.join(&entry.path)
        }
    }

    pub fn load_task(&self, name: &str) -> Result<Task, DatasetError> {
        let entry = self.get(name)?;
        load_task(&self.resolve(entry), entry.format, Some(&entry.name), &entry.overrides)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn bigbench_argmax() {
        let f = write_tmp(
            r#"{"name":"Metaphor","examples":[{"input":"q1","target_scores":{"True":1,"False":0}},{"input":"q2","target_scores":{"True":0,"False":1}}]}"#,
            ".json",
        );
        let task = load_task(f.path(), DatasetFormat::BigbenchJson, None, &TaskOverrides::default()).unwrap();
        assert_eq!(task.instances[0].target, "True");
        assert_eq!(task.instances[1].target, "False");
        assert_eq!(task.instances[1].id, "Metaphor-1");
        assert_eq!(task.spec.description, "Metaphor Recognition");
        assert_eq!(task.spec.splits, SplitCounts { train: 0, dev: 0, test: 2 });
    }

    #[test]
    fn unknown_task_learns_labels_from_file() {
        let f = write_tmp(
            r#"{"name":"Colors","description":"Pick a color","examples":[{"input":"sky","target_scores":{"blue":1,"red":0,"green":0}}]}"#,
            ".json",
        );
        let task = load_task(f.path(), DatasetFormat::BigbenchJson, None, &TaskOverrides::default()).unwrap();
        assert_eq!(task.spec.label_space.labels(), ["blue", "red", "green"]);
        assert_eq!(task.spec.description, "Pick a color");
        assert_eq!(task.spec.metric, MetricKind::Accuracy);
    }

    #[test]
    fn jsonl_errors() {
        let dup = write_tmp("{\"id\":\"a\",\"input\":\"x\",\"target\":\"True\"}\n{\"id\":\"a\",\"input\":\"y\",\"target\":\"False\"}\n", ".jsonl");
        let err = load_task(dup.path(), DatasetFormat::Jsonl, Some("Metaphor"), &TaskOverrides::default()).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateId { .. }));
        let missing = write_tmp("{\"input\":\"x\"}\n", ".jsonl");
        let err = load_task(missing.path(), DatasetFormat::Jsonl, Some("Metaphor"), &TaskOverrides::default()).unwrap_err();
        assert!(matches!(err, DatasetError::MissingField { field: "target", .. }));
        let empty = write_tmp("\n", ".jsonl");
        let err = load_task(empty.path(), DatasetFormat::Jsonl, Some("Metaphor"), &TaskOverrides::default()).unwrap_err();
        assert!(matches!(err, DatasetError::EmptyTask { .. }));
        let outside = write_tmp("{\"input\":\"x\",\"target\":\"MAYBE\"}\n", ".jsonl");
        let err = load_task(outside.path(), DatasetFormat::Jsonl, Some("Metaphor"), &TaskOverrides::default()).unwrap_err();
        assert!(matches!(err, DatasetError::LabelOutsideSpace { .. }));
    }

    #[test]
    fn targets_are_canonicalized() {
        let f = write_tmp("{\"input\":\"x\",\"target\":\"favor\"}\n", ".jsonl");
        let task = load_task(f.path(), DatasetFormat::Jsonl, Some("SemEval"), &TaskOverrides::default()).unwrap();
        assert_eq!(task.instances[0].target, "FAVOR");
    }

    #[test]
    fn tsv_stance_rows() {
        let f = write_tmp("target-entity\ttweet\tstance\nAtheism\tsome \"quoted\" text\tAGAINST\n", ".tsv");
        let task = load_task(f.path(), DatasetFormat::Tsv, Some("SemEval"), &TaskOverrides::default()).unwrap();
        assert_eq!(task.instances[0].input, "Target: Atheism\nText: some \"quoted\" text");
        assert_eq!(task.instances[0].target, "AGAINST");
        assert_eq!(task.spec.metric, MetricKind::MacroF1Subset { classes: vec!["FAVOR".into(), "AGAINST".into()] });
    }

    #[test]
    fn label_spaces_by_size() {
        for (name, n) in [("Metaphor", 2), ("SNARKS", 2), ("Humor", 2), ("Anachronisms", 2), ("Entailment", 2), ("Pronoun", 3), ("SemEval", 3), ("SocNorm", 3), ("e-SocNorm", 3), ("CALI", 3), ("IPA", 3), ("SEQ", 4)] {
            assert_eq!(registered_label_space(name).unwrap().len(), n, "{name}");
        }
        assert_eq!(registered_label_space("Metaphor").unwrap().labels(), ["True", "False"]);
        assert_eq!(registered_label_space("SemEval").unwrap().labels(), ["FAVOR", "AGAINST", "NONE"]);
        assert!(matches!(registered_label_space("Nope"), Err(DatasetError::Unregistered(_))));
    }

    fn train_pool(n: usize) -> Vec<TaskInstance> {
        (0..n)
            .map(|i| TaskInstance {
                id: format!("t-{i}"),
                input: format!("q{i}"),
                target: "True".into(),
                choices: None,
                split: if i % 5 == 0 { Split::Test } else { Split::Train },
                reasoning: None,
            })
            .collect()
    }

    #[test]
    fn demonstrations_are_deterministic_prefixes() {
        let pool = train_pool(40);
        assert!(sample_demonstrations(&pool, 0, 1, "t").unwrap().is_empty());
        let a = sample_demonstrations(&pool, 3, 7, "t").unwrap();
        assert_eq!(a, sample_demonstrations(&pool, 3, 7, "t").unwrap());
        let four = sample_demonstrations(&pool, 4, 7, "t").unwrap();
        assert_eq!(&four[..3], &a[..]);
        assert!(four.iter().all(|d| {
            let idx: usize = d.question[1..].parse().unwrap();
            !idx.is_multiple_of(5)
        }));
        assert!(matches!(
            sample_demonstrations(&pool, 33, 7, "t"),
            Err(DatasetError::NotEnoughTraining { requested: 33, available: 32 })
        ));
    }

    #[test]
    fn carve_out_partitions() {
        let pool: Vec<_> = train_pool(50).into_iter().filter(|i| i.split == Split::Train).collect();
        let (dev, rest) = carve_out(&pool, 3, "CALI", 0.1);
        assert_eq!(dev.len(), 4);
        assert_eq!(dev.len() + rest.len(), pool.len());
        assert!(dev.iter().all(|d| !rest.contains(d)));
    }
}
