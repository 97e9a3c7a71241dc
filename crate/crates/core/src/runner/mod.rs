//! Experiments: methods × datasets over a backend, with an append-only
//! record log that makes runs resumable.

mod config;
mod engine;
mod report;

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::backend::{BackendError, CachedBackend, CompletionBackend, ResponseCache};
use crate::datasets::{sample_demonstrations, DatasetError, Registry, Split, Task, TaskInstance};
use crate::metrics::{MetricError, ScoreReport};
use crate::prompt_forge::{Demonstration, ForgeError, Method, PromptForge, TaskFrame, TemplateSet};
use crate::record::PredictionRecord;

pub use config::{ExperimentConfig, PolicyName};
pub use engine::{majority_vote_first, majority_vote_lexicographic, Engine, EngineSettings};
pub use report::{build_reports, write_reports};

pub const CONFIG_FILE: &str = "config.toml";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const RESPONSES_DIR: &str = "responses";

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Forge(#[from] ForgeError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Io(String),
    #[error("the supplied configuration differs from the run's snapshot:\n  {}", .0.join("\n  "))]
    SnapshotMismatch(Vec<String>),
    #[error("{0}: no configuration snapshot; not a run directory")]
    NotARun(String),
}

impl From<std::io::Error> for RunnerError {
    fn from(e: std::io::Error) -> Self {
        RunnerError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunnerError {
    fn from(e: csv::Error) -> Self {
        RunnerError::Io(e.to_string())
    }
}

/// Test hook: stop after a number of newly written records, as if the
/// process had been interrupted.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunControl {
    pub halt_after_records: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub reports: Vec<ScoreReport>,
    pub new_records: usize,
    pub skipped_records: usize,
    /// Calls that reached the wrapped backend (cache misses).
    pub backend_calls: u64,
    pub interrupted: bool,
}

/// A dataset ready for evaluation.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub task: Task,
    pub frame: TaskFrame,
    pub eval: Vec<TaskInstance>,
    pub demos: Vec<Demonstration>,
}

pub fn load_tasks(config: &ExperimentConfig) -> Result<Vec<PreparedTask>, RunnerError> {
    let registry_path = config
        .registry
        .as_ref()
        .ok_or_else(|| RunnerError::Config("no dataset registry configured".into()))?;
    let registry = Registry::load(registry_path)?;
    config.datasets.iter().map(|name| prepare(registry.load_task(name)?, config)).collect()
}

/// Selects evaluation instances and samples the shared demonstrations.
pub fn prepare(task: Task, config: &ExperimentConfig) -> Result<PreparedTask, RunnerError> {
    let name = task.spec.name.clone();
    if config.shots > 0 && !task.has_train() {
        return Err(RunnerError::Config(format!("{name} has no train split; few-shot runs need one")));
    }
    let mut eval: Vec<TaskInstance> = match config.split {
        Split::Dev if task.spec.splits.dev == 0 => task.dev_or_carve_out(config.seed),
        split => task.split(split).into_iter().cloned().collect(),
    };
    if eval.is_empty() {
        return Err(RunnerError::Config(format!("{name} has no {} instances", config.split)));
    }
    if let Some(limit) = config.limit {
        eval.truncate(limit);
    }
    let demos = sample_demonstrations(&task.train(), config.shots, config.seed, &name)?;
    let frame = TaskFrame::new(task.spec.description.clone(), task.spec.label_space.clone());
    Ok(PreparedTask { task, frame, eval, demos })
}

pub fn forge_for(config: &ExperimentConfig) -> Result<PromptForge, RunnerError> {
    let templates = match &config.templates_dir {
        Some(dir) => TemplateSet::with_overrides(dir)?,
        None => TemplateSet::builtin(),
    };
    Ok(PromptForge::new(templates))
}

fn settings_for(config: &ExperimentConfig) -> EngineSettings {
    EngineSettings {
        model_name: config.model.model_name.clone(),
        temperature: config.model.temperature,
        policy: config.selection_policy(),
        enabled: config.enabled.clone(),
        sc_samples: config.sc_samples,
        sc_temperature: config.sc_temperature,
        annotated_demos: config.annotated_demos,
    }
}

/// Runs `method` over `task` without touching the disk.
pub fn run_method<B: CompletionBackend + ?Sized>(
    config: &ExperimentConfig,
    method: Method,
    task: &PreparedTask,
    backend: &B,
) -> Result<Vec<PredictionRecord>, RunnerError> {
    let forge = forge_for(config)?;
    let settings = settings_for(config);
    let engine = Engine::new(&forge, backend, &settings);
    let mut out = Vec::with_capacity(task.eval.len());
    evaluate_cell(&engine, &task.task.spec.name, method, task, &HashSet::new(), config.concurrency_limit, &mut |r| {
        out.push(r);
        Ok(true)
    })?;
    Ok(out)
}

/// Evaluates pending instances of one cell with up to `workers` threads and
/// hands records to `sink` in instance order. `sink` returns false to stop.
fn evaluate_cell<B: CompletionBackend + ?Sized>(
    engine: &Engine<'_, B>,
    dataset: &str,
    method: Method,
    task: &PreparedTask,
    done: &HashSet<String>,
    workers: usize,
    sink: &mut dyn FnMut(PredictionRecord) -> Result<bool, RunnerError>,
) -> Result<bool, RunnerError> {
    let pending: Vec<&TaskInstance> = task.eval.iter().filter(|i| !done.contains(&i.id)).collect();
    if pending.is_empty() {
        return Ok(true);
    }
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, Result<PredictionRecord, RunnerError>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(pending.len()).max(1) {
            let tx = tx.clone();
            let (next, stop, pending) = (&next, &stop, &pending);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(instance) = pending.get(i) else { break };
                let result = engine.run_instance(dataset, method, &task.frame, instance, &task.demos);
                if tx.send((i, result)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut buffer: BTreeMap<usize, PredictionRecord> = BTreeMap::new();
        let mut emit = 0usize;
        let mut outcome = Ok(true);
        for (i, result) in rx {
            if outcome.as_ref().is_ok_and(|keep| *keep) {
                match result {
                    Ok(record) => {
                        buffer.insert(i, record);
                        while let Some(record) = buffer.remove(&emit) {
                            emit += 1;
                            match sink(record) {
                                Ok(true) => {}
                                other => {
                                    stop.store(true, Ordering::SeqCst);
                                    outcome = other;
                                    break;
                                }
                            }
                        }
                    }
                    Err(e) => {
                        stop.store(true, Ordering::SeqCst);
                        outcome = Err(e);
                    }
                }
            }
        }
        outcome
    })
}

/// Paths inside a run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunDir { root: root.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.root.join(CONFIG_FILE)
    }

    pub fn records(&self) -> PathBuf {
        self.root.join(RECORDS_FILE)
    }

    pub fn responses(&self) -> PathBuf {
        self.root.join(RESPONSES_DIR)
    }
}

/// Reads the record log, dropping a trailing partial line left by an
/// interrupted write.
pub fn read_records(path: &Path) -> Result<Vec<PredictionRecord>, RunnerError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => out.push(r),
            Err(e) => return Err(RunnerError::Io(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

fn truncate_partial_line(path: &Path) -> Result<(), RunnerError> {
    if !path.exists() {
        return Ok(());
    }
    let bytes = fs::read(path)?;
    let keep = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    if keep < bytes.len() {
        log::warn!("dropping {} bytes of a partial record at the end of {}", bytes.len() - keep, path.display());
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}

/// Starts a run in `config.output_dir`, or continues one whose snapshot
/// matches `config`.
pub fn run_experiment<B: CompletionBackend>(
    config: &ExperimentConfig,
    backend: B,
    control: RunControl,
) -> Result<RunSummary, RunnerError> {
    config.validate()?;
    let dir = RunDir::new(&config.output_dir);
    fs::create_dir_all(&dir.root)?;
    if dir.config().exists() {
        let snapshot = ExperimentConfig::load(&dir.config())?;
        let diff = snapshot.diff(config);
        if !diff.is_empty() {
            return Err(RunnerError::SnapshotMismatch(diff));
        }
    } else {
        fs::write(dir.config(), config.to_toml_string()?)?;
    }
    execute(config, &dir, backend, control)
}

/// Continues the run in `run_dir` from its own snapshot. When `supplied` is
/// given it must describe the same experiment.
pub fn resume<B: CompletionBackend>(
    run_dir: &Path,
    supplied: Option<&ExperimentConfig>,
    backend: B,
    control: RunControl,
) -> Result<RunSummary, RunnerError> {
    let dir = RunDir::new(run_dir);
    if !dir.config().exists() {
        return Err(RunnerError::NotARun(run_dir.display().to_string()));
    }
    let mut snapshot = ExperimentConfig::load(&dir.config())?;
    if let Some(c) = supplied {
        let diff = snapshot.diff(c);
        if !diff.is_empty() {
            return Err(RunnerError::SnapshotMismatch(diff));
        }
        snapshot.concurrency_limit = c.concurrency_limit;
    }
    snapshot.output_dir = run_dir.to_path_buf();
    snapshot.validate()?;
    execute(&snapshot, &dir, backend, control)
}

fn execute<B: CompletionBackend>(
    config: &ExperimentConfig,
    dir: &RunDir,
    backend: B,
    control: RunControl,
) -> Result<RunSummary, RunnerError> {
    let tasks = load_tasks(config)?;
    let forge = forge_for(config)?;
    let settings = settings_for(config);
    let cached = CachedBackend::new(backend, ResponseCache::open(dir.responses())?, config.model.model_name.clone());
    let engine = Engine::new(&forge, &cached, &settings);

    truncate_partial_line(&dir.records())?;
    let existing = read_records(&dir.records())?;
    let mut done: HashSet<(String, String, String)> = HashSet::new();
    for r in &existing {
        done.insert((r.dataset.clone(), r.method.clone(), r.instance_id.clone()));
    }
    let mut log = OpenOptions::new().create(true).append(true).open(dir.records())?;
    let mut new_records = 0usize;
    let mut interrupted = false;

    'cells: for task in &tasks {
        let name = task.task.spec.name.as_str();
        for &method in &config.methods {
            let done_ids: HashSet<String> = done
                .iter()
                .filter(|(d, m, _)| d == name && m == method.key())
                .map(|(_, _, id)| id.clone())
                .collect();
            let mut sink = |record: PredictionRecord| -> Result<bool, RunnerError> {
                if control.halt_after_records.is_some_and(|h| new_records >= h) {
                    interrupted = true;
                    return Ok(false);
                }
                let mut line = serde_json::to_string(&record).map_err(|e| RunnerError::Io(e.to_string()))?;
                line.push('\n');
                log.write_all(line.as_bytes())?;
                new_records += 1;
                Ok(true)
            };
            let finished = evaluate_cell(&engine, name, method, task, &done_ids, config.concurrency_limit, &mut sink)?;
            if !finished {
                break 'cells;
            }
        }
    }
    log.flush()?;
    drop(log);

    let reports = if interrupted { Vec::new() } else { write_reports(dir, config, &tasks, &forge)? };
    Ok(RunSummary {
        run_dir: dir.root.clone(),
        reports,
        new_records,
        skipped_records: existing.len(),
        backend_calls: cached.misses(),
        interrupted,
    })
}

/// Regenerates every table of a run from its snapshot and record log.
pub fn report(run_dir: &Path) -> Result<Vec<ScoreReport>, RunnerError> {
    let dir = RunDir::new(run_dir);
    if !dir.config().exists() {
        return Err(RunnerError::NotARun(run_dir.display().to_string()));
    }
    let config = ExperimentConfig::load(&dir.config())?;
    let tasks = load_tasks(&config)?;
    let forge = forge_for(&config)?;
    write_reports(&dir, &config, &tasks, &forge)
}

/// Runs the experiment once per shot count into `<output_dir>/shots-<d>`
/// and writes `<output_dir>/shots.csv`.
pub fn sweep_shots<B: CompletionBackend>(
    config: &ExperimentConfig,
    d_values: &[usize],
    backend: &B,
) -> Result<BTreeMap<usize, Vec<ScoreReport>>, RunnerError> {
    let mut out = BTreeMap::new();
    for &d in d_values {
        let cfg = ExperimentConfig { shots: d, output_dir: config.output_dir.join(format!("shots-{d}")), ..config.clone() };
        let summary = run_experiment(&cfg, backend, RunControl::default())?;
        out.insert(d, summary.reports);
    }
    fs::create_dir_all(&config.output_dir)?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(config.output_dir.join("shots.csv"))?;
    w.write_record(["shots", "dataset", "method", "metric", "value", "n"])?;
    for (d, reports) in &out {
        for r in reports {
            w.write_record([
                d.to_string(),
                r.dataset.clone(),
                r.method.clone(),
                r.metric.to_string(),
                crate::metrics::format2(r.value),
                r.n.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(out)
}
