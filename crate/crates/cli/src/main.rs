use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rpt_core::backend::{CompletionBackend, HttpBackend, MockBackend};
use rpt_core::datasets::Registry;
use rpt_core::metrics::{format2, ScoreReport};
use rpt_core::prompt_forge::{Method, StageSelection};
use rpt_core::runner::{self, ExperimentConfig, PolicyName, RunControl};
use rpt_core::PerspectiveKind;

#[derive(Parser)]
#[command(name = "rpt", version, about = "Perspective-transition prompting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or continue) an experiment.
    Run {
        #[command(flatten)]
        opts: ExperimentOpts,
    },
    /// Continue an interrupted run from its snapshot.
    Resume {
        run_dir: PathBuf,
        /// Must describe the same experiment as the snapshot.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_name = "SCRIPT_DIR")]
        mock: Option<PathBuf>,
        #[arg(long)]
        concurrency: Option<usize>,
    },
    /// Run the experiment once per demonstration count.
    SweepShots {
        #[command(flatten)]
        opts: ExperimentOpts,
        #[arg(long = "values", value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Rebuild the CSV tables of a run from its records.
    Report { run_dir: PathBuf },
    /// Print the rendered prompts for a few instances without calling a model.
    DumpPrompts {
        #[command(flatten)]
        opts: ExperimentOpts,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

#[derive(Args)]
struct ExperimentOpts {
    /// Experiment TOML; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "dataset")]
    datasets: Vec<String>,
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    policy: Option<String>,
    /// direct, role or third.
    #[arg(long = "disable-perspective")]
    disable: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Replay scripted responses instead of calling the endpoint.
    #[arg(long, value_name = "SCRIPT_DIR")]
    mock: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    registry: Option<PathBuf>,
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Run perspective transition as three separate calls.
    #[arg(long)]
    staged: bool,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    concurrency: Option<usize>,
}

impl ExperimentOpts {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if !self.datasets.is_empty() {
            c.datasets = self.datasets.clone();
        }
        if !self.methods.is_empty() {
            c.methods = self.methods.iter().map(|m| m.parse::<Method>()).collect::<Result<_, _>>()?;
        }
        if self.staged {
            for m in &mut c.methods {
                if *m == Method::Rpt {
                    *m = Method::RptStaged;
                }
            }
        }
        if let Some(d) = self.shots {
            c.shots = d;
        }
        if let Some(p) = &self.policy {
            c.policy = p.parse::<PolicyName>()?;
        }
        for name in &self.disable {
            let kind: PerspectiveKind = name.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
            c.enabled.remove(&kind);
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        if let Some(r) = &self.registry {
            c.registry = Some(r.clone());
        }
        if let Some(t) = &self.templates {
            c.templates_dir = Some(t.clone());
        }
        if let Some(l) = self.limit {
            c.limit = Some(l);
        }
        if let Some(n) = self.concurrency {
            c.concurrency_limit = n;
        }
        Ok(c)
    }
}

fn backend(mock: Option<&Path>, config: &ExperimentConfig) -> Result<Box<dyn CompletionBackend>> {
    Ok(match mock {
        Some(dir) => Box::new(MockBackend::from_dir(dir).with_context(|| format!("loading mock scripts from {}", dir.display()))?),
        None => Box::new(HttpBackend::new(config.model.clone())?),
    })
}

fn print_reports(reports: &[ScoreReport]) {
    println!("{:<14} {:<16} {:<10} {:>8} {:>6} {:>8}", "dataset", "method", "metric", "value", "n", "failed");
    for r in reports {
        println!(
            "{:<14} {:<16} {:<10} {:>8} {:>6} {:>7.1}%",
            r.dataset,
            r.method,
            r.metric.short_name(),
            format2(r.value),
            r.n,
            100.0 * r.parse_failure_rate
        );
    }
}

fn dump_prompts(config: &ExperimentConfig, count: usize) -> Result<()> {
    config.validate()?;
    let registry = Registry::load(config.registry.as_deref().context("--registry is required")?)?;
    let forge = runner::forge_for(config)?;
    for name in &config.datasets {
        let task = runner::prepare(registry.load_task(name)?, config)?;
        for instance in task.eval.iter().take(count) {
            for &method in &config.methods {
                println!("===== {name} / {method} / {}", instance.id);
                let q = instance.input.as_str();
                let e = &config.enabled;
                match method {
                    Method::Rpt | Method::RptStaged if e.is_empty() => {
                        println!("{}", forge.build_simple_prompt(&task.frame, q, &task.demos, config.annotated_demos)?.rendered)
                    }
                    Method::Rpt if config.policy == PolicyName::Highest => {
                        let b = forge.build_unified_prompt_with(&task.frame, q, e, &task.demos, config.annotated_demos)?;
                        println!("{}", b.rendered);
                    }
                    Method::Rpt | Method::RptStaged => {
                        let s = forge.build_stage_prompts_with(&task.frame, q, e, &task.demos, config.annotated_demos)?;
                        println!("--- stage 1\n{}\n--- stage 2\n{}\n--- stage 3\n{}", s.stage1, s.stage2, s.stage3.render(&[], StageSelection::HighestConfidence));
                    }
                    Method::Ensemble | Method::Reranking => {
                        for kind in PerspectiveKind::ALL.iter().filter(|k| e.contains(k)) {
                            println!("--- {}", kind.display_name());
                            println!("{}", forge.build_member_prompt(method, *kind, &task.frame, q, &task.demos)?.rendered);
                        }
                    }
                    _ => println!("{}", forge.build_baseline_prompt(method, &task.frame, q, &task.demos)?.rendered),
                }
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { opts } => {
            let config = opts.config()?;
            let summary = runner::run_experiment(&config, backend(opts.mock.as_deref(), &config)?, RunControl::default())?;
            eprintln!(
                "{}: {} new records, {} already present, {} model calls",
                summary.run_dir.display(),
                summary.new_records,
                summary.skipped_records,
                summary.backend_calls
            );
            print_reports(&summary.reports);
        }
        Command::Resume { run_dir, config, mock, concurrency } => {
            let supplied = config.as_deref().map(ExperimentConfig::load).transpose()?;
            let snapshot = ExperimentConfig::load(&run_dir.join(runner::CONFIG_FILE))
                .with_context(|| format!("{} is not a run directory", run_dir.display()))?;
            let supplied = match (supplied, concurrency) {
                (Some(mut c), n) => {
                    c.concurrency_limit = n.unwrap_or(c.concurrency_limit);
                    Some(c)
                }
                (None, Some(n)) => Some(ExperimentConfig { concurrency_limit: n, ..snapshot.clone() }),
                (None, None) => None,
            };
            let b = backend(mock.as_deref(), &snapshot)?;
            let summary = runner::resume(&run_dir, supplied.as_ref(), b, RunControl::default())?;
            eprintln!("{}: {} new records, {} already present", run_dir.display(), summary.new_records, summary.skipped_records);
            print_reports(&summary.reports);
        }
        Command::SweepShots { opts, values } => {
            let config = opts.config()?;
            let b = backend(opts.mock.as_deref(), &config)?;
            for (d, reports) in runner::sweep_shots(&config, &values, &b)? {
                println!("# shots = {d}");
                print_reports(&reports);
            }
        }
        Command::Report { run_dir } => print_reports(&runner::report(&run_dir)?),
        Command::DumpPrompts { opts, count } => {
            if opts.mock.is_some() {
                bail!("dump-prompts does not call a backend");
            }
            dump_prompts(&opts.config()?, count)?;
        }
    }
    Ok(())
}
