//! Tables recomputed from a run's record log.

use std::collections::BTreeMap;

use super::{read_records, ExperimentConfig, PreparedTask, RunDir, RunnerError};
use crate::metrics::{
    self, analysis_stopwords, confidence_accuracy_bins, cost_performance_table, keyword_frequencies, majority_baseline,
    mean_lengths, perspective_counts, random_baseline, AnalysisRow, BaselineRow, ScoreReport, TableLayout,
};
use crate::perspective::PerspectiveKind;
use crate::prompt_forge::PromptForge;
use crate::record::PredictionRecord;

pub const BIN_WIDTH: f64 = 0.1;
pub const TOP_KEYWORDS: usize = 20;

/// One report per (dataset, method) cell that has records, in config order.
pub fn build_reports(
    config: &ExperimentConfig,
    tasks: &[PreparedTask],
    records: &[PredictionRecord],
) -> Result<Vec<ScoreReport>, RunnerError> {
    let mut out = Vec::new();
    for task in tasks {
        let spec = &task.task.spec;
        for method in &config.methods {
            let cell: Vec<PredictionRecord> =
                records.iter().filter(|r| r.dataset == spec.name && r.method == method.key()).cloned().collect();
            if cell.is_empty() {
                continue;
            }
            out.push(ScoreReport::from_records(&spec.name, method.key(), &cell, &spec.metric, &spec.label_space)?);
        }
    }
    Ok(out)
}

/// Writes scores, table, bins, proportions, cost and keyword CSVs.
pub fn write_reports(
    dir: &RunDir,
    config: &ExperimentConfig,
    tasks: &[PreparedTask],
    forge: &PromptForge,
) -> Result<Vec<ScoreReport>, RunnerError> {
    let records = read_records(&dir.records())?;
    let reports = build_reports(config, tasks, &records)?;
    let root = &dir.root;
    metrics::write_scores_csv(&root.join("scores.csv"), &reports)?;

    let layout = TableLayout {
        datasets: tasks.iter().map(|t| t.task.spec.name.clone()).collect(),
        methods: config.methods.iter().map(|m| m.key().to_string()).collect(),
    };
    let random = tasks.iter().map(|t| Some(random_baseline(&t.task.spec.label_space, &t.task.spec.metric))).collect();
    let majority = tasks
        .iter()
        .map(|t| {
            let golds: Vec<&str> = t.eval.iter().map(|i| i.target.as_str()).collect();
            majority_baseline(&golds, &t.task.spec.metric, &t.task.spec.label_space).ok()
        })
        .collect();
    let baselines =
        [BaselineRow { name: "Random".into(), values: random }, BaselineRow { name: "Majority".into(), values: majority }];
    metrics::write_table_csv(&root.join("table.csv"), &layout, &reports, &baselines)?;

    let mut bins = Vec::new();
    let mut proportions = Vec::new();
    for r in &reports {
        let rows: Vec<AnalysisRow> = records
            .iter()
            .filter(|x| x.dataset == r.dataset && x.method == r.method)
            .map(AnalysisRow::from)
            .collect();
        if rows.iter().all(|x| x.chosen.is_none()) {
            continue;
        }
        bins.push((r.dataset.clone(), r.method.clone(), confidence_accuracy_bins(&rows, BIN_WIDTH)?));
        proportions.push((r.dataset.clone(), r.method.clone(), perspective_counts(&rows)));
    }
    metrics::write_bins_csv(&root.join("bins.csv"), &bins)?;
    metrics::write_proportions_csv(&root.join("proportions.csv"), &proportions)?;

    let rows: Vec<AnalysisRow> = records.iter().map(AnalysisRow::from).collect();
    metrics::write_cost_csv(&root.join("cost.csv"), &cost_performance_table(&reports, &mean_lengths(&rows)))?;

    let texts: Vec<(PerspectiveKind, &str)> =
        records.iter().filter_map(|r| r.chosen.map(|c| (c, r.reasoning.as_str()))).collect();
    let keywords: BTreeMap<PerspectiveKind, Vec<(String, u64)>> =
        keyword_frequencies(&texts, &analysis_stopwords(forge.templates()), TOP_KEYWORDS);
    metrics::write_keywords_csv(&root.join("keywords.csv"), &keywords)?;
    Ok(reports)
}
