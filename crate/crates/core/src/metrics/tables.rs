//! Comma-separated outputs of the metrics.

use std::collections::BTreeMap;
use std::path::Path;

use super::{format2, BinReport, CostRow, ScoreReport};
use crate::perspective::PerspectiveKind;

type CsvResult = Result<(), csv::Error>;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, csv::Error> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)
}

pub fn write_scores_csv(path: &Path, reports: &[ScoreReport]) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["dataset", "method", "metric", "value", "n", "parse_failure_rate", "errors"])?;
    for r in reports {
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            r.metric.to_string(),
            format2(r.value),
            r.n.to_string(),
            format!("{:.4}", r.parse_failure_rate),
            r.errors.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A row of analytic baseline values, one per dataset column.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

/// Column and row order of the wide results table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableLayout {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
}

/// Rows are methods, columns are datasets followed by their unweighted mean.
/// A missing cell is left blank and blanks the row's mean.
pub fn write_table_csv(path: &Path, layout: &TableLayout, reports: &[ScoreReport], baselines: &[BaselineRow]) -> CsvResult {
    let mut w = writer(path)?;
    let mut header = vec!["method".to_string()];
    header.extend(layout.datasets.iter().cloned());
    header.push("Avg".into());
    w.write_record(&header)?;
    let mut rows: Vec<(String, Vec<Option<f64>>)> =
        baselines.iter().map(|b| (b.name.clone(), b.values.clone())).collect();
    for m in &layout.methods {
        let values = layout
            .datasets
            .iter()
            .map(|d| reports.iter().find(|r| &r.method == m && &r.dataset == d).map(|r| r.value))
            .collect();
        rows.push((m.clone(), values));
    }
    for (name, values) in rows {
        let mut record = vec![name];
        record.extend(values.iter().map(|v| v.map(format2).unwrap_or_default()));
        let avg = if values.is_empty() || values.iter().any(Option::is_none) {
            String::new()
        } else {
            format2(values.iter().flatten().sum::<f64>() / values.len() as f64)
        };
        record.push(avg);
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bins_csv(path: &Path, reports: &[(String, String, BinReport)]) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["dataset", "method", "lower", "upper", "count", "correct", "accuracy", "excluded"])?;
    for (dataset, method, report) in reports {
        for b in &report.bins {
            w.write_record([
                dataset.clone(),
                method.clone(),
                format!("{:.2}", b.lower),
                format!("{:.2}", b.upper),
                b.count.to_string(),
                b.correct.to_string(),
                b.accuracy.map(format2).unwrap_or_default(),
                report.excluded.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_proportions_csv(
    path: &Path,
    rows: &[(String, String, BTreeMap<PerspectiveKind, u64>)],
) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["dataset", "method", "perspective", "count", "proportion"])?;
    for (dataset, method, counts) in rows {
        let total: u64 = counts.values().sum();
        for (kind, count) in counts {
            let share = if total == 0 { 0.0 } else { *count as f64 / total as f64 };
            w.write_record([dataset.clone(), method.clone(), kind.key().to_string(), count.to_string(), format!("{share:.4}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_cost_csv(path: &Path, rows: &[CostRow]) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["method", "mean_length", "score"])?;
    for r in rows {
        w.write_record([r.method.clone(), format2(r.mean_length), format2(r.score)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_keywords_csv(path: &Path, keywords: &BTreeMap<PerspectiveKind, Vec<(String, u64)>>) -> CsvResult {
    let mut w = writer(path)?;
    w.write_record(["perspective", "rank", "term", "count"])?;
    for (kind, terms) in keywords {
        for (i, (term, count)) in terms.iter().enumerate() {
            w.write_record([kind.key().to_string(), (i + 1).to_string(), term.clone(), count.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
