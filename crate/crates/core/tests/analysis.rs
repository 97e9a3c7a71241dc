mod common;

use std::collections::{BTreeMap, HashMap};

use rpt_core::metrics::{
    confidence_accuracy_bins, default_stopwords, keyword_frequencies, mean_lengths, perspective_proportions, AnalysisRow,
};
use rpt_core::PerspectiveKind;
use serde::Deserialize;

#[derive(Deserialize)]
struct Bin {
    lower: f64,
    upper: f64,
    count: u64,
    accuracy: Option<f64>,
}

#[derive(Deserialize)]
struct Cost {
    mean_length: f64,
    accuracy: f64,
}

#[derive(Deserialize)]
struct Expected {
    bins: Vec<Bin>,
    excluded: u64,
    proportions: BTreeMap<String, f64>,
    keywords_top5: BTreeMap<String, Vec<(String, u64)>>,
    keyword_extra_stopwords: Vec<String>,
    cost: BTreeMap<String, Cost>,
}

fn load() -> (Vec<AnalysisRow>, Expected) {
    let rows = std::fs::read_to_string(common::fixture("analysis/records.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let expected = serde_json::from_str(&std::fs::read_to_string(common::fixture("analysis/expected.json")).unwrap()).unwrap();
    (rows, expected)
}

#[test]
fn bins_match_recount() {
    let (rows, expected) = load();
    let report = confidence_accuracy_bins(&rows, 0.1).unwrap();
    assert_eq!(report.excluded, expected.excluded);
    assert_eq!(report.bins.len(), expected.bins.len());
    for (got, want) in report.bins.iter().zip(&expected.bins) {
        assert!((got.lower - want.lower).abs() < 1e-9 && (got.upper - want.upper).abs() < 1e-9);
        assert_eq!(got.count, want.count, "bin {}", want.lower);
        match (got.accuracy, want.accuracy) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
            (None, None) => {}
            other => panic!("bin {}: {other:?}", want.lower),
        }
    }
}

#[test]
fn proportions_match() {
    let (rows, expected) = load();
    for (kind, share) in perspective_proportions(&rows) {
        assert!((share - expected.proportions[kind.key()]).abs() < 1e-9, "{kind:?}");
    }
}

#[test]
fn keywords_match() {
    let (rows, expected) = load();
    let mut stop = default_stopwords();
    stop.extend(expected.keyword_extra_stopwords.iter().cloned());
    let texts: Vec<(PerspectiveKind, &str)> = rows.iter().filter_map(|r| r.chosen.map(|c| (c, r.reasoning.as_str()))).collect();
    let got = keyword_frequencies(&texts, &stop, 5);
    for (kind, terms) in &got {
        assert_eq!(terms, &expected.keywords_top5[kind.key()], "{kind:?}");
    }
    assert_eq!(got.len(), expected.keywords_top5.len());
}

#[test]
fn cost_rows_match() {
    let (rows, expected) = load();
    let lengths = mean_lengths(&rows);
    let mut acc: HashMap<&str, (u64, u64)> = HashMap::new();
    for r in &rows {
        let e = acc.entry(r.method.as_str()).or_default();
        e.0 += r.correct as u64;
        e.1 += 1;
    }
    for (method, cost) in &expected.cost {
        assert!((lengths[method] - cost.mean_length).abs() < 1e-9, "{method}");
        let (c, n) = acc[method.as_str()];
        assert!((100.0 * c as f64 / n as f64 - cost.accuracy).abs() < 1e-9);
    }
}
