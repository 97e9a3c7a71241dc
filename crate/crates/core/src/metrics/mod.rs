//! Scoring, analytic baselines and analysis tables.

mod tables;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::datasets::MetricKind;
use crate::perspective::PerspectiveKind;
use crate::record::PredictionRecord;
use crate::response_parser::LabelSpace;

pub use tables::{
    write_bins_csv, write_cost_csv, write_keywords_csv, write_proportions_csv, write_scores_csv, write_table_csv,
    BaselineRow, TableLayout,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("no records to score")]
    Empty,
    #[error("macro-F1 needs at least one class")]
    NoClasses,
    #[error("class `{0}` is not in the label space")]
    ClassOutsideSpace(String),
    #[error("bin width {0} does not divide 1 evenly")]
    BadBinWidth(f64),
}

/// Gold label and predicted label (`None` for a parse failure or error).
pub type Outcome<'a> = (&'a str, Option<&'a str>);

/// Per-class counts; merging two tallies equals tallying the concatenation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub total: u64,
    pub correct: u64,
    /// label -> (true positives, false positives, false negatives)
    pub per_class: BTreeMap<String, (u64, u64, u64)>,
}

impl Tally {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = Outcome<'a>>) -> Self {
        let mut t = Tally::default();
        for (gold, pred) in outcomes {
            t.add(gold, pred);
        }
        t
    }

    pub fn add(&mut self, gold: &str, pred: Option<&str>) {
        self.total += 1;
        if pred == Some(gold) {
            self.correct += 1;
            self.per_class.entry(gold.to_string()).or_default().0 += 1;
        } else {
            self.per_class.entry(gold.to_string()).or_default().2 += 1;
            if let Some(p) = pred {
                self.per_class.entry(p.to_string()).or_default().1 += 1;
            }
        }
    }

    pub fn merge(mut self, other: &Tally) -> Tally {
        self.total += other.total;
        self.correct += other.correct;
        for (label, (tp, fp, fneg)) in &other.per_class {
            let e = self.per_class.entry(label.clone()).or_default();
            e.0 += tp;
            e.1 += fp;
            e.2 += fneg;
        }
        self
    }

    pub fn accuracy(&self) -> Result<f64, MetricError> {
        if self.total == 0 {
            return Err(MetricError::Empty);
        }
        Ok(100.0 * self.correct as f64 / self.total as f64)
    }

    /// F1 of one class; 0 when the class never occurs in gold or prediction.
    pub fn f1(&self, class: &str) -> f64 {
        match self.per_class.get(class) {
            Some(&(tp, fp, fneg)) if tp > 0 => 2.0 * tp as f64 / (2 * tp + fp + fneg) as f64,
            _ => 0.0,
        }
    }

    pub fn macro_f1<S: AsRef<str>>(&self, classes: &[S]) -> Result<f64, MetricError> {
        if classes.is_empty() {
            return Err(MetricError::NoClasses);
        }
        if self.total == 0 {
            return Err(MetricError::Empty);
        }
        let sum: f64 = classes.iter().map(|c| self.f1(c.as_ref())).sum();
        Ok(100.0 * sum / classes.len() as f64)
    }

    pub fn score(&self, metric: &MetricKind, space: &LabelSpace) -> Result<f64, MetricError> {
        match metric {
            MetricKind::Accuracy => self.accuracy(),
            MetricKind::MacroF1All => self.macro_f1(space.labels()),
            MetricKind::MacroF1Subset { classes } => {
                if let Some(c) = classes.iter().find(|c| !space.contains(c)) {
                    return Err(MetricError::ClassOutsideSpace(c.clone()));
                }
                self.macro_f1(classes)
            }
        }
    }
}

fn outcomes(records: &[PredictionRecord]) -> impl Iterator<Item = Outcome<'_>> {
    records.iter().map(|r| (r.gold.as_str(), if r.error.is_some() { None } else { r.answer.label() }))
}

/// Percentage of correct records; parse failures and errors count as wrong.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64, MetricError> {
    Tally::from_outcomes(outcomes(records)).accuracy()
}

/// Unweighted mean of per-class F1 over `classes`, as a percentage.
pub fn macro_f1<S: AsRef<str>>(records: &[PredictionRecord], classes: &[S]) -> Result<f64, MetricError> {
    Tally::from_outcomes(outcomes(records)).macro_f1(classes)
}

pub fn score(records: &[PredictionRecord], metric: &MetricKind, space: &LabelSpace) -> Result<f64, MetricError> {
    Tally::from_outcomes(outcomes(records)).score(metric, space)
}

/// Expected score of a uniform random predictor with balanced gold labels.
/// Accuracy and macro-F1 over all labels give 100/|labels|; subset macro-F1
/// assumes prediction over the scored classes and gives 100/|classes|.
pub fn random_baseline(space: &LabelSpace, metric: &MetricKind) -> f64 {
    match metric {
        MetricKind::Accuracy | MetricKind::MacroF1All => 100.0 / space.len() as f64,
        MetricKind::MacroF1Subset { classes } => 100.0 / classes.len().max(1) as f64,
    }
}

/// Most frequent gold label; ties go to the earlier label of the space.
pub fn modal_label<'a>(golds: &[&str], space: &'a LabelSpace) -> Option<&'a str> {
    let mut best: Option<(&str, usize)> = None;
    for label in space.labels() {
        let n = golds.iter().filter(|g| **g == label.as_str()).count();
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.filter(|(_, n)| *n > 0).map(|(l, _)| l)
}

/// Score of the constant predictor emitting the modal gold label.
pub fn majority_baseline(golds: &[&str], metric: &MetricKind, space: &LabelSpace) -> Result<f64, MetricError> {
    let modal = modal_label(golds, space).ok_or(MetricError::Empty)?;
    Tally::from_outcomes(golds.iter().map(|g| (*g, Some(modal)))).score(metric, space)
}

/// Half-up rounding to two decimals, for presentation only.
pub fn round2(x: f64) -> f64 {
    let scaled = x * 100.0;
    let nudged = scaled + scaled.abs() * 4.0 * f64::EPSILON;
    (nudged + 0.5).floor() / 100.0
}

pub fn format2(x: f64) -> String {
    format!("{:.2}", round2(x))
}

/// Fields of a prediction the analyses read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRow {
    #[serde(default)]
    pub dataset: String,
    pub method: String,
    pub chosen: Option<PerspectiveKind>,
    pub confidence: Option<f64>,
    pub correct: bool,
    pub length: u64,
    #[serde(default)]
    pub reasoning: String,
}

impl From<&PredictionRecord> for AnalysisRow {
    fn from(r: &PredictionRecord) -> Self {
        AnalysisRow {
            dataset: r.dataset.clone(),
            method: r.method.clone(),
            chosen: r.chosen,
            confidence: r.confidence,
            correct: r.correct,
            length: r.response_length,
            reasoning: r.reasoning.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceBin {
    pub lower: f64,
    pub upper: f64,
    pub count: u64,
    pub correct: u64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub bins: Vec<ConfidenceBin>,
    /// Rows without a chosen perspective or without a parsed confidence.
    pub excluded: u64,
}

/// Buckets rows by the confidence of the chosen perspective. The last bin
/// is closed at 1.
pub fn confidence_accuracy_bins(rows: &[AnalysisRow], bin_width: f64) -> Result<BinReport, MetricError> {
    let n = (1.0 / bin_width).round();
    if !(bin_width > 0.0 && n >= 1.0 && (n * bin_width - 1.0).abs() < 1e-9) {
        return Err(MetricError::BadBinWidth(bin_width));
    }
    let n = n as usize;
    let mut bins: Vec<ConfidenceBin> = (0..n)
        .map(|k| ConfidenceBin { lower: k as f64 / n as f64, upper: (k + 1) as f64 / n as f64, count: 0, correct: 0, accuracy: None })
        .collect();
    let mut excluded = 0;
    for row in rows {
        match (row.chosen, row.confidence) {
            (Some(_), Some(c)) if (0.0..=1.0).contains(&c) => {
                let k = ((c * n as f64 + 1e-9).floor() as usize).min(n - 1);
                bins[k].count += 1;
                bins[k].correct += row.correct as u64;
            }
            _ => excluded += 1,
        }
    }
    for b in &mut bins {
        b.accuracy = (b.count > 0).then(|| 100.0 * b.correct as f64 / b.count as f64);
    }
    Ok(BinReport { bins, excluded })
}

/// Share of each perspective among rows with a chosen perspective. All
/// shares are zero when no row has one.
pub fn perspective_proportions(rows: &[AnalysisRow]) -> BTreeMap<PerspectiveKind, f64> {
    let counts = perspective_counts(rows);
    let total: u64 = counts.values().sum();
    counts.into_iter().map(|(k, c)| (k, if total == 0 { 0.0 } else { c as f64 / total as f64 })).collect()
}

pub fn perspective_counts(rows: &[AnalysisRow]) -> BTreeMap<PerspectiveKind, u64> {
    let mut counts: BTreeMap<PerspectiveKind, u64> = PerspectiveKind::ALL.iter().map(|k| (*k, 0)).collect();
    for kind in rows.iter().filter_map(|r| r.chosen) {
        *counts.entry(kind).or_default() += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub dataset: String,
    pub method: String,
    pub metric: MetricKind,
    pub value: f64,
    pub n: usize,
    pub parse_failure_rate: f64,
    /// Instances whose backend calls failed.
    pub errors: usize,
}

impl ScoreReport {
    pub fn from_records(
        dataset: &str,
        method: &str,
        records: &[PredictionRecord],
        metric: &MetricKind,
        space: &LabelSpace,
    ) -> Result<Self, MetricError> {
        let value = score(records, metric, space)?;
        let failures = records.iter().filter(|r| r.is_parse_failure()).count();
        Ok(ScoreReport {
            dataset: dataset.to_string(),
            method: method.to_string(),
            metric: metric.clone(),
            value,
            n: records.len(),
            parse_failure_rate: failures as f64 / records.len() as f64,
            errors: records.iter().filter(|r| r.error.is_some()).count(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub method: String,
    pub mean_length: f64,
    pub score: f64,
}

/// Mean response length per method.
pub fn mean_lengths(rows: &[AnalysisRow]) -> BTreeMap<String, f64> {
    let mut sums: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for r in rows {
        let e = sums.entry(r.method.clone()).or_default();
        e.0 += r.length;
        e.1 += 1;
    }
    sums.into_iter().map(|(m, (s, n))| (m, s as f64 / n as f64)).collect()
}

/// One row per method: mean response length and the method's score,
/// averaged over datasets when it has several reports.
pub fn cost_performance_table(reports: &[ScoreReport], mean_lengths: &BTreeMap<String, f64>) -> Vec<CostRow> {
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    methods
        .into_iter()
        .filter_map(|m| {
            let values: Vec<f64> = reports.iter().filter(|r| r.method == m).map(|r| r.value).collect();
            let mean_length = *mean_lengths.get(m)?;
            Some(CostRow { method: m.to_string(), mean_length, score: values.iter().sum::<f64>() / values.len() as f64 })
        })
        .collect()
}

/// Lowercase ASCII alphanumeric tokens.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_ascii_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_ascii_lowercase)
}

/// Top `top_k` terms per perspective, most frequent first, ties by term.
pub fn keyword_frequencies(
    responses: &[(PerspectiveKind, &str)],
    stopwords: &HashSet<String>,
    top_k: usize,
) -> BTreeMap<PerspectiveKind, Vec<(String, u64)>> {
    let mut counts: BTreeMap<PerspectiveKind, BTreeMap<String, u64>> = BTreeMap::new();
    for (kind, text) in responses {
        for tok in tokenize(text) {
            if !stopwords.contains(&tok) {
                *counts.entry(*kind).or_default().entry(tok).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .filter(|(_, c)| !c.is_empty())
        .map(|(kind, c)| {
            let mut terms: Vec<(String, u64)> = c.into_iter().collect();
            terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            terms.truncate(top_k);
            (kind, terms)
        })
        .collect()
}

/// The shipped English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    include_str!("../../assets/stopwords.txt").split_whitespace().map(str::to_ascii_lowercase).collect()
}

/// Stopwords plus every token of the prompt templates.
pub fn analysis_stopwords(templates: &crate::prompt_forge::TemplateSet) -> HashSet<String> {
    let mut set = default_stopwords();
    for name in crate::prompt_forge::TemplateSet::names() {
        if let Ok(text) = templates.get(name) {
            set.extend(tokenize(text));
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binary() -> LabelSpace {
        LabelSpace::plain(["True", "False"]).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let all = Tally::from_outcomes([("True", Some("True")), ("False", Some("False"))]);
        assert_eq!(all.accuracy().unwrap(), 100.0);
        let half = Tally::from_outcomes([("True", Some("True")), ("False", None)]);
        assert_eq!(half.accuracy().unwrap(), 50.0);
        assert_eq!(Tally::default().accuracy(), Err(MetricError::Empty));
    }

    #[test]
    fn f1_examples() {
        let perfect = Tally::from_outcomes([("True", Some("True")), ("False", Some("False"))]);
        assert_eq!(perfect.macro_f1(&["True", "False"]).unwrap(), 100.0);
        let stance = Tally::from_outcomes([("FAVOR", Some("NONE")), ("AGAINST", Some("NONE")), ("NONE", Some("NONE"))]);
        assert_eq!(stance.macro_f1(&["FAVOR", "AGAINST"]).unwrap(), 0.0);
        assert_eq!(stance.macro_f1::<&str>(&[]), Err(MetricError::NoClasses));
    }

    #[test]
    fn baselines() {
        let three = LabelSpace::plain(["A", "B", "C"]).unwrap();
        let four = LabelSpace::plain(["A", "B", "C", "D"]).unwrap();
        assert_eq!(format2(random_baseline(&binary(), &MetricKind::Accuracy)), "50.00");
        assert_eq!(format2(random_baseline(&three, &MetricKind::Accuracy)), "33.33");
        assert_eq!(format2(random_baseline(&four, &MetricKind::Accuracy)), "25.00");
        let golds: Vec<&str> = ["True"; 7].into_iter().chain(["False"; 3]).collect();
        assert!((majority_baseline(&golds, &MetricKind::Accuracy, &binary()).unwrap() - 70.0).abs() < 1e-12);
        assert_eq!(modal_label(&["B", "A", "A", "B"], &three), Some("A"));
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(format2(40.965), "40.97");
        assert_eq!(format2(100.0 / 3.0), "33.33");
        assert_eq!(format2(2.0 / 3.0 * 100.0), "66.67");
        assert_eq!(format2(0.125), "0.13");
        assert_eq!(format2(1.005), "1.01");
    }

    fn row(chosen: Option<PerspectiveKind>, conf: Option<f64>, correct: bool) -> AnalysisRow {
        AnalysisRow { dataset: String::new(), method: "rpt".into(), chosen, confidence: conf, correct, length: 1, reasoning: String::new() }
    }

    #[test]
    fn bins_examples() {
        let rows: Vec<_> = (0..5).map(|_| row(Some(PerspectiveKind::Role), Some(0.85), true)).collect();
        let report = confidence_accuracy_bins(&rows, 0.1).unwrap();
        let filled: Vec<_> = report.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(filled.len(), 1);
        assert!((filled[0].lower - 0.8).abs() < 1e-12 && filled[0].accuracy == Some(100.0));
        let empty = confidence_accuracy_bins(&[], 0.1).unwrap();
        assert!(empty.bins.iter().all(|b| b.count == 0));
        assert_eq!(empty.bins.len(), 10);
        assert!(confidence_accuracy_bins(&[], 0.3).is_err());
        let top = confidence_accuracy_bins(&[row(Some(PerspectiveKind::Direct), Some(1.0), false)], 0.1).unwrap();
        assert_eq!(top.bins[9].count, 1);
    }

    #[test]
    fn proportions_examples() {
        use PerspectiveKind::*;
        let rows = [row(Some(Direct), None, true), row(Some(Direct), None, true), row(Some(Role), None, true), row(Some(ThirdPerson), None, true)];
        let p = perspective_proportions(&rows);
        assert_eq!((p[&Direct], p[&Role], p[&ThirdPerson]), (0.5, 0.25, 0.25));
        let all_third = perspective_proportions(&[row(Some(ThirdPerson), None, false)]);
        assert_eq!((all_third[&ThirdPerson], all_third[&Role], all_third[&Direct]), (1.0, 0.0, 0.0));
    }

    #[test]
    fn keyword_examples() {
        let stop: HashSet<String> = ["the".to_string()].into_iter().collect();
        assert!(keyword_frequencies(&[(PerspectiveKind::Role, "the the the")], &stop, 5).is_empty());
        let out = keyword_frequencies(&[(PerspectiveKind::Role, "expert expert role")], &stop, 5);
        assert_eq!(out[&PerspectiveKind::Role], vec![("expert".to_string(), 2), ("role".to_string(), 1)]);
    }

    #[test]
    fn cost_rows() {
        let report = ScoreReport {
            dataset: "d".into(),
            method: "rpt".into(),
            metric: MetricKind::Accuracy,
            value: 61.0,
            n: 10,
            parse_failure_rate: 0.0,
            errors: 0,
        };
        let lengths: BTreeMap<String, f64> = [("rpt".to_string(), 120.0)].into_iter().collect();
        assert_eq!(cost_performance_table(&[report], &lengths), vec![CostRow { method: "rpt".into(), mean_length: 120.0, score: 61.0 }]);
    }

    #[test]
    fn template_tokens_are_stopwords() {
        let stop = analysis_stopwords(&crate::prompt_forge::TemplateSet::builtin());
        assert!(stop.contains("perspective") && stop.contains("confidence") && stop.contains("the"));
    }

    fn outcomes_strategy() -> impl Strategy<Value = Vec<(usize, Option<usize>)>> {
        prop::collection::vec((0usize..3, prop::option::of(0usize..3)), 1..60)
    }

    const L: [&str; 3] = ["FAVOR", "AGAINST", "NONE"];

    fn tally(v: &[(usize, Option<usize>)]) -> Tally {
        Tally::from_outcomes(v.iter().map(|(g, p)| (L[*g], p.map(|p| L[p]))))
    }

    proptest! {
        #[test]
        fn permutation_invariant(v in outcomes_strategy(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut shuffled = v.clone();
            shuffled.shuffle(&mut crate::seeding::keyed_rng(seed, "test", "perm"));
            let (a, b) = (tally(&v), tally(&shuffled));
            prop_assert_eq!(a.accuracy().unwrap(), b.accuracy().unwrap());
            prop_assert_eq!(a.macro_f1(&L).unwrap(), b.macro_f1(&L).unwrap());
        }

        #[test]
        fn merge_is_associative(a in outcomes_strategy(), b in outcomes_strategy(), c in outcomes_strategy()) {
            let whole: Vec<_> = a.iter().chain(&b).chain(&c).copied().collect();
            let left = tally(&a).merge(&tally(&b)).merge(&tally(&c));
            let right = tally(&a).merge(&tally(&b).merge(&tally(&c)));
            prop_assert_eq!(&left, &right);
            prop_assert_eq!(&left, &tally(&whole));
        }

        #[test]
        fn perfect_and_always_wrong(golds in prop::collection::vec(0usize..2, 1..40)) {
            prop_assume!(golds.contains(&0) && golds.contains(&1));
            let names = ["True", "False"];
            let perfect = Tally::from_outcomes(golds.iter().map(|g| (names[*g], Some(names[*g]))));
            prop_assert_eq!(perfect.macro_f1(&names).unwrap(), 100.0);
            let wrong = Tally::from_outcomes(golds.iter().map(|g| (names[*g], Some(names[1 - *g]))));
            prop_assert_eq!(wrong.macro_f1(&names).unwrap(), 0.0);
        }

        #[test]
        fn proportions_sum_to_one(kinds in prop::collection::vec(prop::option::of(0usize..3), 1..50)) {
            let rows: Vec<_> = kinds.iter().map(|k| row(k.map(|i| PerspectiveKind::ALL[i]), None, true)).collect();
            let total: f64 = perspective_proportions(&rows).values().sum();
            if kinds.iter().any(Option::is_some) {
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }

        #[test]
        fn bin_counts_cover_input(v in prop::collection::vec((prop::option::of(0usize..3), prop::option::of(0.0f64..=1.0), any::<bool>()), 0..80)) {
            let rows: Vec<_> = v.iter().map(|(k, c, ok)| row(k.map(|i| PerspectiveKind::ALL[i]), *c, *ok)).collect();
            let report = confidence_accuracy_bins(&rows, 0.1).unwrap();
            let counted: u64 = report.bins.iter().map(|b| b.count).sum();
            prop_assert_eq!(counted + report.excluded, rows.len() as u64);
        }
    }
}
