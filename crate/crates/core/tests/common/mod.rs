#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use regex::Regex;
use rpt_core::backend::{BackendError, CompletionBackend, CompletionRequest, RawResponse};
use rpt_core::response_parser::{parse_response, Answer, LabelSpace};
use rpt_core::seeding::keyed_rng;
use rpt_core::PerspectiveKind;

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

// ---------------------------------------------------------------------------
// Parser corpus

pub struct CorpusCase {
    pub name: String,
    pub text: String,
    pub space: LabelSpace,
    pub answer: Option<String>,
    pub ranks: Vec<(PerspectiveKind, f64)>,
}

pub fn load_corpus(sub: &str) -> Vec<CorpusCase> {
    let dir = fixture(&format!("parser_corpus/{sub}"));
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.unwrap().file_name().to_str().and_then(|n| n.strip_suffix(".response.txt")).map(String::from))
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let text = fs::read_to_string(dir.join(format!("{name}.response.txt"))).unwrap();
            let expected = fs::read_to_string(dir.join(format!("{name}.expected.tsv"))).unwrap();
            let (mut labels, mut aliases, mut answer, mut ranks) = (Vec::new(), BTreeMap::new(), None, Vec::new());
            for line in expected.lines() {
                let cols: Vec<&str> = line.split('\t').collect();
                match cols[0] {
                    "labels" => labels = cols[1].split('|').map(String::from).collect(),
                    "aliases" => {
                        for pair in cols[1].split('|') {
                            let (k, v) = pair.split_once('=').unwrap();
                            aliases.insert(k.to_string(), v.to_string());
                        }
                    }
                    "answer" => answer = (cols[1] != "PARSE_FAILURE").then(|| cols[1].to_string()),
                    "rank" => ranks.push((cols[1].parse().unwrap(), cols[2].parse().unwrap())),
                    other => panic!("{name}: unknown row {other}"),
                }
            }
            CorpusCase { name, text, space: LabelSpace::new(labels, aliases).unwrap(), answer, ranks }
        })
        .collect()
}

/// Answer extracted as expected (including an expected failure).
pub fn answer_ok(case: &CorpusCase) -> bool {
    let parsed = parse_response(&case.text, &case.space, None);
    match (&parsed.answer, &case.answer) {
        (Answer::Label(got), Some(want)) => got == want,
        (Answer::ParseFailure, None) => true,
        _ => false,
    }
}

pub fn rankings_ok(case: &CorpusCase) -> bool {
    let parsed = parse_response(&case.text, &case.space, None);
    parsed.rankings.len() == case.ranks.len()
        && parsed.rankings.iter().zip(&case.ranks).all(|(r, (k, c))| r.kind == *k && (r.confidence - c).abs() < 1e-9)
}

// ---------------------------------------------------------------------------
// Synthetic oracle backend

/// Answers "Oracle item N" questions. Each item gets fixed per-perspective
/// confidences and a uniform draw `u`; reasoning from a perspective is
/// correct iff `u` is below that perspective's stated confidence.
pub struct OracleBackend {
    pub seed: u64,
    item: Regex,
    forced: Regex,
}

pub struct OracleItem {
    pub gold: &'static str,
    pub u: f64,
    pub conf: BTreeMap<PerspectiveKind, f64>,
}

pub fn oracle_gold(n: u64) -> &'static str {
    if n.is_multiple_of(2) {
        "True"
    } else {
        "False"
    }
}

impl OracleBackend {
    pub fn new(seed: u64) -> Self {
        OracleBackend {
            seed,
            item: Regex::new(r"Oracle item (\d+)").unwrap(),
            forced: Regex::new(r"Finally, use the (.+?) to solve").unwrap(),
        }
    }

    pub fn item(&self, n: u64) -> OracleItem {
        let mut rng = keyed_rng(self.seed, "oracle", &n.to_string());
        let pct = |x: f64| (x * 100.0).round() / 100.0;
        let mut conf = BTreeMap::new();
        conf.insert(PerspectiveKind::ThirdPerson, pct(rng.gen_range(0.6..1.0)));
        conf.insert(PerspectiveKind::Role, pct(rng.gen_range(0.4..0.9)));
        conf.insert(PerspectiveKind::Direct, pct(rng.gen_range(0.3..0.8)));
        OracleItem { gold: oracle_gold(n), u: rng.gen(), conf }
    }

    fn answer(item: &OracleItem, kind: PerspectiveKind) -> &'static str {
        let right = item.u < item.conf[&kind];
        match (item.gold, right) {
            (g, true) => g,
            ("True", false) => "False",
            _ => "True",
        }
    }

    fn listed(prompt: &str) -> Vec<PerspectiveKind> {
        PerspectiveKind::ALL.iter().copied().filter(|k| prompt.contains(&format!("{} (", k.display_name()))).collect()
    }

    fn ranked(item: &OracleItem, kinds: &[PerspectiveKind]) -> Vec<(PerspectiveKind, f64)> {
        let mut v: Vec<(PerspectiveKind, f64)> = kinds.iter().map(|k| (*k, item.conf[k])).collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    fn ranking_lines(ranked: &[(PerspectiveKind, f64)]) -> String {
        ranked.iter().map(|(k, c)| format!("{}, {:.0}%\n", k.display_name(), c * 100.0)).collect()
    }

    pub fn respond(&self, prompt: &str) -> String {
        let Some(n) = self.item.captures(prompt).map(|c| c[1].parse::<u64>().unwrap()) else {
            return "Answer: True".into();
        };
        let item = self.item(n);
        let listed = Self::listed(prompt);
        let ranked = Self::ranked(&item, &listed);
        if let Some(c) = self.forced.captures(prompt) {
            let kind = PerspectiveKind::ALL.iter().copied().find(|k| k.display_name() == &c[1]).unwrap();
            return format!("Selected Perspective Reasoning:\nreasoning as {}\nAnswer: {}\n", kind.key(), Self::answer(&item, kind));
        }
        let rank = prompt.contains("Secondly, ranking");
        let finish = prompt.contains("Finally, choosing");
        match (rank, finish) {
            (true, true) | (false, true) if !ranked.is_empty() => {
                let best = ranked[0].0;
                let header = if rank { format!("Perspective and Confidence:\n{}\n", Self::ranking_lines(&ranked)) } else { String::new() };
                format!("{header}Selected Perspective Reasoning:\nreasoning as {}\nAnswer: {}\n", best.key(), Self::answer(&item, best))
            }
            (true, false) => format!("Perspective and Confidence:\n{}", Self::ranking_lines(&ranked)),
            _ if prompt.contains("Firstly, analyzing") && !finish => "Several perspectives apply here.".into(),
            _ => format!("Reasoning directly.\nAnswer: {}\n", Self::answer(&item, PerspectiveKind::Direct)),
        }
    }
}

impl CompletionBackend for OracleBackend {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        Ok(RawResponse {
            text: self.respond(&request.prompt),
            reported_completion_tokens: None,
            latency: std::time::Duration::ZERO,
            from_cache: false,
        })
    }
}

/// Counts calls reaching the wrapped backend.
pub struct Counting<B> {
    pub inner: B,
    pub calls: AtomicU64,
}

impl<B> Counting<B> {
    pub fn new(inner: B) -> Self {
        Counting { inner, calls: AtomicU64::new(0) }
    }

    pub fn count(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: CompletionBackend> CompletionBackend for Counting<B> {
    fn complete(&self, request: &CompletionRequest) -> Result<RawResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(request)
    }
}

// ---------------------------------------------------------------------------
// Run directories

/// Writes an `n`-item oracle dataset plus a registry naming it `Oracle`.
pub fn write_oracle_registry(dir: &Path, n: u64) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let mut lines = String::new();
    for i in 0..n {
        let row = serde_json::json!({
            "id": format!("o-{i}"),
            "input": format!("Oracle item {i}: does the statement hold?"),
            "target": oracle_gold(i),
            "split": "test",
        });
        lines.push_str(&row.to_string());
        lines.push('\n');
    }
    for i in 0..8u64 {
        let row = serde_json::json!({
            "id": format!("t-{i}"),
            "input": format!("Practice statement {i}."),
            "target": oracle_gold(i),
            "split": "train",
            "reasoning": "Check the statement against the facts.",
        });
        lines.push_str(&row.to_string());
        lines.push('\n');
    }
    fs::write(dir.join("oracle.jsonl"), lines).unwrap();
    let registry = dir.join("registry.toml");
    fs::write(
        &registry,
        "[[dataset]]\nname = \"Oracle\"\npath = \"oracle.jsonl\"\nformat = \"jsonl\"\ndescription = \"Statement Verification\"\nlabels = [\"True\", \"False\"]\n",
    )
    .unwrap();
    registry
}

/// Registry with a single dataset file copied from the fixtures.
pub fn write_single_registry(dir: &Path, name: &str, fixture_rel: &str) -> PathBuf {
    fs::create_dir_all(dir).unwrap();
    let file = Path::new(fixture_rel).file_name().unwrap().to_str().unwrap().to_string();
    fs::copy(fixture(fixture_rel), dir.join(&file)).unwrap();
    let registry = dir.join("registry.toml");
    fs::write(&registry, format!("[[dataset]]\nname = \"{name}\"\npath = \"{file}\"\nformat = \"jsonl\"\n")).unwrap();
    registry
}
