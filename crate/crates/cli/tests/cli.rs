use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn rpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpt")).args(args).output().unwrap()
}

fn humor_setup(root: &Path) -> (String, String) {
    let data = root.join("data");
    let mocks = root.join("mocks");
    fs::create_dir_all(&data).unwrap();
    fs::create_dir_all(&mocks).unwrap();
    fs::copy(fixtures().join("humor40/humor40.jsonl"), data.join("humor40.jsonl")).unwrap();
    fs::copy(fixtures().join("humor40/script.jsonl"), mocks.join("script.jsonl")).unwrap();
    fs::write(data.join("registry.toml"), "[[dataset]]\nname = \"Humor\"\npath = \"humor40.jsonl\"\nformat = \"jsonl\"\n").unwrap();
    (data.join("registry.toml").display().to_string(), mocks.display().to_string())
}

#[test]
fn run_then_report_with_mock_scripts() {
    let tmp = tempfile::tempdir().unwrap();
    let (registry, mocks) = humor_setup(tmp.path());
    let out = tmp.path().join("run").display().to_string();
    let run = rpt(&["run", "--registry", &registry, "--dataset", "Humor", "--mock", &mocks, "--out", &out, "--concurrency", "1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("65.00"), "{stdout}");
    for name in ["config.toml", "records.jsonl", "scores.csv", "table.csv", "bins.csv", "proportions.csv", "cost.csv", "keywords.csv"] {
        assert!(tmp.path().join("run").join(name).exists(), "{name}");
    }
    let report = rpt(&["report", &out]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("65.00"));
}

#[test]
fn changed_flags_are_refused_for_an_existing_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (registry, mocks) = humor_setup(tmp.path());
    let out = tmp.path().join("run").display().to_string();
    let base = ["run", "--registry", &registry, "--dataset", "Humor", "--mock", &mocks, "--out", &out, "--concurrency", "1"];
    assert!(rpt(&base).status.success());
    let mut changed = base.to_vec();
    changed.extend(["--seed", "3"]);
    let refused = rpt(&changed);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("seed: 0 -> 3"));
}

#[test]
fn dump_prompts_respects_disabled_perspectives() {
    let registry = fixtures().join("datasets/registry.toml").display().to_string();
    let out = rpt(&["dump-prompts", "--registry", &registry, "--dataset", "Metaphor", "--disable-perspective", "role"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Third-person Perspective (simulate"));
    assert!(!text.contains("Role Perspective (assume"));
}

#[test]
fn unknown_method_is_an_error() {
    let out = rpt(&["run", "--dataset", "Humor", "--method", "telepathy"]);
    assert!(!out.status.success());
}
