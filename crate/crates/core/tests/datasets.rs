mod common;

use rpt_core::datasets::{builtin, sample_demonstrations, MetricKind, Registry, Split, BUILTIN_TASKS};

#[test]
fn every_fixture_dataset_loads() {
    let registry = Registry::load(&common::fixture("datasets/registry.toml")).unwrap();
    assert_eq!(registry.entries().len(), BUILTIN_TASKS.len());
    for entry in registry.entries() {
        let task = registry.load_task(&entry.name).unwrap();
        let spec = &task.spec;
        assert!(spec.splits.test > 0, "{}", spec.name);
        assert_eq!(spec.splits.train + spec.splits.dev + spec.splits.test, task.instances.len());
        for inst in &task.instances {
            assert!(spec.label_space.contains(&inst.target), "{}: {}", spec.name, inst.target);
        }
        let b = builtin(&spec.name).unwrap();
        assert_eq!(spec.description, b.description);
        assert_eq!(spec.label_space.labels(), b.label_space().labels());
    }
}

#[test]
fn semeval_uses_subset_f1() {
    let registry = Registry::load(&common::fixture("datasets/registry.toml")).unwrap();
    let task = registry.load_task("SemEval").unwrap();
    assert_eq!(task.spec.metric, MetricKind::MacroF1Subset { classes: vec!["FAVOR".into(), "AGAINST".into()] });
    assert!(task.instances[0].input.starts_with("Target: "));
}

#[test]
fn demonstrations_come_from_train_only() {
    let registry = Registry::load(&common::fixture("datasets/registry.toml")).unwrap();
    let task = registry.load_task("CALI").unwrap();
    let train = task.train();
    let a = sample_demonstrations(&train, 3, 11, "CALI").unwrap();
    let b = sample_demonstrations(&train, 3, 11, "CALI").unwrap();
    assert_eq!(a, b);
    let test_inputs: Vec<&str> = task.split(Split::Test).iter().map(|i| i.input.as_str()).collect();
    assert!(a.iter().all(|d| !test_inputs.contains(&d.question.as_str())));
}
