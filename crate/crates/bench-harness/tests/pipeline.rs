//! End-to-end experiment runs on a deliberately tiny problem: artifacts
//! land where documented and the whole pipeline is deterministic.

use bench_harness::{run_experiment, ExperimentConfig};
use fusion_ops::FusionMethod;
use tempfile::TempDir;

fn tiny_config() -> ExperimentConfig {
    ExperimentConfig {
        classes: 2,
        views: 2,
        dims: vec![3, 3],
        separation: 5.0,
        noise: 0.8,
        samples: 80,
        data_seed: 9,
        conflict_rate: 0.5,
        methods: vec![FusionMethod::Gbaf, FusionMethod::Dbf],
        seeds: vec![0, 1],
        epochs: 3,
        batch_size: 16,
        hidden: 8,
        ..ExperimentConfig::default()
    }
}

#[test]
fn writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let report = run_experiment(&tiny_config(), dir.path()).unwrap();

    assert_eq!(report.methods.len(), 2);
    for name in ["gbaf", "dbf"] {
        assert!(dir.path().join(format!("uncertainty_{name}.svg")).exists());
        for seed in [0, 1] {
            let history = dir.path().join(name).join(format!("loss_history_{seed}.csv"));
            let text = std::fs::read_to_string(history).unwrap();
            // Header plus one line per epoch.
            assert_eq!(text.lines().count(), 4, "{name}/{seed}: {text}");
        }
    }
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn repeated_runs_are_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_experiment(&tiny_config(), a.path()).unwrap();
    run_experiment(&tiny_config(), b.path()).unwrap();

    // report.json embeds the wall time, so compare everything else.
    let read = |d: &TempDir, name: &str| std::fs::read_to_string(d.path().join(name)).unwrap();
    for name in [
        "report.csv",
        "uncertainty_gbaf.svg",
        "uncertainty_dbf.svg",
        "gbaf/loss_history_0.csv",
        "gbaf/loss_history_1.csv",
        "dbf/loss_history_0.csv",
        "dbf/loss_history_1.csv",
    ] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs between runs");
    }

    let strip = |text: String| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip(read(&a, "report.json")), strip(read(&b, "report.json")));
}
