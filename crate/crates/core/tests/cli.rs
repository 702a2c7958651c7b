use std::path::Path;
use std::process::{Command, Output};

fn nemo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nemo")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_eval_oracle_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("workload.json");
    let out = nemo(&["train-ref", "--arch", "tiny", "--seed", "0", "--out", s(&w)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let bits = dir.path().join("bits.json");
    std::fs::write(&bits, "[8, 8, 8, 8]").unwrap();
    let out = nemo(&["eval", "--workload", s(&w), "--bit-config", s(&bits)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("model_ratio 0.25"), "{text}");

    let csv = dir.path().join("exact.csv");
    let out = nemo(&["oracle", "--workload", s(&w), "--bits", "2,4,8", "--out", s(&csv)]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("id,species,generation,top1"));
}

#[test]
fn search_is_reproducible_and_non_dominated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"engine": {"max_generations": 10}, "seed": 4}"#).unwrap();
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let d = dir.path().join(name);
        let out = nemo(&["search", "--config", s(&cfg), "--out-dir", s(&d)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for f in ["pareto.csv", "telemetry.jsonl", "run-metadata.json"] {
            assert!(d.join(f).exists(), "{f}");
        }
        csvs.push(std::fs::read_to_string(d.join("pareto.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);

    let rows: Vec<Vec<f64>> = csvs[0]
        .lines()
        .skip(1)
        .map(|l| {
            // error objective is 1 - topk; the ratios are minimized directly
            let v: Vec<f64> = l.split(',').skip(4).take(3).map(|v| v.parse().unwrap()).collect();
            vec![1.0 - v[0], v[1], v[2]]
        })
        .collect();
    assert!(!rows.is_empty());
    for a in &rows {
        for b in &rows {
            let dom = a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
            assert!(!dom);
        }
    }
}

#[test]
fn bench_runs() {
    let out = nemo(&["bench", "--problem", "dtlz2-3d", "--generations", "5", "--seed", "1"]);
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"species": [], "seed": 1}"#).unwrap();
    let out = nemo(&["search", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(nemo(&["search", "--config", s(&cfg), "--out-dir", s(dir.path())]).status.code(), Some(2));
    assert_eq!(nemo(&["bench", "--problem", "nope", "--generations", "1"]).status.code(), Some(2));
    assert_eq!(nemo(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let bits = dir.path().join("bits.json");
    std::fs::write(&bits, "[8, 8, 8, 8]").unwrap();
    let out = nemo(&["eval", "--workload", s(&missing), "--bit-config", s(&bits)]);
    assert_eq!(out.status.code(), Some(3));
}
