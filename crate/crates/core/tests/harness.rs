use std::sync::{Arc, OnceLock};

use nemo::bits::{BitConfig, BitSet};
use nemo::harness::{exhaustive_oracle, prepare_workload, QuantEvaluator, RunConfig, WorkloadSource, run_with_workload};
use nemo::workload::{PreparedWorkload, Split};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> Arc<PreparedWorkload> {
    static TINY: OnceLock<Arc<PreparedWorkload>> = OnceLock::new();
    TINY.get_or_init(|| Arc::new(prepare_workload(&WorkloadSource::Tiny, 0).unwrap())).clone()
}

#[test]
fn ten_copies_compute_once() {
    let ev = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 4).unwrap();
    let configs = vec![BitConfig(vec![2, 4, 8, 4]); 10];
    let out = ev.parallel_evaluate(&configs);
    assert_eq!(ev.computed(), 1);
    let first = out[0].as_ref().unwrap();
    assert!(out.iter().all(|r| r.as_ref().unwrap() == first));
    assert_eq!(ev.cached(&configs[0]).as_ref(), Some(first));
}

#[test]
fn empty_batch() {
    let ev = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 2).unwrap();
    assert!(ev.parallel_evaluate(&[]).is_empty());
    assert_eq!(ev.computed(), 0);
}

#[test]
fn thread_count_does_not_change_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let choices = [2u32, 3, 4, 5, 6, 7, 8];
    let configs: Vec<BitConfig> =
        (0..50).map(|_| BitConfig((0..4).map(|_| choices[rng.random_range(0..7)]).collect())).collect();
    let one = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 1).unwrap().evaluate_configs(&configs);
    let eight = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 8).unwrap().evaluate_configs(&configs);
    assert_eq!(one, eight);
}

#[test]
fn cached_matches_fresh() {
    let cfg = BitConfig(vec![8, 2, 4, 8]);
    let warm = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 1).unwrap();
    let a = warm.evaluate_configs(std::slice::from_ref(&cfg));
    let b = warm.evaluate_configs(std::slice::from_ref(&cfg));
    let fresh = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 1).unwrap().evaluate_configs(&[cfg]);
    assert_eq!(a, b);
    assert_eq!(a, fresh);
}

#[test]
fn oracle_enumerates_81_and_is_non_dominated() {
    let ev = QuantEvaluator::new(tiny(), Split::Evaluation, 1, 4).unwrap();
    let (report, n) = exhaustive_oracle(&ev, &BitSet::new(vec![2, 4, 8]).unwrap()).unwrap();
    assert_eq!(n, 81);
    assert!(report.is_mutually_non_dominated());
    assert!(!report.is_empty());
}

#[test]
fn oracle_refuses_large_spaces() {
    let small = Arc::new(prepare_workload(&WorkloadSource::Small, 0).unwrap());
    let ev = QuantEvaluator::new(small, Split::Evaluation, 1, 1).unwrap();
    let err = exhaustive_oracle(&ev, &BitSet::new(vec![2, 4, 8]).unwrap()).unwrap_err();
    assert!(err.to_string().contains("43046721"), "{err}");
}

#[test]
fn telemetry_has_one_record_per_species_per_generation() {
    let cfg = RunConfig::from_json(r#"{"engine": {"max_generations": 5}, "seed": 3}"#).unwrap();
    let run = run_with_workload(&cfg, tiny()).unwrap();
    let lines: Vec<serde_json::Value> =
        run.telemetry_jsonl().unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), run.outcome.history.len());
    for rec in &run.outcome.history {
        assert_eq!(rec.species.len(), 4);
        assert_eq!(rec.species.iter().map(|s| s.allocation).sum::<usize>(), 50);
    }
    assert!(run.report.is_mutually_non_dominated());
    assert_eq!(run.metadata.reference_points, 28);
}
