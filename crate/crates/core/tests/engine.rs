use nemo::bits::BitSet;
use nemo::direct::DirectSpecies;
use nemo::engine::{run_search, EngineConfig, SpeciesOps};
use nemo::harness::{BenchmarkEvaluator, BenchmarkProblem};

fn roster() -> Vec<Box<dyn SpeciesOps>> {
    let len = BenchmarkProblem::Dtlz2_3d.genome_len();
    vec![
        Box::new(DirectSpecies::continuous(BitSet::default(), len)),
        Box::new(DirectSpecies::floor(BitSet::default(), len)),
    ]
}

fn evaluator() -> BenchmarkEvaluator {
    BenchmarkEvaluator { problem: BenchmarkProblem::Dtlz2_3d }
}

#[test]
fn zero_generations_archives_initial_population() {
    let cfg = EngineConfig { max_generations: 0, ..EngineConfig::default() };
    let out = run_search(&cfg, roster(), &evaluator()).unwrap();
    assert!(!out.archive.is_empty());
    assert!(out.archive.is_mutually_non_dominated());
    assert_eq!(out.evaluations, cfg.population_size as u64);
}

#[test]
fn allocations_respect_bounds_every_generation() {
    let cfg = EngineConfig { seed: 5, max_generations: 30, ..EngineConfig::default() };
    let out = run_search(&cfg, roster(), &evaluator()).unwrap();
    for rec in &out.history[1..] {
        assert_eq!(rec.species.iter().map(|s| s.allocation).sum::<usize>(), cfg.population_size);
        assert!(rec.species.iter().all(|s| s.allocation >= cfg.min_species_size));
    }
    assert!(out.archive.is_mutually_non_dominated());
    let counts: Vec<u64> = out.history.iter().map(|r| r.evaluations).collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn same_seed_same_archive() {
    let cfg = EngineConfig { seed: 17, max_generations: 15, ..EngineConfig::default() };
    let a = run_search(&cfg, roster(), &evaluator()).unwrap();
    let b = run_search(&cfg, roster(), &evaluator()).unwrap();
    assert_eq!(a.archive.entries(), b.archive.entries());
    assert_eq!(a.history, b.history);
}

#[test]
fn too_small_population_is_a_config_error() {
    let cfg = EngineConfig { population_size: 6, min_species_size: 5, ..EngineConfig::default() };
    assert!(run_search(&cfg, roster(), &evaluator()).is_err());
}
