//! Evaluation, oracle, benchmarks and run orchestration.

mod bench;
mod config;
mod eval;
mod oracle;
mod report;
mod run;

pub use bench::{mean_sphere_distance, BenchmarkEvaluator, BenchmarkProblem};
pub use config::{RunConfig, SpeciesKind, WorkloadSource};
pub use eval::QuantEvaluator;
pub use oracle::{enumerate_configs, exhaustive_oracle, search_space_size, ORACLE_LIMIT};
pub use report::{ParetoReport, ParetoRow};
pub use run::{
    build_species, prepare_workload, run, run_benchmark, run_with_workload, RunArtifacts, RunMetadata,
    BITOPS_CONVENTION,
};
