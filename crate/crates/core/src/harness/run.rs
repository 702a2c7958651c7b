use std::fs;
use std::path::Path;
use std::sync::Arc;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::bench::{BenchmarkEvaluator, BenchmarkProblem};
use super::config::{RunConfig, SpeciesKind, WorkloadSource};
use super::eval::QuantEvaluator;
use super::oracle::search_space_size;
use super::report::{ParetoReport, ParetoRow};
use crate::bits::BitSet;
use crate::direct::{DirectParams, DirectSpecies, RoundingMode};
use crate::engine::{Engine, EngineConfig, SearchOutcome, SpeciesOps};
use crate::error::Result;
use crate::gnn::GraphLayerKind;
use crate::neuro::{NeuroSpecies, SsneConfig};
use crate::workload::{load_workload, PreparedWorkload, ReferenceArch};

pub const BITOPS_CONVENTION: &str = "sum_l M_l * b_w[l] * b_a[l] / (1024 * sum_l M_l)";

/// Trains a bundled network or loads a workload file, then calibrates.
pub fn prepare_workload(source: &WorkloadSource, seed: u64) -> Result<PreparedWorkload> {
    match source {
        WorkloadSource::Tiny => PreparedWorkload::reference(&ReferenceArch::tiny(), seed),
        WorkloadSource::Small => PreparedWorkload::reference(&ReferenceArch::small(), seed),
        WorkloadSource::File(path) => PreparedWorkload::from_workload(load_workload(path)?),
    }
}

pub fn build_species(
    kinds: &[SpeciesKind],
    prepared: &PreparedWorkload,
    bits: &BitSet,
    direct: &DirectParams,
    ssne: &SsneConfig,
) -> Result<Vec<Box<dyn SpeciesOps>>> {
    let n = prepared.workload.num_quantizers();
    let graph = Arc::new(prepared.graph()?);
    kinds
        .iter()
        .map(|&kind| -> Result<Box<dyn SpeciesOps>> {
            Ok(match kind {
                SpeciesKind::Continuous => {
                    Box::new(DirectSpecies::new(kind.name(), RoundingMode::Nearest, bits.clone(), n, direct.clone())?)
                }
                SpeciesKind::Floor => {
                    Box::new(DirectSpecies::new(kind.name(), RoundingMode::Floor, bits.clone(), n, direct.clone())?)
                }
                SpeciesKind::Gcn => {
                    Box::new(NeuroSpecies::with_defaults(GraphLayerKind::Gcn, graph.clone(), bits.clone(), ssne.clone())?)
                }
                SpeciesKind::GraphUnet => Box::new(NeuroSpecies::with_defaults(
                    GraphLayerKind::GraphUnet,
                    graph.clone(),
                    bits.clone(),
                    ssne.clone(),
                )?),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub workload: String,
    pub workload_seed: u64,
    pub quantizers: usize,
    pub bit_set: BitSet,
    pub top_k: usize,
    pub threads: usize,
    pub species: Vec<String>,
    pub population_size: usize,
    pub generations: usize,
    pub reference_point_target: usize,
    pub reference_points: usize,
    pub bitops_convention: String,
    /// Every evaluator invocation, including the initial population.
    pub evaluations: u64,
    pub initial_evaluations_counted: bool,
    /// Distinct configurations run through the workload.
    pub unique_configurations: u64,
    pub search_space_size: f64,
    pub archive_size: usize,
}

pub struct RunArtifacts {
    pub outcome: SearchOutcome,
    pub report: ParetoReport,
    pub metadata: RunMetadata,
}

impl RunArtifacts {
    pub fn telemetry_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for rec in &self.outcome.history {
            out.push_str(&serde_json::to_string(rec)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Writes `pareto.csv`, `telemetry.jsonl` and `run-metadata.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.report.write_csv(&dir.join("pareto.csv"))?;
        fs::write(dir.join("telemetry.jsonl"), self.telemetry_jsonl()?)?;
        fs::write(dir.join("run-metadata.json"), serde_json::to_string_pretty(&self.metadata)? + "\n")?;
        Ok(())
    }
}

/// Runs a search against an already prepared workload.
pub fn run_with_workload(cfg: &RunConfig, prepared: Arc<PreparedWorkload>) -> Result<RunArtifacts> {
    cfg.validate()?;
    let species = build_species(&cfg.species, &prepared, &cfg.bit_set, &cfg.direct, &cfg.ssne)?;
    let evaluator = QuantEvaluator::new(prepared.clone(), cfg.split, cfg.top_k, cfg.threads)?;
    let engine_cfg = cfg.engine_config();
    let mut engine = Engine::new(engine_cfg.clone(), species, &evaluator)?;
    for g in 0..engine_cfg.max_generations {
        let rec = engine.run_generation()?;
        if (g + 1) % 10 == 0 {
            info!("generation {}: archive {} r2 {:.5}", rec.generation, rec.archive_size, rec.archive_r2);
        }
    }
    let outcome = engine.into_outcome();

    let rows = outcome
        .archive
        .entries()
        .iter()
        .filter_map(|e| match evaluator.cached(&e.bits) {
            Some(report) => Some(ParetoRow {
                species: outcome.species_names[e.species].clone(),
                generation: e.generation,
                report,
                bits: e.bits.clone(),
            }),
            None => {
                warn!("archive entry {:?} has no successful evaluation; skipped", e.bits);
                None
            }
        })
        .collect();
    let report = ParetoReport::new(rows);
    let quantizers = prepared.workload.num_quantizers();
    let metadata = RunMetadata {
        seed: cfg.seed,
        workload: cfg.workload.clone(),
        workload_seed: cfg.workload_seed,
        quantizers,
        bit_set: cfg.bit_set.clone(),
        top_k: cfg.top_k,
        threads: cfg.threads,
        species: outcome.species_names.clone(),
        population_size: engine_cfg.population_size,
        generations: engine_cfg.max_generations,
        reference_point_target: engine_cfg.reference_point_target,
        reference_points: outcome.reference_points,
        bitops_convention: BITOPS_CONVENTION.into(),
        evaluations: outcome.evaluations,
        initial_evaluations_counted: true,
        unique_configurations: evaluator.computed(),
        search_space_size: search_space_size(&cfg.bit_set, quantizers),
        archive_size: outcome.archive.len(),
    };
    Ok(RunArtifacts { outcome, report, metadata })
}

pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let prepared = prepare_workload(&cfg.workload_source(), cfg.workload_seed)?;
    run_with_workload(cfg, Arc::new(prepared))
}

/// Engine-only run on an analytic problem with the two direct species.
pub fn run_benchmark(problem: BenchmarkProblem, engine: &EngineConfig) -> Result<SearchOutcome> {
    let bits = BitSet::default();
    let n = problem.genome_len();
    let species: Vec<Box<dyn SpeciesOps>> = vec![
        Box::new(DirectSpecies::continuous(bits.clone(), n)),
        Box::new(DirectSpecies::floor(bits, n)),
    ];
    let evaluator = BenchmarkEvaluator { problem };
    crate::engine::run_search(engine, species, &evaluator)
}
