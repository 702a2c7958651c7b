//! Species-partitioned evolutionary loop.
//!
//! Each generation every species doubles its membership with offspring, the
//! offspring are evaluated in one batch, each species is scored by the R2
//! indicator of its own objective set, an upper-confidence-bound score turns
//! those utilities into population shares, and each species keeps the
//! best-ranked members of the combined pool up to its share. Species that
//! fall short are topped up with fresh mutants of their survivors.

mod alloc;
mod archive;

use std::collections::HashSet;
use std::sync::Arc;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitConfig;
use crate::direct::DirectGenome;
use crate::error::{NemoError, Result};
use crate::gnn::GnnGenome;
use crate::mo::{nsga3_rank_order, uniform_weight_vectors, ObjectiveVector, UtopianPoint, WeightVectorSet};

pub use alloc::{allocate_sizes, species_utility, ucb_scores, SpeciesStats};
pub use archive::{ArchiveEntry, ParetoArchive};

/// The single generator every stochastic step draws from.
pub type EngineRng = ChaCha8Rng;

/// Species-owned encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum Genome {
    Direct(DirectGenome),
    Neural(GnnGenome),
}

impl Genome {
    pub fn as_direct(&self) -> Option<&DirectGenome> {
        match self {
            Genome::Direct(d) => Some(d),
            Genome::Neural(_) => None,
        }
    }
}

/// Variation and decoding operators of one species.
pub trait SpeciesOps: Send + Sync {
    fn name(&self) -> &str;
    fn random_genome(&self, rng: &mut EngineRng) -> Genome;
    fn crossover(&self, a: &Genome, b: &Genome, rng: &mut EngineRng) -> Result<(Genome, Genome)>;
    fn mutate(&self, g: &Genome, rng: &mut EngineRng) -> Result<Genome>;
    fn decode(&self, g: &Genome) -> Result<BitConfig>;
}

#[derive(Debug, Clone)]
pub struct Individual {
    genome: Arc<Genome>,
    species: usize,
    fitness: Option<ObjectiveVector>,
    bits: BitConfig,
    birth_generation: usize,
}

impl Individual {
    pub fn genome(&self) -> &Genome {
        &self.genome
    }

    pub fn species(&self) -> usize {
        self.species
    }

    pub fn fitness(&self) -> Option<&ObjectiveVector> {
        self.fitness.as_ref()
    }

    pub fn bits(&self) -> &BitConfig {
        &self.bits
    }

    pub fn birth_generation(&self) -> usize {
        self.birth_generation
    }

    fn new(ops: &dyn SpeciesOps, genome: Genome, species: usize, generation: usize) -> Result<Self> {
        let bits = ops.decode(&genome)?;
        Ok(Self { genome: Arc::new(genome), species, fitness: None, bits, birth_generation: generation })
    }

    fn objectives(&self) -> &ObjectiveVector {
        self.fitness.as_ref().expect("survivors are evaluated")
    }
}

/// One evaluation request handed to the [`Evaluator`].
pub struct EvalRequest<'a> {
    pub species: usize,
    pub genome: &'a Genome,
    pub bits: &'a BitConfig,
}

/// Fitness oracle. Implementations may evaluate a batch concurrently but
/// must return results in request order and be pure per request.
pub trait Evaluator: Sync {
    fn num_objectives(&self) -> usize;
    /// Whether equal decoded configurations always score the same. When
    /// true the engine steers offspring and survivors away from repeats.
    fn keyed_by_bits(&self) -> bool {
        true
    }
    fn evaluate_batch(&self, requests: &[EvalRequest<'_>]) -> Vec<Result<ObjectiveVector>>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub population_size: usize,
    pub initial_species_size: usize,
    pub min_species_size: usize,
    pub reference_point_target: usize,
    pub ucb_coefficient: f64,
    pub max_generations: usize,
    pub archive_capacity: Option<usize>,
    #[serde(skip)]
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            initial_species_size: 10,
            min_species_size: 5,
            reference_point_target: 25,
            ucb_coefficient: 0.9,
            max_generations: 100,
            archive_capacity: None,
            seed: 0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self, num_species: usize) -> Result<()> {
        if num_species == 0 {
            return Err(NemoError::config("species roster is empty"));
        }
        if self.min_species_size == 0 || self.initial_species_size == 0 {
            return Err(NemoError::config("species sizes must be positive"));
        }
        if self.population_size < num_species * self.min_species_size {
            return Err(NemoError::config(format!(
                "population_size {} is below {} species x min_species_size {}",
                self.population_size, num_species, self.min_species_size
            )));
        }
        if !(self.ucb_coefficient >= 0.0 && self.ucb_coefficient.is_finite()) {
            return Err(NemoError::config("ucb_coefficient must be finite and non-negative"));
        }
        if self.archive_capacity == Some(0) {
            return Err(NemoError::config("archive_capacity must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesRecord {
    pub species: String,
    pub raw_r2: f64,
    pub utility: f64,
    pub ucb: f64,
    pub allocation: usize,
    pub archive_share: f64,
    pub eval_count: u64,
}

/// Per-generation telemetry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub species: Vec<SpeciesRecord>,
    pub archive_size: usize,
    pub archive_r2: f64,
    pub evaluations: u64,
}

/// Creates `initial_species_size` fresh (unevaluated) individuals per species.
pub fn init_population(
    config: &EngineConfig,
    species: &[Box<dyn SpeciesOps>],
    rng: &mut EngineRng,
) -> Result<Vec<Vec<Individual>>> {
    config.validate(species.len())?;
    species
        .iter()
        .enumerate()
        .map(|(s, ops)| {
            (0..config.initial_species_size)
                .map(|_| Individual::new(ops.as_ref(), ops.random_genome(rng), s, 0))
                .collect()
        })
        .collect()
}

/// Mutation retries for a child that decodes to a configuration already
/// present among the parents or earlier siblings.
pub const DUPLICATE_RETRIES: usize = 200;

/// One offspring per member: random pairs are crossed, then every child is
/// mutated. A lone member yields a single mutated clone. With
/// `avoid_repeats`, children that repeat a known configuration are mutated
/// again, up to [`DUPLICATE_RETRIES`] times.
pub fn produce_offspring(
    ops: &dyn SpeciesOps,
    species: usize,
    members: &[Individual],
    generation: usize,
    avoid_repeats: bool,
    rng: &mut EngineRng,
) -> Result<Vec<Individual>> {
    let n = members.len();
    if n == 0 {
        return Err(NemoError::EmptyInput("species has no members"));
    }
    let mut known: HashSet<BitConfig> = members.iter().map(|m| m.bits.clone()).collect();
    let mut out = Vec::with_capacity(n);
    let mut push_novel = |child: &Genome, rng: &mut EngineRng, out: &mut Vec<Individual>| -> Result<()> {
        let mut ind = Individual::new(ops, ops.mutate(child, rng)?, species, generation)?;
        for _ in 0..if avoid_repeats { DUPLICATE_RETRIES } else { 0 } {
            if !known.contains(&ind.bits) {
                break;
            }
            ind = Individual::new(ops, ops.mutate(&ind.genome, rng)?, species, generation)?;
        }
        known.insert(ind.bits.clone());
        out.push(ind);
        Ok(())
    };
    if n == 1 {
        push_novel(members[0].genome(), rng, &mut out)?;
        return Ok(out);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut i = 0;
    while out.len() < n {
        let a = members[order[i % n]].genome();
        let b = members[order[(i + 1) % n]].genome();
        i += 2;
        let (c1, c2) = ops.crossover(a, b, rng)?;
        for c in [c1, c2] {
            if out.len() < n {
                push_novel(&c, rng, &mut out)?;
            }
        }
    }
    Ok(out)
}

/// Result of a full search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub archive: ParetoArchive,
    pub history: Vec<GenerationRecord>,
    pub species_names: Vec<String>,
    pub reference_points: usize,
    pub evaluations: u64,
}

pub struct Engine<'a, E: Evaluator + ?Sized> {
    config: EngineConfig,
    species: Vec<Box<dyn SpeciesOps>>,
    evaluator: &'a E,
    members: Vec<Vec<Individual>>,
    stats: Vec<SpeciesStats>,
    archive: ParetoArchive,
    weights: WeightVectorSet,
    utopia: UtopianPoint,
    rng: EngineRng,
    generation: usize,
    evaluations: u64,
    history: Vec<GenerationRecord>,
    check_archive: bool,
}

impl<'a, E: Evaluator + ?Sized> Engine<'a, E> {
    /// Builds the engine, creates and evaluates the initial population, and
    /// runs one allocation round so the population has its configured size.
    pub fn new(config: EngineConfig, species: Vec<Box<dyn SpeciesOps>>, evaluator: &'a E) -> Result<Self> {
        config.validate(species.len())?;
        let k = evaluator.num_objectives();
        let weights = uniform_weight_vectors(k, config.reference_point_target.max(k))?;
        let mut rng = EngineRng::seed_from_u64(config.seed);
        let members = init_population(&config, &species, &mut rng)?;
        let stats = species.iter().map(|_| SpeciesStats::new(config.initial_species_size)).collect();
        let mut engine = Self {
            archive: ParetoArchive::new(config.archive_capacity),
            config,
            species,
            evaluator,
            members: Vec::new(),
            stats,
            weights,
            utopia: UtopianPoint::zeros(k),
            rng,
            generation: 0,
            evaluations: 0,
            history: Vec::new(),
            check_archive: cfg!(debug_assertions),
        };
        let mut members = members;
        for group in members.iter_mut() {
            engine.evaluate(group)?;
        }
        engine.members = members;
        let pools = std::mem::take(&mut engine.members);
        engine.allocate_and_select(pools)?;
        Ok(engine)
    }

    /// Brute-force archive invariant check after every update.
    pub fn with_archive_checks(mut self, on: bool) -> Self {
        self.check_archive = on;
        self
    }

    pub fn members(&self) -> &[Vec<Individual>] {
        &self.members
    }

    pub fn stats(&self) -> &[SpeciesStats] {
        &self.stats
    }

    pub fn archive(&self) -> &ParetoArchive {
        &self.archive
    }

    pub fn history(&self) -> &[GenerationRecord] {
        &self.history
    }

    pub fn weights(&self) -> &WeightVectorSet {
        &self.weights
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name().to_string()).collect()
    }

    /// Evaluates every individual in `batch`, updates counts and the archive.
    fn evaluate(&mut self, batch: &mut [Individual]) -> Result<()> {
        if batch.is_empty() {
            return Ok(());
        }
        let k = self.evaluator.num_objectives();
        let requests: Vec<EvalRequest<'_>> = batch
            .iter()
            .map(|ind| EvalRequest { species: ind.species, genome: &ind.genome, bits: &ind.bits })
            .collect();
        let results = self.evaluator.evaluate_batch(&requests);
        if results.len() != batch.len() {
            return Err(NemoError::contract(format!(
                "evaluator returned {} results for {} requests",
                results.len(),
                batch.len()
            )));
        }
        for (ind, res) in batch.iter_mut().zip(results) {
            let fit = match res {
                Ok(v) if v.dim() == k => v,
                Ok(v) => {
                    warn!("evaluator returned {} objectives, expected {k}; using worst fitness", v.dim());
                    ObjectiveVector::worst(k)
                }
                Err(e) => {
                    warn!("evaluation of {:?} failed: {e}; using worst fitness", ind.bits);
                    ObjectiveVector::worst(k)
                }
            };
            self.stats[ind.species].eval_count += 1;
            self.evaluations += 1;
            self.archive.insert(ArchiveEntry {
                bits: ind.bits.clone(),
                objectives: fit.clone(),
                species: ind.species,
                generation: self.generation,
            });
            ind.fitness = Some(fit);
        }
        if self.check_archive && !self.archive.is_mutually_non_dominated() {
            return Err(NemoError::contract("archive lost mutual non-dominance"));
        }
        Ok(())
    }

    /// Utility, UCB, allocation, global ranking, per-species fill and top-up.
    fn allocate_and_select(&mut self, pools: Vec<Vec<Individual>>) -> Result<()> {
        let sets: Vec<Vec<ObjectiveVector>> = pools
            .iter()
            .map(|p| p.iter().map(|i| i.objectives().clone()).collect())
            .collect();
        let utilities = species_utility(&sets, &self.weights, &self.utopia)?;
        for (st, (raw, u)) in self.stats.iter_mut().zip(&utilities) {
            st.raw_r2 = *raw;
            st.utility = *u;
        }
        let scores = ucb_scores(&self.stats, self.config.ucb_coefficient);
        let alloc = allocate_sizes(&scores, self.config.population_size, self.config.min_species_size)?;
        for ((st, sc), a) in self.stats.iter_mut().zip(&scores).zip(&alloc) {
            st.ucb_score = *sc;
            st.allocation = *a;
        }

        let mut survivors = select_by_rank(pools, &alloc, &self.weights, self.evaluator.keyed_by_bits(), &mut self.rng)?;

        let mut topups = Vec::new();
        for (s, group) in survivors.iter().enumerate() {
            let ops = self.species[s].as_ref();
            for _ in group.len()..alloc[s] {
                let parent = &group[self.rng.random_range(0..group.len())];
                let child = ops.mutate(parent.genome(), &mut self.rng)?;
                topups.push(Individual::new(ops, child, s, self.generation)?);
            }
        }
        self.evaluate(&mut topups)?;
        for ind in topups {
            survivors[ind.species].push(ind);
        }
        self.members = survivors;
        self.record();
        Ok(())
    }

    fn record(&mut self) {
        let shares = self.archive.species_shares(self.species.len());
        let archive_r2 = if self.archive.is_empty() {
            f64::NAN
        } else {
            crate::mo::r2_indicator(&self.archive.objectives(), &self.weights, &self.utopia).unwrap_or(f64::NAN)
        };
        let species = self
            .species
            .iter()
            .zip(&self.stats)
            .zip(shares)
            .map(|((ops, st), share)| SpeciesRecord {
                species: ops.name().to_string(),
                raw_r2: st.raw_r2,
                utility: st.utility,
                ucb: st.ucb_score,
                allocation: st.allocation,
                archive_share: share,
                eval_count: st.eval_count,
            })
            .collect();
        self.history.push(GenerationRecord {
            generation: self.generation,
            species,
            archive_size: self.archive.len(),
            archive_r2,
            evaluations: self.evaluations,
        });
    }

    /// Runs one full generation and returns its telemetry record.
    pub fn run_generation(&mut self) -> Result<&GenerationRecord> {
        self.generation += 1;
        let repeats = self.evaluator.keyed_by_bits();
        let mut offspring = Vec::new();
        for (s, ops) in self.species.iter().enumerate() {
            offspring.push(produce_offspring(ops.as_ref(), s, &self.members[s], self.generation, repeats, &mut self.rng)?);
        }
        let mut flat: Vec<Individual> = offspring.into_iter().flatten().collect();
        self.evaluate(&mut flat)?;

        let mut pools = std::mem::take(&mut self.members);
        for ind in flat {
            pools[ind.species].push(ind);
        }
        self.allocate_and_select(pools)?;
        Ok(self.history.last().expect("recorded"))
    }

    pub fn into_outcome(self) -> SearchOutcome {
        SearchOutcome {
            species_names: self.species_names(),
            reference_points: self.weights.len(),
            evaluations: self.evaluations,
            archive: self.archive,
            history: self.history,
        }
    }
}

/// Ranks the combined pool once, then each species keeps the first
/// `alloc[s]` of its own members in that global order. Members decoding to
/// a configuration already held by a better-ranked member rank last.
fn select_by_rank(
    pools: Vec<Vec<Individual>>,
    alloc: &[usize],
    weights: &WeightVectorSet,
    demote_repeats: bool,
    rng: &mut EngineRng,
) -> Result<Vec<Vec<Individual>>> {
    let points: Vec<ObjectiveVector> = pools.iter().flatten().map(|i| i.objectives().clone()).collect();
    let order = nsga3_rank_order(&points, weights, rng)?;
    // repeats of an already ranked configuration go behind every unique one
    let bits: Vec<&BitConfig> = pools.iter().flatten().map(|i| i.bits()).collect();
    let mut seen = HashSet::new();
    let (unique, repeats): (Vec<usize>, Vec<usize>) =
        order.iter().partition(|&&i| !demote_repeats || seen.insert(bits[i]));
    let mut position = vec![0usize; points.len()];
    for (pos, &i) in unique.iter().chain(&repeats).enumerate() {
        position[i] = pos;
    }
    let mut offset = 0;
    let mut out = Vec::with_capacity(pools.len());
    for (s, pool) in pools.into_iter().enumerate() {
        let mut ranked: Vec<(usize, Individual)> = pool
            .into_iter()
            .enumerate()
            .map(|(i, ind)| (position[offset + i], ind))
            .collect();
        offset += ranked.len();
        ranked.sort_by_key(|(p, _)| *p);
        ranked.truncate(alloc[s]);
        out.push(ranked.into_iter().map(|(_, ind)| ind).collect());
    }
    Ok(out)
}

/// Runs `max_generations` generations from a fresh population.
pub fn run_search<E: Evaluator + ?Sized>(
    config: &EngineConfig,
    species: Vec<Box<dyn SpeciesOps>>,
    evaluator: &E,
) -> Result<SearchOutcome> {
    let mut engine = Engine::new(config.clone(), species, evaluator)?;
    for _ in 0..config.max_generations {
        engine.run_generation()?;
    }
    Ok(engine.into_outcome())
}
