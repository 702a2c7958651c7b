//! Real-coded direct-search species.
//!
//! Genomes are one real per quantizer inside `[min bit, max bit]`. Variation
//! uses simulated binary crossover and bounded polynomial mutation; decoding
//! snaps each coordinate onto the allowed bit set either to the nearest
//! width or to the nearest width not above the value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{BitConfig, BitSet};
use crate::engine::{EngineRng, Genome, SpeciesOps};
use crate::error::{NemoError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    Nearest,
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectGenome {
    pub values: Vec<f64>,
    pub rounding: RoundingMode,
}

impl DirectGenome {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Snaps one continuous coordinate onto the allowed set.
pub fn decode_value(value: f64, rounding: RoundingMode, bits: &BitSet) -> u32 {
    let allowed = bits.as_slice();
    match rounding {
        RoundingMode::Nearest => {
            let mut best = allowed[0];
            let mut best_dist = f64::INFINITY;
            for &b in allowed {
                let d = (value - b as f64).abs();
                // `<=` lets the higher width win exact half-way ties
                if d <= best_dist {
                    best = b;
                    best_dist = d;
                }
            }
            best
        }
        RoundingMode::Floor => allowed
            .iter()
            .rev()
            .copied()
            .find(|&b| b as f64 <= value)
            .unwrap_or(allowed[0]),
    }
}

pub fn decode_direct(genome: &DirectGenome, bits: &BitSet) -> BitConfig {
    BitConfig(
        genome
            .values
            .iter()
            .map(|&v| decode_value(v, genome.rounding, bits))
            .collect(),
    )
}

/// Simulated binary crossover over every coordinate; each coordinate pair
/// is exchanged between the children with probability 1/2, and children are
/// clamped to `[lower, upper]`.
pub fn sbx_crossover(
    p1: &DirectGenome,
    p2: &DirectGenome,
    eta_c: f64,
    (lower, upper): (f64, f64),
    rng: &mut impl Rng,
) -> Result<(DirectGenome, DirectGenome)> {
    if p1.len() != p2.len() {
        return Err(NemoError::DimensionMismatch { expected: p1.len(), got: p2.len() });
    }
    if p1.rounding != p2.rounding {
        return Err(NemoError::contract("crossover between rounding modes"));
    }
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    for i in 0..p1.len() {
        let (x1, x2) = (p1.values[i], p2.values[i]);
        let u: f64 = rng.random();
        let beta = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta_c + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta_c + 1.0))
        };
        let (mid, half) = (0.5 * (x1 + x2), 0.5 * (x1 - x2));
        let (a, b) = ((mid + beta * half).clamp(lower, upper), (mid - beta * half).clamp(lower, upper));
        // per-coordinate exchange between the two children
        let (a, b) = if rng.random_bool(0.5) { (b, a) } else { (a, b) };
        c1.values[i] = a;
        c2.values[i] = b;
    }
    Ok((c1, c2))
}

/// Bounded polynomial mutation applied to each coordinate with probability
/// `per_gene_prob`.
pub fn polynomial_mutation(
    genome: &DirectGenome,
    eta_m: f64,
    per_gene_prob: f64,
    (lower, upper): (f64, f64),
    rng: &mut impl Rng,
) -> DirectGenome {
    let mut out = genome.clone();
    let span = upper - lower;
    let pow = 1.0 / (eta_m + 1.0);
    for x in out.values.iter_mut() {
        if !rng.random_bool(per_gene_prob) {
            continue;
        }
        let d1 = (*x - lower) / span;
        let d2 = (upper - *x) / span;
        let r: f64 = rng.random();
        let dq = if r < 0.5 {
            let v = 2.0 * r + (1.0 - 2.0 * r) * (1.0 - d1).powf(eta_m + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * (1.0 - d2).powf(eta_m + 1.0);
            1.0 - v.powf(pow)
        };
        *x = (*x + dq * span).clamp(lower, upper);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DirectParams {
    pub eta_c: f64,
    pub eta_m: f64,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Per-coordinate mutation rate; `None` means `1 / genome length`.
    pub per_gene_prob: Option<f64>,
}

impl Default for DirectParams {
    fn default() -> Self {
        Self {
            eta_c: 20.0,
            eta_m: 20.0,
            crossover_prob: 1.0,
            mutation_prob: 1.0,
            per_gene_prob: None,
        }
    }
}

/// Continuous (nearest rounding) or floor-rounding direct search.
#[derive(Debug, Clone)]
pub struct DirectSpecies {
    name: String,
    rounding: RoundingMode,
    bits: BitSet,
    genome_len: usize,
    params: DirectParams,
}

impl DirectSpecies {
    pub fn new(
        name: impl Into<String>,
        rounding: RoundingMode,
        bits: BitSet,
        genome_len: usize,
        params: DirectParams,
    ) -> Result<Self> {
        if genome_len == 0 {
            return Err(NemoError::config("direct genome length must be positive"));
        }
        for (what, p) in [("crossover_prob", params.crossover_prob), ("mutation_prob", params.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NemoError::config(format!("{what} must lie in [0, 1], got {p}")));
            }
        }
        if let Some(p) = params.per_gene_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(NemoError::config(format!("per_gene_prob must lie in [0, 1], got {p}")));
            }
        }
        Ok(Self { name: name.into(), rounding, bits, genome_len, params })
    }

    pub fn continuous(bits: BitSet, genome_len: usize) -> Self {
        Self::new("continuous", RoundingMode::Nearest, bits, genome_len, DirectParams::default())
            .expect("default parameters are valid")
    }

    pub fn floor(bits: BitSet, genome_len: usize) -> Self {
        Self::new("floor", RoundingMode::Floor, bits, genome_len, DirectParams::default())
            .expect("default parameters are valid")
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.bits.min() as f64, self.bits.max() as f64)
    }

    fn per_gene_prob(&self) -> f64 {
        self.params.per_gene_prob.unwrap_or(1.0 / self.genome_len as f64)
    }

    fn unwrap<'a>(&self, g: &'a Genome) -> Result<&'a DirectGenome> {
        match g {
            Genome::Direct(d) if d.len() == self.genome_len => Ok(d),
            Genome::Direct(d) => Err(NemoError::DimensionMismatch { expected: self.genome_len, got: d.len() }),
            _ => Err(NemoError::contract(format!("species {} received a non-direct genome", self.name))),
        }
    }
}

impl SpeciesOps for DirectSpecies {
    fn name(&self) -> &str {
        &self.name
    }

    fn random_genome(&self, rng: &mut EngineRng) -> Genome {
        let (lo, hi) = self.bounds();
        Genome::Direct(DirectGenome {
            values: (0..self.genome_len).map(|_| rng.random_range(lo..=hi)).collect(),
            rounding: self.rounding,
        })
    }

    fn crossover(&self, a: &Genome, b: &Genome, rng: &mut EngineRng) -> Result<(Genome, Genome)> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        if !rng.random_bool(self.params.crossover_prob) {
            return Ok((Genome::Direct(a.clone()), Genome::Direct(b.clone())));
        }
        let (c1, c2) = sbx_crossover(a, b, self.params.eta_c, self.bounds(), rng)?;
        Ok((Genome::Direct(c1), Genome::Direct(c2)))
    }

    fn mutate(&self, g: &Genome, rng: &mut EngineRng) -> Result<Genome> {
        let g = self.unwrap(g)?;
        if !rng.random_bool(self.params.mutation_prob) {
            return Ok(Genome::Direct(g.clone()));
        }
        Ok(Genome::Direct(polynomial_mutation(
            g,
            self.params.eta_m,
            self.per_gene_prob(),
            self.bounds(),
            rng,
        )))
    }

    fn decode(&self, g: &Genome) -> Result<BitConfig> {
        Ok(decode_direct(self.unwrap(g)?, &self.bits))
    }
}
