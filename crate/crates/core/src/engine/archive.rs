use serde::{Deserialize, Serialize};

use crate::bits::BitConfig;
use crate::mo::{dominates_slice, ObjectiveVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub bits: BitConfig,
    pub objectives: ObjectiveVector,
    pub species: usize,
    pub generation: usize,
}

/// Mutually non-dominated set of every evaluated solution seen so far.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    capacity: Option<usize>,
}

impl ParetoArchive {
    pub fn new(capacity: Option<usize>) -> Self {
        Self { entries: Vec::new(), capacity }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives.clone()).collect()
    }

    /// Inserts unless dominated or already present; evicts entries the new
    /// one dominates. Returns whether the entry was kept.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        let new = entry.objectives.values();
        for e in &self.entries {
            let old = e.objectives.values();
            if dominates_slice(old, new) || (old == new && e.bits == entry.bits) {
                return false;
            }
        }
        self.entries.retain(|e| !dominates_slice(new, e.objectives.values()));
        self.entries.push(entry);
        if let Some(cap) = self.capacity {
            while self.entries.len() > cap {
                self.evict_most_crowded();
            }
        }
        true
    }

    /// Drops the entry closest to its nearest neighbour in objective space.
    fn evict_most_crowded(&mut self) {
        let n = self.entries.len();
        let mut worst = (0, f64::INFINITY);
        for i in 0..n {
            let a = self.entries[i].objectives.values();
            let nearest = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let b = self.entries[j].objectives.values();
                    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min);
            if nearest < worst.1 {
                worst = (i, nearest);
            }
        }
        self.entries.remove(worst.0);
    }

    /// Share of entries contributed by each species.
    pub fn species_shares(&self, num_species: usize) -> Vec<f64> {
        let mut counts = vec![0usize; num_species];
        for e in &self.entries {
            if e.species < num_species {
                counts[e.species] += 1;
            }
        }
        let n = self.entries.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / n).collect()
    }

    pub fn is_mutually_non_dominated(&self) -> bool {
        self.entries.iter().all(|a| {
            self.entries
                .iter()
                .all(|b| !dominates_slice(b.objectives.values(), a.objectives.values()))
        })
    }
}
