use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use log::warn;
use parking_lot::RwLock;
use rayon::prelude::*;

use crate::bits::BitConfig;
use crate::engine::{EvalRequest, Evaluator};
use crate::error::{NemoError, Result};
use crate::mo::ObjectiveVector;
use crate::workload::{evaluate_report, ObjectiveReport, PreparedWorkload, Split};

/// Cached, thread-pooled fitness evaluation of bit configurations against
/// one calibrated workload.
pub struct QuantEvaluator {
    prepared: Arc<PreparedWorkload>,
    split: Split,
    top_k: usize,
    pool: rayon::ThreadPool,
    cache: RwLock<HashMap<BitConfig, ObjectiveReport>>,
    computed: AtomicU64,
}

impl QuantEvaluator {
    pub fn new(prepared: Arc<PreparedWorkload>, split: Split, top_k: usize, threads: usize) -> Result<Self> {
        if !prepared.workload.is_calibrated() {
            return Err(NemoError::Uncalibrated);
        }
        if top_k == 0 || top_k > prepared.workload.num_classes() {
            return Err(NemoError::config(format!(
                "top_k must be in 1..={}, got {top_k}",
                prepared.workload.num_classes()
            )));
        }
        if threads == 0 {
            return Err(NemoError::config("threads must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| NemoError::config(format!("thread pool: {e}")))?;
        Ok(Self { prepared, split, top_k, pool, cache: RwLock::new(HashMap::new()), computed: AtomicU64::new(0) })
    }

    pub fn prepared(&self) -> &PreparedWorkload {
        &self.prepared
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Number of configurations actually run through the workload (cache misses).
    pub fn computed(&self) -> u64 {
        self.computed.load(Ordering::Relaxed)
    }

    pub fn cached(&self, bits: &BitConfig) -> Option<ObjectiveReport> {
        self.cache.read().get(bits).copied()
    }

    fn compute(&self, bits: &BitConfig) -> Result<ObjectiveReport> {
        self.computed.fetch_add(1, Ordering::Relaxed);
        let data = self.prepared.splits.get(self.split);
        evaluate_report(&self.prepared.workload, bits, data, self.top_k)
    }

    /// Evaluates a batch; results follow input order. Duplicate and
    /// previously seen configurations are served from the cache, so output
    /// does not depend on thread count or evaluation order.
    pub fn parallel_evaluate(&self, configs: &[BitConfig]) -> Vec<Result<ObjectiveReport>> {
        let mut missing: Vec<&BitConfig> = Vec::new();
        {
            let cache = self.cache.read();
            let mut seen = std::collections::HashSet::new();
            for c in configs {
                if !cache.contains_key(c) && seen.insert(c) {
                    missing.push(c);
                }
            }
        }
        let fresh: Vec<Result<ObjectiveReport>> = self.pool.install(|| missing.par_iter().map(|c| self.compute(c)).collect());

        let mut failures: HashMap<&BitConfig, String> = HashMap::new();
        {
            let mut cache = self.cache.write();
            for (c, r) in missing.iter().zip(fresh) {
                match r {
                    Ok(rep) => {
                        cache.insert((*c).clone(), rep);
                    }
                    Err(e) => {
                        failures.insert(c, e.to_string());
                    }
                }
            }
        }
        let cache = self.cache.read();
        configs
            .iter()
            .map(|c| match cache.get(c) {
                Some(r) => Ok(*r),
                None => Err(NemoError::Evaluation(
                    failures.get(c).cloned().unwrap_or_else(|| "missing result".to_string()),
                )),
            })
            .collect()
    }

    /// Objective vectors with failures replaced by worst-case fitness.
    pub fn evaluate_configs(&self, configs: &[BitConfig]) -> Vec<ObjectiveVector> {
        self.parallel_evaluate(configs)
            .into_iter()
            .zip(configs)
            .map(|(r, c)| match r {
                Ok(rep) => rep.objectives(),
                Err(e) => {
                    warn!("evaluation of {c:?} failed: {e}");
                    ObjectiveVector::worst(3)
                }
            })
            .collect()
    }
}

impl Evaluator for QuantEvaluator {
    fn num_objectives(&self) -> usize {
        3
    }

    fn evaluate_batch(&self, requests: &[EvalRequest<'_>]) -> Vec<Result<ObjectiveVector>> {
        let configs: Vec<BitConfig> = requests.iter().map(|r| r.bits.clone()).collect();
        self.parallel_evaluate(&configs).into_iter().map(|r| r.map(|rep| rep.objectives())).collect()
    }
}
