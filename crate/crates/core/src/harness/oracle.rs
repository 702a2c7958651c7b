use crate::bits::{BitConfig, BitSet};
use crate::error::{NemoError, Result};
use crate::mo::dominates_slice;

use super::eval::QuantEvaluator;
use super::report::{ParetoReport, ParetoRow};

pub const ORACLE_LIMIT: f64 = 1e5;

pub fn search_space_size(bits: &BitSet, quantizers: usize) -> f64 {
    (bits.len() as f64).powi(quantizers as i32)
}

/// Every configuration over `bits`, in lexicographic order.
pub fn enumerate_configs(bits: &BitSet, quantizers: usize) -> Result<Vec<BitConfig>> {
    let size = search_space_size(bits, quantizers);
    if size > ORACLE_LIMIT {
        return Err(NemoError::SpaceTooLarge { size, limit: ORACLE_LIMIT });
    }
    let widths = bits.as_slice();
    let mut idx = vec![0usize; quantizers];
    let mut out = Vec::with_capacity(size as usize);
    loop {
        out.push(BitConfig(idx.iter().map(|&i| widths[i]).collect()));
        let mut pos = quantizers;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < widths.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Exact Pareto set by exhaustive enumeration and brute-force filtering.
/// Returns the report and the number of configurations evaluated.
pub fn exhaustive_oracle(evaluator: &QuantEvaluator, bits: &BitSet) -> Result<(ParetoReport, usize)> {
    let quantizers = evaluator.prepared().workload.num_quantizers();
    let configs = enumerate_configs(bits, quantizers)?;
    let reports = evaluator
        .parallel_evaluate(&configs)
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let objs: Vec<_> = reports.iter().map(|r| r.objectives()).collect();
    let rows = (0..configs.len())
        .filter(|&i| !objs.iter().any(|o| dominates_slice(o.values(), objs[i].values())))
        .map(|i| ParetoRow { species: "oracle".into(), generation: 0, report: reports[i], bits: configs[i].clone() })
        .collect();
    Ok((ParetoReport::new(rows), configs.len()))
}
