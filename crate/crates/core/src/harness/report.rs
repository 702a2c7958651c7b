use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::bits::BitConfig;
use crate::error::Result;
use crate::mo::dominates_slice;
use crate::workload::ObjectiveReport;

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRow {
    pub species: String,
    pub generation: usize,
    pub report: ObjectiveReport,
    pub bits: BitConfig,
}

/// Exported Pareto set. Rows are kept in a canonical order (objectives,
/// then bits) so the CSV is reproducible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoReport {
    rows: Vec<ParetoRow>,
}

impl ParetoReport {
    pub fn new(mut rows: Vec<ParetoRow>) -> Self {
        rows.sort_by(|a, b| {
            let (oa, ob) = (a.report.objectives(), b.report.objectives());
            oa.values()
                .iter()
                .zip(ob.values())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.bits.cmp(&b.bits))
                .then_with(|| a.species.cmp(&b.species))
        });
        Self { rows }
    }

    pub fn rows(&self) -> &[ParetoRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_mutually_non_dominated(&self) -> bool {
        let objs: Vec<_> = self.rows.iter().map(|r| r.report.objectives()).collect();
        objs.iter().enumerate().all(|(i, a)| {
            objs.iter().enumerate().all(|(j, b)| i == j || !dominates_slice(b.values(), a.values()))
        })
    }

    pub fn to_csv(&self) -> String {
        let width = self.rows.iter().map(|r| r.bits.len()).max().unwrap_or(0);
        let mut out = String::from("id,species,generation,top1,topk,model_ratio,bitops_ratio");
        for i in 0..width {
            let _ = write!(out, ",b{i}");
        }
        out.push('\n');
        for (id, r) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "{id},{},{},{},{},{},{}",
                r.species, r.generation, r.report.top1, r.report.topk, r.report.model_ratio, r.report.bitops_ratio
            );
            for b in r.bits.as_slice() {
                let _ = write!(out, ",{b}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(top: f64, m: f64, b: &[u32]) -> ParetoRow {
        ParetoRow {
            species: "floor".into(),
            generation: 3,
            report: ObjectiveReport { top1: top, topk: top, model_ratio: m, bitops_ratio: m * m },
            bits: BitConfig(b.to_vec()),
        }
    }

    #[test]
    fn csv_layout_and_order() {
        let rep = ParetoReport::new(vec![row(0.9, 0.25, &[8, 8]), row(0.5, 0.0625, &[2, 2])]);
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "id,species,generation,top1,topk,model_ratio,bitops_ratio,b0,b1");
        assert_eq!(lines[1], "0,floor,3,0.9,0.9,0.25,0.0625,8,8");
        assert_eq!(lines[2], "1,floor,3,0.5,0.5,0.0625,0.00390625,2,2");
        assert!(rep.is_mutually_non_dominated());
    }

    #[test]
    fn detects_dominance() {
        let rep = ParetoReport::new(vec![row(0.9, 0.25, &[8, 8]), row(0.5, 0.5, &[2, 2])]);
        assert!(!rep.is_mutually_non_dominated());
    }
}
