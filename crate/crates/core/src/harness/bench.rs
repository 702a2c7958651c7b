use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use crate::engine::{EvalRequest, Evaluator};
use crate::error::{NemoError, Result};
use crate::mo::ObjectiveVector;

/// Analytic test problems over direct genomes whose coordinates live in
/// `[2, 8]`; each coordinate maps linearly to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkProblem {
    /// `f1 = mean(x^2)`, `f2 = mean((x - 1)^2)`.
    Sphere2d,
    /// Three-objective DTLZ2; its front is the unit-sphere octant.
    Dtlz2_3d,
}

impl FromStr for BenchmarkProblem {
    type Err = NemoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere-2d" => Ok(Self::Sphere2d),
            "dtlz2-3d" => Ok(Self::Dtlz2_3d),
            other => Err(NemoError::UnknownProblem(other.to_string())),
        }
    }
}

impl BenchmarkProblem {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere2d => "sphere-2d",
            Self::Dtlz2_3d => "dtlz2-3d",
        }
    }

    pub fn num_objectives(self) -> usize {
        match self {
            Self::Sphere2d => 2,
            Self::Dtlz2_3d => 3,
        }
    }

    pub fn genome_len(self) -> usize {
        match self {
            Self::Sphere2d => 4,
            Self::Dtlz2_3d => 12,
        }
    }

    pub fn evaluate(self, genome: &[f64]) -> Result<ObjectiveVector> {
        if genome.is_empty() {
            return Err(NemoError::EmptyInput("benchmark genome"));
        }
        let x: Vec<f64> = genome.iter().map(|v| ((v - 2.0) / 6.0).clamp(0.0, 1.0)).collect();
        let values = match self {
            Self::Sphere2d => {
                let n = x.len() as f64;
                vec![x.iter().map(|v| v * v).sum::<f64>() / n, x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / n]
            }
            Self::Dtlz2_3d => {
                if x.len() < 3 {
                    return Err(NemoError::DimensionMismatch { expected: 3, got: x.len() });
                }
                let g: f64 = x[2..].iter().map(|v| (v - 0.5).powi(2)).sum();
                let (a, b) = (x[0] * FRAC_PI_2, x[1] * FRAC_PI_2);
                let r = 1.0 + g;
                vec![r * a.cos() * b.cos(), r * a.cos() * b.sin(), r * a.sin()]
            }
        };
        ObjectiveVector::new(values)
    }
}

pub struct BenchmarkEvaluator {
    pub problem: BenchmarkProblem,
}

impl Evaluator for BenchmarkEvaluator {
    fn num_objectives(&self) -> usize {
        self.problem.num_objectives()
    }

    fn keyed_by_bits(&self) -> bool {
        false
    }

    fn evaluate_batch(&self, requests: &[EvalRequest<'_>]) -> Vec<Result<ObjectiveVector>> {
        requests
            .iter()
            .map(|r| match r.genome.as_direct() {
                Some(d) => self.problem.evaluate(&d.values),
                None => Err(NemoError::contract("benchmark problems need direct genomes")),
            })
            .collect()
    }
}

/// Mean of `|Σ f_i² − 1|` over a set of objective vectors.
pub fn mean_sphere_distance(points: &[ObjectiveVector]) -> f64 {
    if points.is_empty() {
        return f64::NAN;
    }
    points.iter().map(|p| (p.values().iter().map(|v| v * v).sum::<f64>() - 1.0).abs()).sum::<f64>() / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dtlz2_optimum_on_sphere() {
        for (a, b) in [(2.0, 2.0), (5.0, 3.5), (8.0, 8.0), (3.1, 7.7)] {
            let mut g = vec![a, b];
            g.extend(std::iter::repeat_n(5.0, 10));
            let f = BenchmarkProblem::Dtlz2_3d.evaluate(&g).unwrap();
            let s: f64 = f.values().iter().map(|v| v * v).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_midpoint() {
        let f = BenchmarkProblem::Sphere2d.evaluate(&[5.0; 4]).unwrap();
        assert_eq!(f.values(), &[0.25, 0.25]);
        let f = BenchmarkProblem::Sphere2d.evaluate(&[2.0, 8.0, 2.0, 8.0]).unwrap();
        assert_eq!(f.values(), &[0.5, 0.5]);
    }

    #[test]
    fn names() {
        assert_eq!("dtlz2-3d".parse::<BenchmarkProblem>().unwrap(), BenchmarkProblem::Dtlz2_3d);
        assert!(matches!("zdt1".parse::<BenchmarkProblem>(), Err(NemoError::UnknownProblem(_))));
    }

    #[test]
    fn deterministic() {
        let g: Vec<f64> = (0..12).map(|i| 2.0 + i as f64 * 0.5).collect();
        assert_eq!(
            BenchmarkProblem::Dtlz2_3d.evaluate(&g).unwrap(),
            BenchmarkProblem::Dtlz2_3d.evaluate(&g).unwrap()
        );
    }
}
