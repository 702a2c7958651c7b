//! Python bindings for the nemo search engine and quantization workloads.

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use nemo::engine::{EngineConfig, SpeciesStats};
use nemo::harness::{self, BenchmarkProblem, QuantEvaluator, RunConfig};
use nemo::mo::{self, UtopianPoint, WeightVectorSet};
use nemo::workload::{self, PreparedWorkload, ReferenceArch, Split};
use nemo::{BitConfig, BitSet, NemoError, ObjectiveVector};

fn to_py(e: NemoError) -> PyErr {
    match e {
        NemoError::Io(io) => PyIOError::new_err(io.to_string()),
        NemoError::Evaluation(_) | NemoError::TrainingFailed { .. } | NemoError::Uncalibrated => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn vectors(points: Vec<Vec<f64>>) -> PyResult<Vec<ObjectiveVector>> {
    points.into_iter().map(|p| ObjectiveVector::new(p).map_err(to_py)).collect()
}

/// True if `a` Pareto-dominates `b` (minimization).
#[pyfunction]
fn dominates(a: Vec<f64>, b: Vec<f64>) -> PyResult<bool> {
    let (a, b) = (ObjectiveVector::new(a).map_err(to_py)?, ObjectiveVector::new(b).map_err(to_py)?);
    mo::dominates(&a, &b).map_err(to_py)
}

/// Fronts of point indices, best first.
#[pyfunction]
fn non_dominated_sort(points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<usize>>> {
    Ok(mo::non_dominated_sort(&vectors(points)?).map_err(to_py)?.fronts)
}

/// Das-Dennis simplex lattice with at least `target_count` vectors.
#[pyfunction]
fn uniform_weight_vectors(k: usize, target_count: usize) -> PyResult<Vec<Vec<f64>>> {
    let w = mo::uniform_weight_vectors(k, target_count).map_err(to_py)?;
    Ok(w.vectors)
}

/// R2 of `front` over `weights`, against `utopia` (zeros if omitted).
#[pyfunction]
#[pyo3(signature = (front, weights, utopia=None))]
fn r2_indicator(front: Vec<Vec<f64>>, weights: Vec<Vec<f64>>, utopia: Option<Vec<f64>>) -> PyResult<f64> {
    let weights = WeightVectorSet::from_vectors(weights).map_err(to_py)?;
    let utopia = UtopianPoint(utopia.unwrap_or_else(|| vec![0.0; weights.dim()]));
    mo::r2_indicator(&vectors(front)?, &weights, &utopia).map_err(to_py)
}

#[pyfunction]
fn ucb_scores(utilities: Vec<f64>, eval_counts: Vec<u64>, c: f64) -> PyResult<Vec<f64>> {
    if utilities.len() != eval_counts.len() {
        return Err(PyValueError::new_err("utilities and eval_counts differ in length"));
    }
    let stats: Vec<SpeciesStats> = utilities
        .iter()
        .zip(&eval_counts)
        .map(|(&utility, &eval_count)| SpeciesStats { utility, eval_count, ..SpeciesStats::new(1) })
        .collect();
    Ok(nemo::engine::ucb_scores(&stats, c))
}

#[pyfunction]
fn allocate_sizes(scores: Vec<f64>, population_size: usize, min_size: usize) -> PyResult<Vec<usize>> {
    nemo::engine::allocate_sizes(&scores, population_size, min_size).map_err(to_py)
}

#[pyfunction]
fn model_ratio_from_counts(params: Vec<usize>, bits: Vec<u32>) -> PyResult<f64> {
    workload::model_ratio_from_counts(&params, &BitConfig(bits)).map_err(to_py)
}

#[pyfunction]
fn bitops_ratio_from_counts(macs: Vec<usize>, bits: Vec<u32>) -> PyResult<f64> {
    workload::bitops_ratio_from_counts(&macs, &BitConfig(bits)).map_err(to_py)
}

/// Affine quantizer over `[x_min, x_max]` with `bits` bits.
#[pyclass(frozen)]
struct Quantizer(workload::Quantizer);

#[pymethods]
impl Quantizer {
    #[new]
    fn new(bits: u32, x_min: f64, x_max: f64) -> PyResult<Self> {
        workload::Quantizer::new(bits, x_min, x_max).map(Self).map_err(to_py)
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale()
    }

    #[getter]
    fn zero_point(&self) -> f64 {
        self.0.zero_point()
    }

    #[getter]
    fn max_level(&self) -> u64 {
        self.0.max_level()
    }

    /// Returns `(level, reconstruction)`.
    fn quantize_dequantize(&self, x: f64) -> (u64, f64) {
        self.0.quantize_dequantize(x)
    }
}

/// A calibrated classifier whose quantizers are searched over.
#[pyclass(frozen)]
struct Workload(Arc<PreparedWorkload>);

fn parse_split(name: &str) -> PyResult<Split> {
    serde_json::from_value(serde_json::Value::String(name.into()))
        .map_err(|_| PyValueError::new_err(format!("unknown split `{name}`")))
}

#[pymethods]
impl Workload {
    /// Trains the bundled `tiny` or `small` reference network.
    #[staticmethod]
    #[pyo3(signature = (arch, seed=0))]
    fn reference(py: Python<'_>, arch: &str, seed: u64) -> PyResult<Self> {
        let arch = ReferenceArch::by_name(arch).map_err(to_py)?;
        let p = py.allow_threads(|| PreparedWorkload::reference(&arch, seed)).map_err(to_py)?;
        Ok(Self(Arc::new(p)))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let w = workload::load_workload(&path).map_err(to_py)?;
        Ok(Self(Arc::new(PreparedWorkload::from_workload(w).map_err(to_py)?)))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        workload::save_workload(&self.0.workload, &path).map_err(to_py)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.workload.name.clone()
    }

    #[getter]
    fn num_quantizers(&self) -> usize {
        self.0.workload.num_quantizers()
    }

    #[getter]
    fn param_counts(&self) -> Vec<usize> {
        self.0.workload.param_counts()
    }

    #[getter]
    fn mac_counts(&self) -> Vec<usize> {
        self.0.workload.mac_counts()
    }

    fn model_ratio(&self, bits: Vec<u32>) -> PyResult<f64> {
        workload::model_ratio(&self.0.workload, &BitConfig(bits)).map_err(to_py)
    }

    fn bitops_ratio(&self, bits: Vec<u32>) -> PyResult<f64> {
        workload::bitops_ratio(&self.0.workload, &BitConfig(bits)).map_err(to_py)
    }

    /// Accuracies and cost ratios for one configuration.
    #[pyo3(signature = (bits, top_k=1, split="evaluation"))]
    fn evaluate<'py>(&self, py: Python<'py>, bits: Vec<u32>, top_k: usize, split: &str) -> PyResult<Bound<'py, PyDict>> {
        let data = self.0.splits.get(parse_split(split)?);
        let r = workload::evaluate_report(&self.0.workload, &BitConfig(bits), data, top_k).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("top1", r.top1)?;
        d.set_item("topk", r.topk)?;
        d.set_item("model_ratio", r.model_ratio)?;
        d.set_item("bitops_ratio", r.bitops_ratio)?;
        Ok(d)
    }

    /// Exact Pareto set over every configuration, as CSV text.
    #[pyo3(signature = (bit_set, top_k=1, threads=1))]
    fn oracle(&self, py: Python<'_>, bit_set: Vec<u32>, top_k: usize, threads: usize) -> PyResult<(String, usize)> {
        let bits = BitSet::new(bit_set).map_err(to_py)?;
        let ev = QuantEvaluator::new(self.0.clone(), Split::Evaluation, top_k, threads).map_err(to_py)?;
        let (report, n) = py.allow_threads(|| harness::exhaustive_oracle(&ev, &bits)).map_err(to_py)?;
        Ok((report.to_csv(), n))
    }
}

/// Runs a full search from a run-config JSON string. Returns a dict with
/// `pareto_csv`, `telemetry_jsonl` and `metadata_json`.
#[pyfunction]
fn run_search<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = RunConfig::from_json(config_json).map_err(to_py)?;
    let run = py.allow_threads(|| harness::run(&cfg)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("pareto_csv", run.report.to_csv())?;
    d.set_item("telemetry_jsonl", run.telemetry_jsonl().map_err(to_py)?)?;
    d.set_item("metadata_json", serde_json::to_string(&run.metadata).map_err(|e| to_py(e.into()))?)?;
    Ok(d)
}

/// Engine-only run on `sphere-2d` or `dtlz2-3d`; returns the archive's
/// objective vectors.
#[pyfunction]
#[pyo3(signature = (problem, generations, seed=0))]
fn run_benchmark(py: Python<'_>, problem: &str, generations: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let problem = BenchmarkProblem::from_str(problem).map_err(to_py)?;
    let cfg = EngineConfig { seed, max_generations: generations, ..EngineConfig::default() };
    let out = py.allow_threads(|| harness::run_benchmark(problem, &cfg)).map_err(to_py)?;
    Ok(out.archive.objectives().into_iter().map(ObjectiveVector::into_inner).collect())
}

#[pymodule]
fn nemo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(dominates, m)?)?;
    m.add_function(wrap_pyfunction!(non_dominated_sort, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_weight_vectors, m)?)?;
    m.add_function(wrap_pyfunction!(r2_indicator, m)?)?;
    m.add_function(wrap_pyfunction!(ucb_scores, m)?)?;
    m.add_function(wrap_pyfunction!(allocate_sizes, m)?)?;
    m.add_function(wrap_pyfunction!(model_ratio_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(bitops_ratio_from_counts, m)?)?;
    m.add_function(wrap_pyfunction!(run_search, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_class::<Quantizer>()?;
    m.add_class::<Workload>()?;
    Ok(())
}
