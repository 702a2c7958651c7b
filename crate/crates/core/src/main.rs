use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use nemo::engine::EngineConfig;
use nemo::harness::{
    exhaustive_oracle, mean_sphere_distance, prepare_workload, run, run_benchmark, BenchmarkProblem, QuantEvaluator,
    RunConfig, WorkloadSource,
};
use nemo::workload::{evaluate_report, load_bit_config, save_workload, PreparedWorkload, ReferenceArch, Split};
use nemo::{BitSet, NemoError};

#[derive(Parser)]
#[command(name = "nemo", version, about = "Multi-species evolutionary search for mixed-precision quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a bundled reference network and write it as a workload file.
    TrainRef {
        #[arg(long, default_value = "tiny")]
        arch: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a search and write pareto.csv, telemetry.jsonl and run-metadata.json.
    Search {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Enumerate every configuration and write the exact Pareto set.
    Oracle {
        /// `tiny`, `small`, or a workload file.
        #[arg(long)]
        workload: String,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        bits: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Training seed for bundled workloads.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the objectives of one configuration.
    Eval {
        #[arg(long)]
        workload: String,
        #[arg(long)]
        bit_config: PathBuf,
        #[arg(long, default_value_t = 1)]
        top_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Engine-only run on an analytic benchmark.
    Bench {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_code(e: &NemoError) -> u8 {
    match e {
        NemoError::Config(_)
        | NemoError::Json(_)
        | NemoError::UnknownProblem(_)
        | NemoError::SpaceTooLarge { .. }
        | NemoError::DimensionMismatch { .. } => 2,
        _ => 3,
    }
}

fn execute(cmd: Command) -> Result<(), NemoError> {
    let mut stdout = std::io::stdout().lock();
    match cmd {
        Command::TrainRef { arch, seed, out } => {
            let arch = ReferenceArch::by_name(&arch)?;
            let prepared = PreparedWorkload::reference(&arch, seed)?;
            save_workload(&prepared.workload, &out)?;
            writeln!(stdout, "wrote {} ({} quantizers) to {}", arch.name, prepared.workload.num_quantizers(), out.display())?;
        }
        Command::Search { config, out_dir } => {
            let cfg = RunConfig::load(&config)?;
            let artifacts = run(&cfg)?;
            artifacts.write(&out_dir)?;
            writeln!(
                stdout,
                "{} pareto rows, {} evaluations, {} reference points; wrote {}",
                artifacts.report.len(),
                artifacts.metadata.evaluations,
                artifacts.metadata.reference_points,
                out_dir.display()
            )?;
        }
        Command::Oracle { workload, bits, out, top_k, threads, seed } => {
            let bits = BitSet::new(bits)?;
            let prepared = prepare_workload(&WorkloadSource::parse(&workload), seed)?;
            let evaluator = QuantEvaluator::new(Arc::new(prepared), Split::Evaluation, top_k, threads)?;
            let (report, evaluated) = exhaustive_oracle(&evaluator, &bits)?;
            report.write_csv(&out)?;
            writeln!(stdout, "{evaluated} configurations, {} Pareto-optimal; wrote {}", report.len(), out.display())?;
        }
        Command::Eval { workload, bit_config, top_k, seed } => {
            let bits = load_bit_config(&bit_config)?;
            let prepared = prepare_workload(&WorkloadSource::parse(&workload), seed)?;
            let r = evaluate_report(&prepared.workload, &bits, &prepared.splits.evaluation, top_k)?;
            writeln!(stdout, "top1 {}", r.top1)?;
            if top_k > 1 {
                writeln!(stdout, "top{top_k} {}", r.topk)?;
            }
            writeln!(stdout, "f1 {}", 1.0 - r.topk)?;
            writeln!(stdout, "model_ratio {}", r.model_ratio)?;
            writeln!(stdout, "bitops_ratio {}", r.bitops_ratio)?;
        }
        Command::Bench { problem, generations, seed } => {
            let problem: BenchmarkProblem = problem.parse()?;
            let engine = EngineConfig { max_generations: generations, seed, ..EngineConfig::default() };
            let outcome = run_benchmark(problem, &engine)?;
            let last = outcome.history.last().expect("at least one record");
            writeln!(stdout, "problem {}", problem.name())?;
            writeln!(stdout, "generations {generations}")?;
            writeln!(stdout, "evaluations {}", outcome.evaluations)?;
            writeln!(stdout, "archive_size {}", outcome.archive.len())?;
            writeln!(stdout, "archive_r2 {}", last.archive_r2)?;
            if problem == BenchmarkProblem::Dtlz2_3d {
                writeln!(stdout, "mean_sphere_distance {}", mean_sphere_distance(&outcome.archive.objectives()))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
