//! `ddq`: decompose matrices, generate synthetic inputs, and run the
//! experiment suite.
//!
//! Exit codes: 0 success, 2 usage, 3 data/parse, 4 numerical, 5 I/O.

mod config;
mod genspec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddq::ddecomp::{self, DUpdate, InitStrategy, SolverConfig, TolMode};
use ddq::experiments::{self, RunOptions};
use ddq::generators::generate;
use ddq::io::{write_factors, write_matrix, write_report, MatrixFormat};
use ddq::regularizers::RegularizerConfig;
use ddq::{DenseMatrix, Error};

#[derive(Parser)]
#[command(name = "ddq", version, about = "Variational D-decomposition (A ~ PDQ) toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a matrix; writes factor files and a convergence trace.
    Decompose(DecomposeArgs),
    /// Generate a synthetic matrix file from a generator spec.
    Generate(GenerateArgs),
    /// Table-1 style benchmark across matrix classes and seeds.
    Benchmark(ExperimentArgs),
    /// Perturbation-stability study over a list of noise norms.
    Perturb(ExperimentArgs),
    /// Condition-penalty ablation over a beta grid.
    Ablate(ExperimentArgs),
    /// Regularization sensitivity sweep over a (lambda, alpha) grid.
    Sweep(ExperimentArgs),
    /// Repeated solves under distinct initialization seeds.
    Stability(ExperimentArgs),
    /// Runtime scaling across matrix sizes.
    Scaling(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DUpdateArg {
    Stationary,
    Closed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    Random,
    Svd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TolModeArg {
    Absolute,
    Relative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Mm,
    Csv,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input matrix file (MatrixMarket or CSV).
    #[arg(long, conflicts_with = "gen")]
    input: Option<PathBuf>,
    /// Generator spec, e.g. "low_rank,n=500,k=50".
    #[arg(long)]
    gen: Option<String>,
    /// Target rank k.
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha3: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long)]
    kappa_cap: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = DUpdateArg::Stationary)]
    d_update: DUpdateArg,
    #[arg(long, value_enum, default_value_t = InitArg::Random)]
    init: InitArg,
    #[arg(long, value_enum, default_value_t = TolModeArg::Absolute)]
    tol_mode: TolModeArg,
    /// Seed for initialization (and generation with --gen). Mandatory.
    #[arg(long)]
    seed: u64,
    /// Output prefix; writes <out>.P/.D/.Q/.json and <out>.trace.json.
    #[arg(long)]
    out: PathBuf,
    /// Gauge-normalize the factors before writing.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec, e.g. "ill_conditioned,n=500,k=50".
    #[arg(long)]
    gen: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Mm)]
    format: FormatArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file; the section matching the subcommand is used.
    #[arg(long)]
    config: PathBuf,
    /// Report output path (JSON).
    #[arg(long)]
    out: PathBuf,
}

fn error_exit_code(e: &Error) -> u8 {
    match e {
        Error::ParseError { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFiniteEntry { .. }
        | Error::UnknownExample(_)
        | Error::ShapeMismatch { .. }
        | Error::RankTooLarge { .. }
        | Error::EmptyMask
        | Error::ZeroMatrix
        | Error::NotSymmetric { .. } => 3,
        Error::NotPositiveDefinite { .. }
        | Error::ConvergenceFailure { .. }
        | Error::SingularOperator { .. }
        | Error::ZeroColumn { .. }
        | Error::Solver { .. } => 4,
        Error::Io { .. } => 5,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(error_exit_code(&e))
}

fn usage_fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load_input(args: &DecomposeArgs) -> Result<DenseMatrix, ExitCode> {
    match (&args.input, &args.gen) {
        (Some(path), None) => ddq::io::read_matrix(path).map_err(fail),
        (None, Some(spec)) => {
            let spec = genspec::parse_gen_spec(spec, args.seed).map_err(usage_fail)?;
            generate(&spec).map(|g| g.matrix).map_err(fail)
        }
        _ => Err(usage_fail("provide exactly one of --input or --gen")),
    }
}

fn run_decompose(args: DecomposeArgs) -> ExitCode {
    let a = match load_input(&args) {
        Ok(a) => a,
        Err(code) => return code,
    };
    let reg = RegularizerConfig {
        lambda: args.lambda,
        alpha1: args.alpha1,
        alpha2: args.alpha2,
        alpha3: args.alpha3,
        beta: args.beta,
        kappa_cap: args.kappa_cap,
    };
    let solver = SolverConfig {
        k: args.rank,
        tol: args.tol,
        max_iters: args.max_iters,
        d_update: match args.d_update {
            DUpdateArg::Stationary => DUpdate::Stationary,
            DUpdateArg::Closed => DUpdate::ClosedForm,
        },
        init: match args.init {
            InitArg::Random => InitStrategy::RandomGaussian,
            InitArg::Svd => InitStrategy::SvdWarmStart,
        },
        seed: args.seed,
        tol_mode: match args.tol_mode {
            TolModeArg::Absolute => TolMode::Absolute,
            TolModeArg::Relative => TolMode::Relative,
        },
    };

    let (mut triple, trace) = match ddecomp::solve(&a, &reg, &solver) {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if args.normalize {
        triple = match ddecomp::normalize_gauge(&triple) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
    }
    if let Err(e) = write_factors(&args.out, &triple, args.normalize) {
        return fail(e);
    }
    let trace_path = args.out.with_file_name(format!(
        "{}.trace.json",
        args.out.file_name().map(|n| n.to_string_lossy().to_string()).unwrap_or_default()
    ));
    let trace_json = match serde_json::to_string_pretty(&trace) {
        Ok(mut s) => {
            s.push('\n');
            s
        }
        Err(e) => return usage_fail(e),
    };
    if let Err(e) = std::fs::write(&trace_path, trace_json) {
        return fail(Error::Io { path: trace_path.display().to_string(), source: e });
    }

    let residual = trace.final_residual();
    let kappa = trace.final_kappa();
    println!(
        "decomposed {}x{} at rank {}: residual {:.6e}, kappa(D) {:.4e}, {} iterations ({:?})",
        a.rows(),
        a.cols(),
        args.rank,
        residual,
        kappa,
        trace.iterations.len(),
        trace.status,
    );
    ExitCode::SUCCESS
}

fn run_generate(args: GenerateArgs) -> ExitCode {
    let spec = match genspec::parse_gen_spec(&args.gen, args.seed) {
        Ok(s) => s,
        Err(e) => return usage_fail(e),
    };
    let generated = match generate(&spec) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    let format = match args.format {
        FormatArg::Mm => MatrixFormat::MatrixMarket,
        FormatArg::Csv => MatrixFormat::Csv,
    };
    if let Err(e) = write_matrix(&args.out, &generated.matrix, format) {
        return fail(e);
    }
    println!(
        "wrote {}x{} matrix ({}) to {}",
        generated.matrix.rows(),
        generated.matrix.cols(),
        spec.label(),
        args.out.display()
    );
    ExitCode::SUCCESS
}

fn run_experiment(
    kind: &str,
    args: ExperimentArgs,
) -> ExitCode {
    let file = match config::load(&args.config.display().to_string()) {
        Ok(f) => f,
        Err(e) => return usage_fail(e),
    };
    let opts = RunOptions::from_env();
    let report = match kind {
        "benchmark" => match file.benchmark.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => Ok(experiments::run_benchmark(&cfg, &opts)),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [benchmark] section"),
        },
        "perturb" => match file.perturb.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => Ok(experiments::run_perturbation_study(&cfg, &opts)),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [perturb] section"),
        },
        "ablate" => match file.ablate.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => experiments::run_ablation_beta(&cfg, &opts),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [ablate] section"),
        },
        "sweep" => match file.sweep.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => experiments::run_sensitivity_sweep(&cfg, &opts),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [sweep] section"),
        },
        "stability" => match file.stability.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => experiments::run_stability(&cfg, &opts),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [stability] section"),
        },
        "scaling" => match file.scaling.as_ref().map(|s| s.build()) {
            Some(Ok(cfg)) => Ok(experiments::run_runtime_scaling(&cfg, &opts)),
            Some(Err(e)) => return usage_fail(e),
            None => return usage_fail("config has no [scaling] section"),
        },
        _ => unreachable!("experiment kinds are fixed"),
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return fail(e),
    };
    if let Err(e) = write_report(&args.out, &report) {
        return fail(e);
    }
    let failed = report.runs.iter().filter(|r| r.status != "ok").count();
    println!(
        "{kind}: {} runs ({} failed cells), report -> {}",
        report.runs.len(),
        failed,
        args.out.display()
    );
    for (key, value) in &report.stats {
        println!("  {key} = {value:.6}");
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Decompose(args) => run_decompose(args),
        Command::Generate(args) => run_generate(args),
        Command::Benchmark(args) => run_experiment("benchmark", args),
        Command::Perturb(args) => run_experiment("perturb", args),
        Command::Ablate(args) => run_experiment("ablate", args),
        Command::Sweep(args) => run_experiment("sweep", args),
        Command::Stability(args) => run_experiment("stability", args),
        Command::Scaling(args) => run_experiment("scaling", args),
    }
}
