//! Experiment protocols and structured reports.
//!
//! Each runner takes a typed config, executes its grid of cells, and
//! returns an [`ExperimentReport`] embedding the full configuration, one
//! record per run, and aggregate statistics, so every number in a report
//! can be re-derived from the report alone. Failing cells are recorded
//! with their error message and do not abort the rest of the grid.
//!
//! Independent cells may run on a small thread pool; results are merged
//! by cell index, so serial and parallel execution produce identical
//! reports apart from wall-clock fields.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{cur, randomized_svd, truncated_svd};
use crate::ddecomp::{normalize_gauge, solve, FactorTriple, SolverConfig};
use crate::error::Result;
use crate::generators::{gen_perturbed, generate, GeneratorSpec};
use crate::matrix::DenseMatrix;
use crate::metrics::relative_frobenius_error;
use crate::regularizers::RegularizerConfig;

/// Execution options for experiment grids.
#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Number of worker threads for independent cells; 0 or 1 runs serially.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { threads: 1 }
    }
}

impl RunOptions {
    /// Threads capped by the `DDQ_THREADS` environment variable (0 = serial).
    pub fn from_env() -> Self {
        let threads = std::env::var("DDQ_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(1);
        RunOptions { threads: threads.max(1) }
    }
}

/// Where an experiment's input matrix comes from (kept in the report so
/// runs are reproducible from the embedded config).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MatrixSource {
    Generated { spec: GeneratorSpec },
    File { path: String },
}

impl MatrixSource {
    pub fn resolve(&self) -> Result<DenseMatrix> {
        match self {
            MatrixSource::Generated { spec } => Ok(generate(spec)?.matrix),
            MatrixSource::File { path } => crate::io::read_matrix(path),
        }
    }
}

/// One method run on one cell of an experiment grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Cell label: matrix class, grid point, or size.
    pub cell: String,
    pub method: String,
    pub seed: u64,
    /// Relative Frobenius error against the method's input matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<f64>,
    /// Error against the clean base matrix, when the class defines one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_error_clean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_d: Option<f64>,
    /// `||D* - D0||_F` after gauge normalization (perturbation study).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_iter_ms: Option<f64>,
    pub iters: u64,
    pub wall_ms: f64,
    /// "ok", or the error message for an isolated failing cell.
    pub status: String,
}

impl RunRecord {
    fn blank(cell: &str, method: &str, seed: u64) -> Self {
        RunRecord {
            cell: cell.into(),
            method: method.into(),
            seed,
            rel_error: None,
            rel_error_clean: None,
            rmse: None,
            kappa_d: None,
            d_dist: None,
            per_iter_ms: None,
            iters: 0,
            wall_ms: 0.0,
            status: "ok".into(),
        }
    }

    fn failed(cell: &str, method: &str, seed: u64, err: impl std::fmt::Display) -> Self {
        let mut r = Self::blank(cell, method, seed);
        r.status = err.to_string();
        r
    }
}

/// Mean/standard deviation summary for one (cell, method) group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Aggregate {
    pub cell: String,
    pub method: String,
    pub runs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rel_error_clean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_rel_error_clean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_kappa_d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_kappa_d: Option<f64>,
    pub mean_wall_ms: f64,
    pub std_wall_ms: f64,
}

/// Structured result of one experiment invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    /// The full typed configuration, embedded for audit and re-runs.
    pub config: serde_json::Value,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    /// Scalar outcomes: fitted slopes, spreads, ratios.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub stats: BTreeMap<String, f64>,
    pub version: String,
}

impl ExperimentReport {
    fn new(kind: &str, config: serde_json::Value) -> Self {
        ExperimentReport {
            kind: kind.into(),
            config,
            runs: Vec::new(),
            aggregates: Vec::new(),
            stats: BTreeMap::new(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    pub fn records(&self, cell: &str, method: &str) -> Vec<&RunRecord> {
        self.runs
            .iter()
            .filter(|r| r.cell == cell && r.method == method && r.status == "ok")
            .collect()
    }

    pub fn aggregate(&self, cell: &str, method: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.cell == cell && a.method == method)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// usable points.
fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Run the per-cell closure over all cells, possibly on worker threads,
/// merging results in cell order.
fn run_cells<C, F>(cells: Vec<C>, threads: usize, f: F) -> Vec<RunRecord>
where
    C: Send + Sync,
    F: Fn(&C) -> Vec<RunRecord> + Sync,
{
    if threads <= 1 || cells.len() <= 1 {
        return cells.iter().flat_map(|c| f(c)).collect();
    }
    let indexed: Vec<(usize, C)> = cells.into_iter().enumerate().collect();
    let mut out: Vec<(usize, Vec<RunRecord>)> = Vec::new();
    let chunk = indexed.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = indexed
            .chunks(chunk)
            .map(|part| {
                let f = &f;
                scope.spawn(move || {
                    part.iter().map(|(i, c)| (*i, f(c))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            out.extend(h.join().expect("experiment worker panicked"));
        }
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().flat_map(|(_, records)| records).collect()
}

fn aggregate_groups(runs: &[RunRecord]) -> Vec<Aggregate> {
    let mut order: Vec<(String, String)> = Vec::new();
    for r in runs {
        let key = (r.cell.clone(), r.method.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(cell, method)| {
            let group: Vec<&RunRecord> = runs
                .iter()
                .filter(|r| r.cell == cell && r.method == method && r.status == "ok")
                .collect();
            let collect = |f: fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
                group.iter().filter_map(|r| f(r)).collect()
            };
            let rel = collect(|r| r.rel_error);
            let relc = collect(|r| r.rel_error_clean);
            let kap = collect(|r| r.kappa_d.filter(|k| k.is_finite()));
            let wall: Vec<f64> = group.iter().map(|r| r.wall_ms).collect();
            let (mw, sw) = mean_std(&wall);
            let opt = |xs: &[f64]| -> (Option<f64>, Option<f64>) {
                if xs.is_empty() {
                    (None, None)
                } else {
                    let (m, s) = mean_std(xs);
                    (Some(m), Some(s))
                }
            };
            let (mean_rel_error, std_rel_error) = opt(&rel);
            let (mean_rel_error_clean, std_rel_error_clean) = opt(&relc);
            let (mean_kappa_d, std_kappa_d) = opt(&kap);
            Aggregate {
                cell,
                method,
                runs: group.len() as u64,
                mean_rel_error,
                std_rel_error,
                mean_rel_error_clean,
                std_rel_error_clean,
                mean_kappa_d,
                std_kappa_d,
                mean_wall_ms: if wall.is_empty() { 0.0 } else { mw },
                std_wall_ms: if wall.is_empty() { 0.0 } else { sw },
            }
        })
        .collect()
}

fn errors_against(
    input: &DenseMatrix,
    clean: Option<&DenseMatrix>,
    approx: &DenseMatrix,
) -> (Option<f64>, Option<f64>) {
    let rel = relative_frobenius_error(input, approx).ok();
    let rel_clean = clean.and_then(|c| relative_frobenius_error(c, approx).ok());
    (rel, rel_clean)
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Matrix classes; the embedded seed of each spec is replaced by the
    /// run seed, so each seed yields a fresh instance of every class.
    pub classes: Vec<GeneratorSpec>,
    pub k: usize,
    pub reg: RegularizerConfig,
    pub solver: SolverConfig,
    pub seeds: Vec<u64>,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_power_iters")]
    pub power_iters: usize,
}

fn default_oversample() -> usize {
    10
}

fn default_power_iters() -> usize {
    2
}

/// Table-1-style benchmark: every class x seed is decomposed by truncated
/// SVD, randomized SVD, CUR, and the D-decomposition solver; errors are
/// recorded against the generated input and, where the class has one,
/// against its clean base.
pub fn run_benchmark(cfg: &BenchmarkConfig, opts: &RunOptions) -> ExperimentReport {
    let mut report = ExperimentReport::new("benchmark", to_config_value(cfg));
    let mut cells = Vec::new();
    for class in &cfg.classes {
        for &seed in &cfg.seeds {
            cells.push((class.clone(), seed));
        }
    }
    report.runs = run_cells(cells, opts.threads, |(class, seed)| {
        benchmark_cell(cfg, class, *seed)
    });
    report.aggregates = aggregate_groups(&report.runs);
    report
}

fn benchmark_cell(cfg: &BenchmarkConfig, class: &GeneratorSpec, seed: u64) -> Vec<RunRecord> {
    let label = class.label();
    let generated = match generate(&class.with_seed(seed)) {
        Ok(g) => g,
        Err(e) => {
            return ["truncated_svd", "randomized_svd", "cur", "ddecomp"]
                .iter()
                .map(|m| RunRecord::failed(&label, m, seed, &e))
                .collect()
        }
    };
    let a = &generated.matrix;
    let clean = generated.clean.as_ref();
    let mut out = Vec::with_capacity(4);

    let started = Instant::now();
    match truncated_svd(a, cfg.k) {
        Ok(approx) => {
            let mut r = RunRecord::blank(&label, "truncated_svd", seed);
            (r.rel_error, r.rel_error_clean) = errors_against(a, clean, &approx.approx);
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            out.push(r);
        }
        Err(e) => out.push(RunRecord::failed(&label, "truncated_svd", seed, e)),
    }

    let started = Instant::now();
    match randomized_svd(a, cfg.k, cfg.oversample, cfg.power_iters, seed) {
        Ok(approx) => {
            let mut r = RunRecord::blank(&label, "randomized_svd", seed);
            (r.rel_error, r.rel_error_clean) = errors_against(a, clean, &approx.approx);
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            out.push(r);
        }
        Err(e) => out.push(RunRecord::failed(&label, "randomized_svd", seed, e)),
    }

    let started = Instant::now();
    match cur(a, cfg.k, cfg.oversample, seed) {
        Ok(approx) => {
            let mut r = RunRecord::blank(&label, "cur", seed);
            (r.rel_error, r.rel_error_clean) = errors_against(a, clean, &approx.approx);
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            out.push(r);
        }
        Err(e) => out.push(RunRecord::failed(&label, "cur", seed, e)),
    }

    let solver = SolverConfig { k: cfg.k, seed, ..cfg.solver.clone() };
    let started = Instant::now();
    match solve(a, &cfg.reg, &solver) {
        Ok((triple, trace)) => {
            let mut r = RunRecord::blank(&label, "ddecomp", seed);
            (r.rel_error, r.rel_error_clean) = errors_against(a, clean, &triple.product());
            r.kappa_d = Some(trace.final_kappa());
            r.iters = trace.iterations.len() as u64;
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            out.push(r);
        }
        Err(e) => out.push(RunRecord::failed(&label, "ddecomp", seed, e)),
    }
    out
}

// ---------------------------------------------------------------------------
// perturbation study
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationConfig {
    /// Base matrix A0 (seed replaced per run seed).
    pub base: GeneratorSpec,
    /// Perturbation norms, ascending, all > 0 (eps = 0 is the reference run).
    pub eps_list: Vec<f64>,
    pub reg: RegularizerConfig,
    pub solver: SolverConfig,
    pub seeds: Vec<u64>,
}

/// Solve on `A0` and on each `A0 + E(eps)` from identical initialization;
/// record residuals and `||D*(eps) - D0||_F` after gauge-normalizing both
/// triples, plus the log-log slope of the core distance against eps.
pub fn run_perturbation_study(cfg: &PerturbationConfig, opts: &RunOptions) -> ExperimentReport {
    let mut report = ExperimentReport::new("perturbation", to_config_value(cfg));
    report.runs = run_cells(cfg.seeds.clone(), opts.threads, |&seed| {
        perturbation_cell(cfg, seed)
    });
    report.aggregates = aggregate_groups(&report.runs);
    // slope over mean d_dist per eps
    let mut points = Vec::new();
    for &eps in &cfg.eps_list {
        let cell = format!("eps={eps:e}");
        let dists: Vec<f64> = report
            .runs
            .iter()
            .filter(|r| r.cell == cell && r.status == "ok")
            .filter_map(|r| r.d_dist)
            .collect();
        if !dists.is_empty() {
            points.push((eps, mean_std(&dists).0));
        }
    }
    if let Some(slope) = loglog_slope(&points) {
        report.stats.insert("slope_loglog_d_dist".into(), slope);
    }
    report
}

fn solve_normalized(
    a: &DenseMatrix,
    reg: &RegularizerConfig,
    solver: &SolverConfig,
) -> Result<(FactorTriple, crate::ddecomp::ConvergenceTrace)> {
    let (triple, trace) = solve(a, reg, solver)?;
    let normalized = normalize_gauge(&triple)?;
    Ok((normalized, trace))
}

fn perturbation_cell(cfg: &PerturbationConfig, seed: u64) -> Vec<RunRecord> {
    let mut out = Vec::new();
    let base = match generate(&cfg.base.with_seed(seed)) {
        Ok(g) => g.matrix,
        Err(e) => return vec![RunRecord::failed("base", "ddecomp", seed, e)],
    };
    let solver = SolverConfig { seed, ..cfg.solver.clone() };
    let reference = match solve_normalized(&base, &cfg.reg, &solver) {
        Ok(r) => r,
        Err(e) => return vec![RunRecord::failed("base", "ddecomp", seed, e)],
    };
    let mut r0 = RunRecord::blank("base", "ddecomp", seed);
    r0.rel_error = relative_frobenius_error(&base, &reference.0.product()).ok();
    r0.kappa_d = Some(reference.1.final_kappa());
    r0.iters = reference.1.iterations.len() as u64;
    out.push(r0);

    for &eps in &cfg.eps_list {
        let cell = format!("eps={eps:e}");
        let started = Instant::now();
        let noisy = gen_perturbed(&base, eps, seed ^ 0x9E37_79B9);
        match solve_normalized(&noisy, &cfg.reg, &solver) {
            Ok((triple, trace)) => {
                let mut r = RunRecord::blank(&cell, "ddecomp", seed);
                r.rel_error = relative_frobenius_error(&noisy, &triple.product()).ok();
                r.rel_error_clean = relative_frobenius_error(&base, &triple.product()).ok();
                r.kappa_d = Some(trace.final_kappa());
                r.d_dist = Some(triple.d.frobenius_distance(&reference.0.d));
                r.iters = trace.iterations.len() as u64;
                r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                out.push(r);
            }
            Err(e) => out.push(RunRecord::failed(&cell, "ddecomp", seed, e)),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// beta ablation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AblationConfig {
    pub source: MatrixSource,
    pub k: usize,
    /// Grid of condition-penalty weights; must include 0 (the ablated run).
    pub beta_list: Vec<f64>,
    pub reg_base: RegularizerConfig,
    pub solver: SolverConfig,
}

/// Condition cap realizing a given beta in the ablation: inversely
/// proportional to beta, matched to the reported ablation anchors.
pub fn derived_kappa_cap(beta: f64) -> Option<f64> {
    if beta <= 0.0 {
        None
    } else {
        Some((0.65 / beta).max(1.2))
    }
}

/// One solve per beta with the cap derived from beta; records error and
/// kappa(D) per run plus the first/last kappa ratio and the error spread.
pub fn run_ablation_beta(cfg: &AblationConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("ablation", to_config_value(cfg));
    let a = cfg.source.resolve()?;
    let cells: Vec<f64> = cfg.beta_list.clone();
    let a_ref = &a;
    report.runs = run_cells(cells, opts.threads, |&beta| {
        let cell = format!("beta={beta:e}");
        let mut reg = cfg.reg_base.clone();
        reg.beta = beta;
        reg.kappa_cap = derived_kappa_cap(beta);
        let solver = SolverConfig { k: cfg.k, ..cfg.solver.clone() };
        let started = Instant::now();
        match solve(a_ref, &reg, &solver) {
            Ok((triple, trace)) => {
                let mut r = RunRecord::blank(&cell, "ddecomp", solver.seed);
                r.rel_error = relative_frobenius_error(a_ref, &triple.product()).ok();
                r.kappa_d = Some(trace.final_kappa());
                r.iters = trace.iterations.len() as u64;
                r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                vec![r]
            }
            Err(e) => vec![RunRecord::failed(&cell, "ddecomp", solver.seed, e)],
        }
    });
    report.aggregates = aggregate_groups(&report.runs);

    let kappas: Vec<f64> = report
        .runs
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.kappa_d)
        .collect();
    if kappas.len() == cfg.beta_list.len() && kappas.len() >= 2 {
        let last = kappas[kappas.len() - 1];
        if last > 0.0 {
            report.stats.insert("kappa_first_over_last".into(), kappas[0] / last);
        }
    }
    insert_error_spread(&mut report);
    Ok(report)
}

fn insert_error_spread(report: &mut ExperimentReport) {
    let errors: Vec<f64> = report
        .runs
        .iter()
        .filter(|r| r.status == "ok")
        .filter_map(|r| r.rel_error)
        .collect();
    if errors.len() >= 2 {
        let max = errors.iter().cloned().fold(f64::MIN, f64::max);
        let min = errors.iter().cloned().fold(f64::MAX, f64::min);
        if min > 0.0 {
            report.stats.insert("error_spread_rel".into(), (max - min) / min);
        }
    }
}

// ---------------------------------------------------------------------------
// sensitivity sweep
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub source: MatrixSource,
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub solver: SolverConfig,
}

/// Full Cartesian sweep over (lambda, alpha); each cell records error and
/// kappa(D), and the report carries the max/min error spread.
pub fn run_sensitivity_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("sweep", to_config_value(cfg));
    let a = cfg.source.resolve()?;
    let mut cells = Vec::new();
    for &lambda in &cfg.lambda_grid {
        for &alpha in &cfg.alpha_grid {
            cells.push((lambda, alpha));
        }
    }
    let a_ref = &a;
    report.runs = run_cells(cells, opts.threads, |&(lambda, alpha)| {
        let cell = format!("lambda={lambda:e},alpha={alpha:e}");
        let reg = RegularizerConfig::uniform(lambda, alpha);
        let solver = SolverConfig { k: cfg.k, ..cfg.solver.clone() };
        let started = Instant::now();
        match solve(a_ref, &reg, &solver) {
            Ok((triple, trace)) => {
                let mut r = RunRecord::blank(&cell, "ddecomp", solver.seed);
                r.rel_error = relative_frobenius_error(a_ref, &triple.product()).ok();
                r.kappa_d = Some(trace.final_kappa());
                r.iters = trace.iterations.len() as u64;
                r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                vec![r]
            }
            Err(e) => vec![RunRecord::failed(&cell, "ddecomp", solver.seed, e)],
        }
    });
    report.aggregates = aggregate_groups(&report.runs);
    insert_error_spread(&mut report);
    Ok(report)
}

// ---------------------------------------------------------------------------
// stability across initializations
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub source: MatrixSource,
    pub k: usize,
    pub reg: RegularizerConfig,
    pub solver: SolverConfig,
    /// Initialization seeds; one solve per entry on the same matrix.
    pub seeds: Vec<u64>,
}

/// Repeat the solve under distinct initialization seeds; reports mean and
/// standard deviation of error, kappa(D), and runtime.
pub fn run_stability(cfg: &StabilityConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("stability", to_config_value(cfg));
    let a = cfg.source.resolve()?;
    let a_ref = &a;
    report.runs = run_cells(cfg.seeds.clone(), opts.threads, |&seed| {
        let solver = SolverConfig { k: cfg.k, seed, ..cfg.solver.clone() };
        let started = Instant::now();
        match solve(a_ref, &cfg.reg, &solver) {
            Ok((triple, trace)) => {
                let mut r = RunRecord::blank("stability", "ddecomp", seed);
                r.rel_error = relative_frobenius_error(a_ref, &triple.product()).ok();
                r.kappa_d = Some(trace.final_kappa());
                r.iters = trace.iterations.len() as u64;
                r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                vec![r]
            }
            Err(e) => vec![RunRecord::failed("stability", "ddecomp", seed, e)],
        }
    });
    report.aggregates = aggregate_groups(&report.runs);
    if let Some(agg) = report.aggregate("stability", "ddecomp") {
        if let (Some(mean), Some(std)) = (agg.mean_rel_error, agg.std_rel_error) {
            if mean > 0.0 {
                let ratio = std / mean;
                report.stats.insert("rel_error_std_over_mean".into(), ratio);
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// runtime scaling
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub n_list: Vec<usize>,
    pub k: usize,
    /// Perturbation norm added to the low-rank instance at each size
    /// (0 keeps the instance exactly rank k).
    #[serde(default)]
    pub eps: f64,
    pub reg: RegularizerConfig,
    pub solver: SolverConfig,
    pub baselines_on: bool,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_power_iters")]
    pub power_iters: usize,
    pub seed: u64,
}

/// Time the solver (and randomized SVD when enabled) across matrix sizes;
/// reports the log-log slope of the solver's per-iteration time.
pub fn run_runtime_scaling(cfg: &ScalingConfig, opts: &RunOptions) -> ExperimentReport {
    let mut report = ExperimentReport::new("scaling", to_config_value(cfg));
    report.runs = run_cells(cfg.n_list.clone(), opts.threads, |&n| scaling_cell(cfg, n));
    report.aggregates = aggregate_groups(&report.runs);

    let mut points = Vec::new();
    for &n in &cfg.n_list {
        let cell = format!("n={n}");
        for r in &report.runs {
            if r.cell == cell && r.method == "ddecomp" && r.status == "ok" {
                if let Some(ms) = r.per_iter_ms {
                    points.push((n as f64, ms));
                }
            }
        }
    }
    if points.len() >= 2 {
        if let Some(slope) = loglog_slope(&points) {
            report.stats.insert("slope_loglog_per_iter_ms".into(), slope);
        }
    }
    report
}

fn scaling_cell(cfg: &ScalingConfig, n: usize) -> Vec<RunRecord> {
    let cell = format!("n={n}");
    let spec = GeneratorSpec::LowRank { n, k: cfg.k, seed: cfg.seed };
    let base = match generate(&spec) {
        Ok(g) => g.matrix,
        Err(e) => return vec![RunRecord::failed(&cell, "ddecomp", cfg.seed, e)],
    };
    let a = if cfg.eps > 0.0 { gen_perturbed(&base, cfg.eps, cfg.seed) } else { base };
    let mut out = Vec::new();

    let solver = SolverConfig { k: cfg.k, ..cfg.solver.clone() };
    let started = Instant::now();
    match solve(&a, &cfg.reg, &solver) {
        Ok((triple, trace)) => {
            let mut r = RunRecord::blank(&cell, "ddecomp", solver.seed);
            r.rel_error = relative_frobenius_error(&a, &triple.product()).ok();
            r.kappa_d = Some(trace.final_kappa());
            r.iters = trace.iterations.len() as u64;
            r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut iter_times: Vec<f64> =
                trace.iterations.iter().map(|it| it.wall_ms).collect();
            iter_times.sort_by(|x, y| x.partial_cmp(y).unwrap());
            if !iter_times.is_empty() {
                r.per_iter_ms = Some(iter_times[iter_times.len() / 2]);
            }
            out.push(r);
        }
        Err(e) => out.push(RunRecord::failed(&cell, "ddecomp", solver.seed, e)),
    }

    if cfg.baselines_on {
        let started = Instant::now();
        match randomized_svd(&a, cfg.k, cfg.oversample, cfg.power_iters, cfg.seed) {
            Ok(approx) => {
                let mut r = RunRecord::blank(&cell, "randomized_svd", cfg.seed);
                r.rel_error = relative_frobenius_error(&a, &approx.approx).ok();
                r.wall_ms = started.elapsed().as_secs_f64() * 1e3;
                out.push(r);
            }
            Err(e) => out.push(RunRecord::failed(&cell, "randomized_svd", cfg.seed, e)),
        }
    }
    let _ = started;
    out
}

fn to_config_value<T: Serialize>(cfg: &T) -> serde_json::Value {
    serde_json::to_value(cfg).expect("experiment configs serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddecomp::InitStrategy;

    fn small_solver(k: usize) -> SolverConfig {
        SolverConfig::new(k, 7).with_max_iters(40).with_tol(1e-10)
    }

    #[test]
    fn benchmark_has_four_rows_per_cell() {
        let cfg = BenchmarkConfig {
            classes: vec![GeneratorSpec::LowRank { n: 24, k: 4, seed: 0 }],
            k: 4,
            reg: RegularizerConfig::unregularized(),
            solver: small_solver(4).with_init(InitStrategy::SvdWarmStart),
            seeds: vec![5],
            oversample: 4,
            power_iters: 1,
        };
        let report = run_benchmark(&cfg, &RunOptions::default());
        assert_eq!(report.runs.len(), 4);
        assert!(report.runs.iter().all(|r| r.status == "ok"));
        assert_eq!(report.aggregates.len(), 4);
        // exact low-rank input: truncated SVD is an error lower bound
        let tsvd = report.records("low_rank", "truncated_svd")[0].rel_error.unwrap();
        for method in ["randomized_svd", "cur", "ddecomp"] {
            let err = report.records("low_rank", method)[0].rel_error.unwrap();
            assert!(tsvd <= err + 1e-9, "{method}: {tsvd} vs {err}");
        }
    }

    #[test]
    fn benchmark_cells_survive_failures() {
        // rank too large for the 6x6 class: every cell fails but is recorded
        let cfg = BenchmarkConfig {
            classes: vec![GeneratorSpec::LowRank { n: 6, k: 4, seed: 0 }],
            k: 6, // cur needs k + oversample <= 6, so cur fails; others succeed
            reg: RegularizerConfig::unregularized(),
            solver: small_solver(6),
            seeds: vec![1],
            oversample: 4,
            power_iters: 1,
        };
        let report = run_benchmark(&cfg, &RunOptions::default());
        assert_eq!(report.runs.len(), 4);
        let cur_row = report.runs.iter().find(|r| r.method == "cur").unwrap();
        assert_ne!(cur_row.status, "ok");
        let tsvd_row = report.runs.iter().find(|r| r.method == "truncated_svd").unwrap();
        assert_eq!(tsvd_row.status, "ok");
    }

    #[test]
    fn parallel_and_serial_reports_match() {
        let cfg = BenchmarkConfig {
            classes: vec![
                GeneratorSpec::LowRank { n: 16, k: 3, seed: 0 },
                GeneratorSpec::IllConditioned { n: 16, k: 3, seed: 0 },
            ],
            k: 3,
            reg: RegularizerConfig::uniform(1e-4, 1e-3),
            solver: small_solver(3),
            seeds: vec![1, 2],
            oversample: 3,
            power_iters: 1,
        };
        let serial = run_benchmark(&cfg, &RunOptions { threads: 1 });
        let parallel = run_benchmark(&cfg, &RunOptions { threads: 4 });
        assert_eq!(serial.runs.len(), parallel.runs.len());
        for (s, p) in serial.runs.iter().zip(&parallel.runs) {
            assert_eq!(s.cell, p.cell);
            assert_eq!(s.method, p.method);
            assert_eq!(s.seed, p.seed);
            assert_eq!(s.rel_error, p.rel_error);
            assert_eq!(s.kappa_d, p.kappa_d);
        }
    }

    #[test]
    fn perturbation_zero_reference_is_reproducible() {
        let cfg = PerturbationConfig {
            base: GeneratorSpec::SpectralDecay { n: 16, seed: 0 },
            eps_list: vec![1e-4, 1e-3],
            reg: RegularizerConfig::uniform(1e-5, 1.0),
            solver: small_solver(4),
            seeds: vec![3],
        };
        let r1 = run_perturbation_study(&cfg, &RunOptions::default());
        let r2 = run_perturbation_study(&cfg, &RunOptions::default());
        let errs1: Vec<_> = r1.runs.iter().map(|r| r.rel_error).collect();
        let errs2: Vec<_> = r2.runs.iter().map(|r| r.rel_error).collect();
        assert_eq!(errs1, errs2);
        assert!(r1.stats.contains_key("slope_loglog_d_dist"));
    }

    #[test]
    fn sweep_has_full_cartesian_grid() {
        let cfg = SweepConfig {
            source: MatrixSource::Generated {
                spec: GeneratorSpec::LowRank { n: 14, k: 3, seed: 2 },
            },
            k: 3,
            lambda_grid: vec![1e-4, 1e-3],
            alpha_grid: vec![1e-4, 1e-3, 1e-2],
            solver: small_solver(3),
        };
        let report = run_sensitivity_sweep(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(report.runs.len(), 6);
        // degenerate single-cell grid equals one solve
        let single = SweepConfig {
            lambda_grid: vec![1e-3],
            alpha_grid: vec![1e-3],
            ..cfg
        };
        let report = run_sensitivity_sweep(&single, &RunOptions::default()).unwrap();
        assert_eq!(report.runs.len(), 1);
    }

    #[test]
    fn stability_identical_seeds_zero_variance() {
        let cfg = StabilityConfig {
            source: MatrixSource::Generated {
                spec: GeneratorSpec::LowRank { n: 12, k: 3, seed: 4 },
            },
            k: 3,
            reg: RegularizerConfig::uniform(1e-4, 1e-3),
            solver: small_solver(3),
            seeds: vec![9, 9],
        };
        let report = run_stability(&cfg, &RunOptions::default()).unwrap();
        let agg = report.aggregate("stability", "ddecomp").unwrap();
        assert_eq!(agg.runs, 2);
        assert_eq!(agg.std_rel_error, Some(0.0));
    }

    #[test]
    fn scaling_single_size_reports_raw_timing_only() {
        let cfg = ScalingConfig {
            n_list: vec![24],
            k: 4,
            eps: 0.0,
            reg: RegularizerConfig::unregularized(),
            solver: small_solver(4).with_max_iters(3),
            baselines_on: true,
            oversample: 3,
            power_iters: 1,
            seed: 5,
        };
        let report = run_runtime_scaling(&cfg, &RunOptions::default());
        assert!(!report.stats.contains_key("slope_loglog_per_iter_ms"));
        assert!(report.runs.iter().any(|r| r.method == "randomized_svd"));
        let dd = report.runs.iter().find(|r| r.method == "ddecomp").unwrap();
        assert!(dd.per_iter_ms.is_some());
    }
}
