//! TOML experiment configuration.
//!
//! One file holds one section per experiment; each subcommand reads only
//! its own section. Matrix inputs come either from `input = "path"` or a
//! nested `[<section>.gen]` generator table (exactly one of the two).
//! Solver and regularizer tables accept partial settings; unset keys take
//! the library defaults. Seeds are always explicit.

use serde::Deserialize;

use ddq::ddecomp::{DUpdate, InitStrategy, SolverConfig, TolMode};
use ddq::experiments::{
    AblationConfig, BenchmarkConfig, MatrixSource, PerturbationConfig, ScalingConfig,
    StabilityConfig, SweepConfig,
};
use ddq::generators::GeneratorSpec;
use ddq::regularizers::RegularizerConfig;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub benchmark: Option<BenchmarkSection>,
    pub perturb: Option<PerturbSection>,
    pub ablate: Option<AblateSection>,
    pub sweep: Option<SweepSection>,
    pub stability: Option<StabilitySection>,
    pub scaling: Option<ScalingSection>,
}

pub fn load(path: &str) -> Result<ConfigFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    toml::from_str(&text).map_err(|e| format!("{path}: {e}"))
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct RegSection {
    pub lambda: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kappa_cap: Option<f64>,
}

impl RegSection {
    pub fn build(&self) -> RegularizerConfig {
        let uniform = self.alpha.unwrap_or(0.0);
        RegularizerConfig {
            lambda: self.lambda.unwrap_or(0.0),
            alpha1: self.alpha1.unwrap_or(uniform),
            alpha2: self.alpha2.unwrap_or(uniform),
            alpha3: self.alpha3.unwrap_or(uniform),
            beta: self.beta.unwrap_or(0.0),
            kappa_cap: self.kappa_cap,
        }
    }
}

#[derive(Debug, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub d_update: Option<DUpdate>,
    pub init: Option<InitStrategy>,
    pub seed: Option<u64>,
    pub tol_mode: Option<TolMode>,
}

impl SolverSection {
    pub fn build(&self, k: usize, seed: u64) -> SolverConfig {
        let mut cfg = SolverConfig::new(k, self.seed.unwrap_or(seed));
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(d) = self.d_update {
            cfg.d_update = d;
        }
        if let Some(i) = self.init {
            cfg.init = i;
        }
        if let Some(t) = self.tol_mode {
            cfg.tol_mode = t;
        }
        cfg
    }
}

fn source_from(
    section: &str,
    input: &Option<String>,
    gen: &Option<GeneratorSpec>,
) -> Result<MatrixSource, String> {
    match (input, gen) {
        (Some(path), None) => Ok(MatrixSource::File { path: path.clone() }),
        (None, Some(spec)) => Ok(MatrixSource::Generated { spec: spec.clone() }),
        (Some(_), Some(_)) => Err(format!("[{section}]: input and gen are mutually exclusive")),
        (None, None) => Err(format!("[{section}]: provide input = \"path\" or a [{section}.gen] table")),
    }
}

fn require_seed(section: &str, seed: Option<u64>) -> Result<u64, String> {
    seed.ok_or_else(|| format!("[{section}]: an explicit seed is required"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    pub classes: Vec<GeneratorSpec>,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub oversample: Option<usize>,
    pub power_iters: Option<usize>,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl BenchmarkSection {
    pub fn build(&self) -> Result<BenchmarkConfig, String> {
        if self.classes.is_empty() || self.seeds.is_empty() {
            return Err("[benchmark]: needs at least one class and one seed".into());
        }
        Ok(BenchmarkConfig {
            classes: self.classes.clone(),
            k: self.k,
            reg: self.reg.build(),
            solver: self.solver.build(self.k, self.seeds[0]),
            seeds: self.seeds.clone(),
            oversample: self.oversample.unwrap_or(10),
            power_iters: self.power_iters.unwrap_or(2),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbSection {
    pub base: GeneratorSpec,
    pub k: usize,
    pub eps_list: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl PerturbSection {
    pub fn build(&self) -> Result<PerturbationConfig, String> {
        if self.eps_list.is_empty() || self.seeds.is_empty() {
            return Err("[perturb]: needs eps_list and seeds".into());
        }
        let mut sorted = self.eps_list.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted != self.eps_list || sorted.iter().any(|&e| e <= 0.0) {
            return Err("[perturb]: eps_list must be ascending and positive".into());
        }
        Ok(PerturbationConfig {
            base: self.base.clone(),
            eps_list: self.eps_list.clone(),
            reg: self.reg.build(),
            solver: self.solver.build(self.k, self.seeds[0]),
            seeds: self.seeds.clone(),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblateSection {
    pub input: Option<String>,
    pub gen: Option<GeneratorSpec>,
    pub k: usize,
    pub beta_list: Vec<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl AblateSection {
    pub fn build(&self) -> Result<AblationConfig, String> {
        if !self.beta_list.contains(&0.0) {
            return Err("[ablate]: beta_list must include 0".into());
        }
        let seed = require_seed("ablate", self.seed.or(self.solver.seed))?;
        Ok(AblationConfig {
            source: source_from("ablate", &self.input, &self.gen)?,
            k: self.k,
            beta_list: self.beta_list.clone(),
            reg_base: self.reg.build(),
            solver: self.solver.build(self.k, seed),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub input: Option<String>,
    pub gen: Option<GeneratorSpec>,
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub solver: SolverSection,
}

impl SweepSection {
    pub fn build(&self) -> Result<SweepConfig, String> {
        if self.lambda_grid.is_empty() || self.alpha_grid.is_empty() {
            return Err("[sweep]: grids must be non-empty".into());
        }
        let seed = require_seed("sweep", self.seed.or(self.solver.seed))?;
        Ok(SweepConfig {
            source: source_from("sweep", &self.input, &self.gen)?,
            k: self.k,
            lambda_grid: self.lambda_grid.clone(),
            alpha_grid: self.alpha_grid.clone(),
            solver: self.solver.build(self.k, seed),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySection {
    pub input: Option<String>,
    pub gen: Option<GeneratorSpec>,
    pub k: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl StabilitySection {
    pub fn build(&self) -> Result<StabilityConfig, String> {
        if self.seeds.len() < 2 {
            return Err("[stability]: needs at least two seeds".into());
        }
        Ok(StabilityConfig {
            source: source_from("stability", &self.input, &self.gen)?,
            k: self.k,
            reg: self.reg.build(),
            solver: self.solver.build(self.k, self.seeds[0]),
            seeds: self.seeds.clone(),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub n_list: Vec<usize>,
    pub k: usize,
    pub eps: Option<f64>,
    pub baselines: Option<bool>,
    pub oversample: Option<usize>,
    pub power_iters: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub reg: RegSection,
    #[serde(default)]
    pub solver: SolverSection,
}

impl ScalingSection {
    pub fn build(&self) -> Result<ScalingConfig, String> {
        if self.n_list.is_empty() {
            return Err("[scaling]: n_list must be non-empty".into());
        }
        let mut sorted = self.n_list.clone();
        sorted.sort_unstable();
        if sorted != self.n_list {
            return Err("[scaling]: n_list must be ascending".into());
        }
        let seed = require_seed("scaling", self.seed.or(self.solver.seed))?;
        Ok(ScalingConfig {
            n_list: self.n_list.clone(),
            k: self.k,
            eps: self.eps.unwrap_or(0.0),
            reg: self.reg.build(),
            solver: self.solver.build(self.k, seed),
            baselines_on: self.baselines.unwrap_or(true),
            oversample: self.oversample.unwrap_or(10),
            power_iters: self.power_iters.unwrap_or(2),
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_benchmark_section_with_nested_class() {
        let text = r#"
[benchmark]
k = 4
seeds = [1, 2]
oversample = 3
power_iters = 1

[[benchmark.classes]]
kind = "low_rank"
n = 20
k = 4
seed = 0

[[benchmark.classes]]
kind = "perturbed"
eps = 1e-3
seed = 0
base = { kind = "low_rank", n = 20, k = 4, seed = 0 }

[benchmark.reg]
lambda = 1e-4
alpha = 1e-3

[benchmark.solver]
init = "svd_warm_start"
max_iters = 30
"#;
        let cfg: ConfigFile = toml::from_str(text).unwrap();
        let bench = cfg.benchmark.unwrap().build().unwrap();
        assert_eq!(bench.classes.len(), 2);
        assert_eq!(bench.k, 4);
        assert_eq!(bench.reg.alpha2, 1e-3);
        assert_eq!(bench.solver.init, InitStrategy::SvdWarmStart);
        assert_eq!(bench.solver.max_iters, 30);
        assert_eq!(bench.oversample, 3);
    }

    #[test]
    fn source_exclusivity_is_enforced() {
        let text = r#"
[sweep]
k = 3
lambda_grid = [1e-4]
alpha_grid = [1e-3]
seed = 1
input = "a.mtx"

[sweep.gen]
kind = "low_rank"
n = 10
k = 3
seed = 0
"#;
        let cfg: ConfigFile = toml::from_str(text).unwrap();
        assert!(cfg.sweep.unwrap().build().is_err());
    }

    #[test]
    fn missing_seed_is_rejected() {
        let text = r#"
[ablate]
k = 3
beta_list = [0.0, 1e-2]

[ablate.gen]
kind = "low_rank"
n = 10
k = 3
seed = 0
"#;
        let cfg: ConfigFile = toml::from_str(text).unwrap();
        assert!(cfg.ablate.unwrap().build().is_err());
    }
}
