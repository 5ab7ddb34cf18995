//! Shared argument groups and the objects they resolve to.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use sepconf::catalog::{SeparatorCatalog, Solver};
use sepconf::harness::{DefaultsCache, ExternalBackend, RunPlan, SolverBackend, StubBackend, StubTable};
use sepconf::llm::{HttpClient, LlmClient, RecordingClient, ReplayClient};

use crate::error::{CliError, CliResult};

/// Values used when a flag is not given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Defaults {
    pub pool_size: usize,
    pub k: usize,
    pub seeds: u32,
    pub limit_multiplier: f64,
    pub threads_per_solve: usize,
    pub retries: usize,
    pub temperature: f64,
    pub machine_threads: Option<usize>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            pool_size: 100,
            k: 5,
            seeds: 10,
            limit_multiplier: 2.5,
            threads_per_solve: 4,
            retries: 3,
            temperature: 1.0,
            machine_threads: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DefaultsFile {
    #[serde(default)]
    defaults: Defaults,
}

impl Defaults {
    /// Reads the `[defaults]` table of a TOML file; no path means built-in values.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Defaults::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config file {}: {e}", path.display())))?;
        let file: DefaultsFile = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("invalid config file {}: {e}", path.display())))?;
        Ok(file.defaults)
    }
}

/// `gurobi`, `scip`, `stub`, or a path to a catalog TOML file.
pub fn load_catalog(spec: &str) -> CliResult<SeparatorCatalog> {
    match spec {
        "gurobi" => Ok(SeparatorCatalog::shipped(Solver::Gurobi)),
        "scip" => Ok(SeparatorCatalog::shipped(Solver::Scip)),
        "stub" => Ok(SeparatorCatalog::shipped(Solver::Stub)),
        path => {
            if !Path::new(path).is_file() {
                return Err(CliError::usage(format!("catalog {path} is neither a shipped name nor a file")));
            }
            Ok(SeparatorCatalog::load(path)?)
        }
    }
}

pub fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{what} {} does not exist", path.display())))
    }
}

pub fn require_dir(path: &Path, what: &str) -> CliResult<()> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::usage(format!("{what} {} is not a directory", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Stub,
    Scip,
    Gurobi,
}

impl SolverKind {
    pub fn solver(self) -> Solver {
        match self {
            SolverKind::Stub => Solver::Stub,
            SolverKind::Scip => Solver::Scip,
            SolverKind::Gurobi => Solver::Gurobi,
        }
    }

    fn binary_var(self) -> &'static str {
        match self {
            SolverKind::Scip => "SEPCONF_SCIP_BIN",
            SolverKind::Gurobi => "SEPCONF_GUROBI_BIN",
            SolverKind::Stub => "",
        }
    }

    fn default_binary(self) -> &'static str {
        match self {
            SolverKind::Scip => "scip",
            SolverKind::Gurobi => "gurobi_cl",
            SolverKind::Stub => "",
        }
    }
}

#[derive(Args, Clone, Debug)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "scip")]
    pub solver: SolverKind,
    /// Separator catalog: shipped name or TOML path. Defaults to the solver's catalog.
    #[arg(long)]
    pub catalog: Option<String>,
    /// Scripted solve times for `--solver stub` (TOML or JSON).
    #[arg(long)]
    pub stub_table: Option<PathBuf>,
    /// Solver executable; falls back to SEPCONF_SCIP_BIN / SEPCONF_GUROBI_BIN, then PATH.
    #[arg(long)]
    pub solver_bin: Option<String>,
    #[arg(long, default_value = "logs")]
    pub log_dir: PathBuf,
    /// Pin each worker to its own CPU range with taskset.
    #[arg(long)]
    pub pin_cpus: bool,
    #[arg(long, env = "SEPCONF_MACHINE_THREADS")]
    pub machine_threads: Option<usize>,
    #[arg(long)]
    pub seeds: Option<u32>,
    /// Time limit as a multiple of the default configuration's mean time.
    #[arg(long)]
    pub multiplier: Option<f64>,
    /// Relative MIP gap at which a solve stops (0 solves to optimality).
    #[arg(long, default_value_t = 0.0)]
    pub gap_target: f64,
    /// Solver threads per solve.
    #[arg(long)]
    pub threads: Option<usize>,
    /// JSON file caching default-configuration solves across commands.
    #[arg(long)]
    pub defaults_cache: Option<PathBuf>,
}

/// Everything a harness borrows, owned in one place.
pub struct SolverSetup {
    pub catalog: SeparatorCatalog,
    pub backend: Box<dyn SolverBackend>,
    pub plan: RunPlan,
    pub cache: DefaultsCache,
    cache_path: Option<PathBuf>,
}

impl SolverArgs {
    pub fn catalog(&self) -> CliResult<SeparatorCatalog> {
        let name = self.solver.solver().as_str();
        let catalog = load_catalog(self.catalog.as_deref().unwrap_or(name))?;
        if catalog.solver() != self.solver.solver() {
            return Err(CliError::usage(format!(
                "catalog is for {} but --solver is {}",
                catalog.solver(),
                self.solver.solver()
            )));
        }
        Ok(catalog)
    }

    pub fn setup(&self, defaults: &Defaults) -> CliResult<SolverSetup> {
        let catalog = self.catalog()?;
        let mut plan = RunPlan::new(&catalog);
        plan.seeds = self.seeds.unwrap_or(defaults.seeds);
        plan.limit_multiplier = self.multiplier.unwrap_or(defaults.limit_multiplier);
        plan.threads_per_solve = self.threads.unwrap_or(defaults.threads_per_solve);
        plan.gap_target = self.gap_target;
        if let Some(n) = self.machine_threads.or(defaults.machine_threads) {
            plan.machine_threads = n;
        }
        plan.validate().map_err(|e| CliError::usage(e.to_string()))?;

        let backend: Box<dyn SolverBackend> = match self.solver {
            SolverKind::Stub => {
                let path =
                    self.stub_table.as_ref().ok_or_else(|| CliError::usage("--solver stub needs --stub-table"))?;
                require_file(path, "stub table")?;
                Box::new(StubBackend::new(StubTable::load(path)?))
            }
            kind => {
                let binary = self
                    .solver_bin
                    .clone()
                    .or_else(|| std::env::var(kind.binary_var()).ok())
                    .unwrap_or_else(|| kind.default_binary().to_string());
                let mut backend = ExternalBackend::new(kind.solver(), &binary, &self.log_dir)?;
                if self.pin_cpus {
                    backend = backend.with_affinity(plan.workers());
                }
                Box::new(backend)
            }
        };

        let cache = match &self.defaults_cache {
            Some(path) if path.exists() => DefaultsCache::load(path)?,
            _ => DefaultsCache::new(),
        };
        Ok(SolverSetup { catalog, backend, plan, cache, cache_path: self.defaults_cache.clone() })
    }
}

impl SolverSetup {
    pub fn save_cache(&self) -> CliResult<()> {
        if let Some(path) = &self.cache_path {
            self.cache.save(path)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClientKind {
    /// Answer from recorded fixtures only.
    Replay,
    /// Call the live endpoint.
    Http,
    /// Call the live endpoint and record fixtures.
    Record,
}

#[derive(Args, Clone, Debug)]
pub struct ClientArgs {
    #[arg(long, value_enum, default_value = "replay")]
    pub client: ClientKind,
    /// Fixture directory for replay and record.
    #[arg(long, default_value = "fixtures")]
    pub fixtures: PathBuf,
    /// Completions allowed per sample, including the first.
    #[arg(long)]
    pub retries: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Completions in flight at once.
    #[arg(long, default_value_t = 8)]
    pub concurrency: usize,
}

impl ClientArgs {
    pub fn build(&self) -> CliResult<Box<dyn LlmClient>> {
        let live = || {
            HttpClient::from_env()
                .ok_or_else(|| CliError::Environment(format!("live client needs {} to be set", HttpClient::KEY_VAR)))
        };
        Ok(match self.client {
            ClientKind::Replay => {
                require_dir(&self.fixtures, "fixture directory")?;
                Box::new(ReplayClient::new(&self.fixtures))
            }
            ClientKind::Http => Box::new(live()?),
            ClientKind::Record => Box::new(RecordingClient::new(live()?, &self.fixtures)),
        })
    }
}
