//! Solver runs and the relative solve-time improvement metric.
//!
//! Every configured run is time-limited to `limit_multiplier` times the
//! instance's mean default time; default runs have no limit. Improvements
//! are `100 * (t_default - t_config) / t_default`, so a fully censored
//! instance scores exactly `100 * (1 - limit_multiplier)` (-150 at 2.5x).

mod external;
mod logs;
mod stub;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{default_configuration, CatalogError, Configuration, SeparatorCatalog, Solver};
use crate::hashing::sha256_hex;
use crate::stats;

pub use external::{CommandTemplate, ExternalBackend};
pub use logs::{parse_gurobi_log, parse_scip_log, ParsedLog};
pub use stub::{Override, Planted, StubBackend, StubInstance, StubTable};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("solver binary not found: {0}")]
    SolverNotFound(String),
    #[error("failed to launch solver: {0}")]
    LaunchError(String),
    #[error("could not parse solver log {log}: {message}")]
    LogParseError { log: String, message: String },
    #[error("empty list")]
    EmptyList,
    #[error("default solve time must be positive, got {0}")]
    NonPositiveDefaultTime(f64),
    #[error("no instance is unsolved by both methods")]
    NoCommonUnsolved,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
    Error,
}

impl SolveStatus {
    pub fn is_solved(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::GapLimit)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub instance: String,
    pub config_hash: String,
    pub seed: u64,
    pub status: SolveStatus,
    /// Wall seconds for SCIP, work units for Gurobi, scripted units for the stub.
    pub time: f64,
    /// Relative gap as a fraction.
    pub gap: f64,
    pub log_path: Option<PathBuf>,
    /// Cuts applied per separator id, when the solver reports it.
    #[serde(default)]
    pub cuts_applied: BTreeMap<String, u64>,
    /// Statistics rows that do not map to a catalog separator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmapped_stats: Vec<String>,
}

/// An MPS file and the id used in reports (the file stem).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InstanceRef {
    pub id: String,
    pub path: PathBuf,
}

impl InstanceRef {
    pub fn from_path(path: impl Into<PathBuf>) -> Self {
        let path = path.into();
        let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
        let id =
            file.strip_suffix(".gz").unwrap_or(&file).trim_end_matches(".mps").trim_end_matches(".MPS").to_string();
        InstanceRef { id, path }
    }

    /// Hash of the file contents, or of the id when the file does not exist.
    pub fn content_hash(&self) -> String {
        match std::fs::read(&self.path) {
            Ok(bytes) => sha256_hex(&bytes),
            Err(_) => sha256_hex(format!("missing:{}", self.id).as_bytes()),
        }
    }
}

/// A named collection of instances (validation or evaluation set).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSet {
    pub name: String,
    pub instances: Vec<InstanceRef>,
}

impl InstanceSet {
    pub fn new(name: impl Into<String>, instances: Vec<InstanceRef>) -> Self {
        InstanceSet { name: name.into(), instances }
    }

    /// All `*.mps` / `*.mps.gz` files in a directory, sorted by file name.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let dir = dir.as_ref();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                let name = p.file_name().map(|f| f.to_string_lossy().to_lowercase()).unwrap_or_default();
                name.ends_with(".mps") || name.ends_with(".mps.gz")
            })
            .collect();
        paths.sort();
        let name = dir.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_else(|| "instances".into());
        Ok(InstanceSet { name, instances: paths.into_iter().map(InstanceRef::from_path).collect() })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Evaluation protocol settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub solver: Solver,
    pub catalog_hash: String,
    /// Solves per (instance, configuration), seeds `0..seeds`.
    pub seeds: u32,
    pub limit_multiplier: f64,
    /// Relative gap at which a solve counts as finished; 0 means optimality.
    pub gap_target: f64,
    pub threads_per_solve: usize,
    /// Upper bound on solver threads running at once across all workers.
    pub machine_threads: usize,
}

impl RunPlan {
    pub fn new(catalog: &SeparatorCatalog) -> Self {
        RunPlan {
            solver: catalog.solver(),
            catalog_hash: catalog.hash().to_string(),
            seeds: 10,
            limit_multiplier: 2.5,
            gap_target: 0.0,
            threads_per_solve: 4,
            machine_threads: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(4),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds == 0 {
            return Err(HarnessError::Other("seeds must be at least 1".into()));
        }
        if self.limit_multiplier.is_nan() || self.limit_multiplier <= 1.0 {
            return Err(HarnessError::Other("limit multiplier must exceed 1".into()));
        }
        if self.threads_per_solve == 0 {
            return Err(HarnessError::Other("threads per solve must be at least 1".into()));
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds as u64).collect()
    }

    /// Concurrent solves such that `workers * threads_per_solve <= machine_threads`.
    pub fn workers(&self) -> usize {
        (self.machine_threads / self.threads_per_solve.max(1)).max(1)
    }
}

/// One solver invocation.
#[derive(Clone, Debug)]
pub struct SolveRequest<'a> {
    pub instance: &'a InstanceRef,
    pub config: &'a Configuration,
    pub catalog: &'a SeparatorCatalog,
    pub seed: u64,
    pub time_limit: Option<f64>,
    pub gap_target: f64,
    pub threads: usize,
}

/// Something that can solve an instance under a configuration.
pub trait SolverBackend: Send + Sync {
    fn solve(&self, request: &SolveRequest<'_>) -> Result<SolveOutcome, HarnessError>;

    /// Identifies the solver build for cache keys.
    fn version(&self) -> String;
}

/// Runs a single solve.
pub fn run_solve(backend: &dyn SolverBackend, request: &SolveRequest<'_>) -> Result<SolveOutcome, HarnessError> {
    request.config.validate(request.catalog)?;
    backend.solve(request)
}

/// Arithmetic mean of solve times, skipping `Error` runs. Time-limited runs
/// contribute the limit value they report.
pub fn mean_time(outcomes: &[SolveOutcome]) -> Result<f64, HarnessError> {
    let times: Vec<f64> = outcomes.iter().filter(|o| o.status != SolveStatus::Error).map(|o| o.time).collect();
    stats::mean(&times).ok_or(HarnessError::EmptyList)
}

/// Relative improvement in percent and whether it sits at the censoring floor.
pub fn improvement(t_default: f64, t_config: f64, limit_multiplier: f64) -> Result<(f64, bool), HarnessError> {
    if t_default.is_nan() || t_default <= 0.0 {
        return Err(HarnessError::NonPositiveDefaultTime(t_default));
    }
    let limit = limit_multiplier * t_default;
    if t_config >= limit {
        return Ok((100.0 * (1.0 - limit_multiplier), true));
    }
    Ok((100.0 * (t_default - t_config) / t_default, false))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub instance: String,
    pub t_default: f64,
    pub t_config: f64,
    pub improvement: f64,
    pub censored: bool,
    /// Mean final gap (fraction) of the default and configured runs.
    pub gap_default: f64,
    pub gap_config: f64,
    /// Every seed reached optimality or the gap target.
    pub solved_default: bool,
    pub solved_config: bool,
    pub timeouts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub instance: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveCounts {
    pub default: usize,
    pub configured: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub config_hash: String,
    pub records: Vec<EvalRecord>,
    /// Instances with at least one `Error` run; excluded from `records`.
    pub failures: Vec<InstanceFailure>,
    /// Configured solves issued for this evaluation.
    pub solves: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub iqr: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
    pub solved: usize,
    pub censored: usize,
}

/// Median and IQR of improvements, plus solved and censored counts.
pub fn summarize(records: &[EvalRecord]) -> Result<Summary, HarnessError> {
    let values: Vec<f64> = records.iter().map(|r| r.improvement).collect();
    let sorted = stats::sorted(&values);
    let median = stats::quantile_sorted(&sorted, 0.5).ok_or(HarnessError::EmptyList)?;
    let q1 = stats::quantile_sorted(&sorted, 0.25).expect("non-empty");
    let q3 = stats::quantile_sorted(&sorted, 0.75).expect("non-empty");
    Ok(Summary {
        median,
        iqr: q3 - q1,
        q1,
        q3,
        count: records.len(),
        solved: records.iter().filter(|r| r.solved_config).count(),
        censored: records.iter().filter(|r| r.censored).count(),
    })
}

/// Median over instances unsolved by both methods of `gap_a - gap_b`, in
/// percentage points. Positive values favor `b`.
pub fn gap_comparison(a: &[EvalRecord], b: &[EvalRecord]) -> Result<f64, HarnessError> {
    let by_instance: HashMap<&str, &EvalRecord> = b.iter().map(|r| (r.instance.as_str(), r)).collect();
    let diffs: Vec<f64> = a
        .iter()
        .filter(|ra| !ra.solved_config)
        .filter_map(|ra| by_instance.get(ra.instance.as_str()).map(|rb| (ra, rb)))
        .filter(|(_, rb)| !rb.solved_config)
        .map(|(ra, rb)| 100.0 * (ra.gap_config - rb.gap_config))
        .collect();
    stats::median(&diffs).ok_or(HarnessError::NoCommonUnsolved)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultEntry {
    pub mean_time: f64,
    pub mean_gap: f64,
    pub solved: bool,
    pub outcomes: Vec<SolveOutcome>,
}

/// Default-configuration results keyed by instance id and content, solver
/// build, seed list, gap target and thread count. Shared by every configured run so all limits
/// derive from the same baseline.
#[derive(Debug, Default)]
pub struct DefaultsCache {
    entries: Mutex<BTreeMap<String, DefaultEntry>>,
}

impl DefaultsCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(instance: &InstanceRef, backend_version: &str, plan: &RunPlan) -> String {
        let seeds: Vec<String> = plan.seed_list().iter().map(u64::to_string).collect();
        format!(
            "{}#{}|{}|{}|seeds={}|gap={}|threads={}",
            instance.id,
            instance.content_hash(),
            plan.solver,
            backend_version,
            seeds.join(","),
            plan.gap_target,
            plan.threads_per_solve
        )
    }

    pub fn get(&self, key: &str) -> Option<DefaultEntry> {
        self.entries.lock().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, entry: DefaultEntry) {
        self.entries.lock().expect("cache lock").insert(key, entry);
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        if !path.exists() {
            return Ok(Self::new());
        }
        let text = std::fs::read_to_string(path)?;
        let entries: BTreeMap<String, DefaultEntry> =
            serde_json::from_str(&text).map_err(|e| HarnessError::Other(format!("defaults cache: {e}")))?;
        Ok(DefaultsCache { entries: Mutex::new(entries) })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), HarnessError> {
        let entries = self.entries.lock().expect("cache lock");
        let text = serde_json::to_string_pretty(&*entries).map_err(|e| HarnessError::Other(e.to_string()))?;
        crate::artifact::write_atomic(path.as_ref(), text.as_bytes())?;
        Ok(())
    }
}

/// Runs evaluation batches against one backend and catalog.
pub struct Harness<'a> {
    backend: &'a dyn SolverBackend,
    catalog: &'a SeparatorCatalog,
    plan: RunPlan,
    cache: &'a DefaultsCache,
    pool: rayon::ThreadPool,
    default_solves: AtomicUsize,
    configured_solves: AtomicUsize,
}

impl<'a> Harness<'a> {
    pub fn new(
        backend: &'a dyn SolverBackend,
        catalog: &'a SeparatorCatalog,
        plan: RunPlan,
        cache: &'a DefaultsCache,
    ) -> Result<Self, HarnessError> {
        plan.validate()?;
        if plan.catalog_hash != catalog.hash() {
            return Err(HarnessError::Other("run plan and catalog disagree on the catalog hash".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers())
            .build()
            .map_err(|e| HarnessError::Other(e.to_string()))?;
        Ok(Harness {
            backend,
            catalog,
            plan,
            cache,
            pool,
            default_solves: AtomicUsize::new(0),
            configured_solves: AtomicUsize::new(0),
        })
    }

    pub fn plan(&self) -> &RunPlan {
        &self.plan
    }

    pub fn catalog(&self) -> &SeparatorCatalog {
        self.catalog
    }

    pub fn counts(&self) -> SolveCounts {
        SolveCounts {
            default: self.default_solves.load(Ordering::SeqCst),
            configured: self.configured_solves.load(Ordering::SeqCst),
        }
    }

    fn run_seeds(
        &self,
        instance: &InstanceRef,
        config: &Configuration,
        time_limit: Option<f64>,
        counter: &AtomicUsize,
    ) -> Vec<Result<SolveOutcome, HarnessError>> {
        let seeds = self.plan.seed_list();
        self.pool.install(|| {
            seeds
                .par_iter()
                .map(|&seed| {
                    counter.fetch_add(1, Ordering::SeqCst);
                    run_solve(
                        self.backend,
                        &SolveRequest {
                            instance,
                            config,
                            catalog: self.catalog,
                            seed,
                            time_limit,
                            gap_target: self.plan.gap_target,
                            threads: self.plan.threads_per_solve,
                        },
                    )
                })
                .collect()
        })
    }

    /// Default-configuration results for an instance, computed once per cache key.
    pub fn default_entry(&self, instance: &InstanceRef) -> Result<DefaultEntry, String> {
        let key = DefaultsCache::key(instance, &self.backend.version(), &self.plan);
        if let Some(entry) = self.cache.get(&key) {
            return Ok(entry);
        }
        let default = default_configuration(self.catalog);
        let outcomes = collect_outcomes(self.run_seeds(instance, &default, None, &self.default_solves))?;
        let mean_time = mean_time(&outcomes).map_err(|e| e.to_string())?;
        if mean_time <= 0.0 {
            return Err(format!("default solve time {mean_time} is not positive"));
        }
        let gaps: Vec<f64> = outcomes.iter().map(|o| o.gap).collect();
        let entry = DefaultEntry {
            mean_time,
            mean_gap: stats::mean(&gaps).unwrap_or(0.0),
            solved: outcomes.iter().all(|o| o.status.is_solved()),
            outcomes,
        };
        self.cache.insert(key, entry.clone());
        Ok(entry)
    }

    /// One record per instance; instances with failed runs are reported in `failures`.
    pub fn evaluate(&self, config: &Configuration, instances: &InstanceSet) -> Result<Evaluation, HarnessError> {
        config.validate(self.catalog)?;
        let before = self.configured_solves.load(Ordering::SeqCst);
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for instance in &instances.instances {
            match self.evaluate_instance(config, instance) {
                Ok(record) => records.push(record),
                Err(message) => {
                    log::warn!("instance {} failed: {message}", instance.id);
                    failures.push(InstanceFailure { instance: instance.id.clone(), message });
                }
            }
        }
        records.sort_by(|a, b| a.instance.cmp(&b.instance));
        failures.sort_by(|a, b| a.instance.cmp(&b.instance));
        Ok(Evaluation {
            config_hash: config.content_hash(),
            records,
            failures,
            solves: self.configured_solves.load(Ordering::SeqCst) - before,
        })
    }

    fn evaluate_instance(&self, config: &Configuration, instance: &InstanceRef) -> Result<EvalRecord, String> {
        let default = self.default_entry(instance)?;
        let limit = self.plan.limit_multiplier * default.mean_time;
        let outcomes = collect_outcomes(self.run_seeds(instance, config, Some(limit), &self.configured_solves))?;
        let timeouts = outcomes.iter().filter(|o| o.status == SolveStatus::TimeLimit).count();
        let t_config =
            if timeouts == outcomes.len() { limit } else { mean_time(&outcomes).map_err(|e| e.to_string())? };
        let (value, censored) =
            improvement(default.mean_time, t_config, self.plan.limit_multiplier).map_err(|e| e.to_string())?;
        let gaps: Vec<f64> = outcomes.iter().map(|o| o.gap).collect();
        Ok(EvalRecord {
            instance: instance.id.clone(),
            t_default: default.mean_time,
            t_config,
            improvement: value,
            censored,
            gap_default: default.mean_gap,
            gap_config: stats::mean(&gaps).unwrap_or(0.0),
            solved_default: default.solved,
            solved_config: outcomes.iter().all(|o| o.status.is_solved()),
            timeouts,
        })
    }

    /// Default-configuration outcomes for every instance, in set order.
    pub fn default_outcomes(&self, instances: &InstanceSet) -> Result<Vec<Vec<SolveOutcome>>, HarnessError> {
        instances
            .instances
            .iter()
            .map(|i| {
                self.default_entry(i).map(|e| e.outcomes).map_err(|m| HarnessError::Other(format!("{}: {m}", i.id)))
            })
            .collect()
    }
}

fn collect_outcomes(results: Vec<Result<SolveOutcome, HarnessError>>) -> Result<Vec<SolveOutcome>, String> {
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(o) if o.status == SolveStatus::Error => {
                return Err(format!("seed {} ended in an error (log {:?})", o.seed, o.log_path));
            }
            Ok(o) => outcomes.push(o),
            Err(e) => return Err(e.to_string()),
        }
    }
    outcomes.sort_by_key(|o| o.seed);
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(time: f64, status: SolveStatus) -> SolveOutcome {
        SolveOutcome {
            instance: "i".into(),
            config_hash: "c".into(),
            seed: 0,
            status,
            time,
            gap: 0.0,
            log_path: None,
            cuts_applied: BTreeMap::new(),
            unmapped_stats: Vec::new(),
        }
    }

    fn record(instance: &str, improvement: f64) -> EvalRecord {
        EvalRecord {
            instance: instance.into(),
            t_default: 1.0,
            t_config: 1.0,
            improvement,
            censored: improvement == -150.0,
            gap_default: 0.0,
            gap_config: 0.0,
            solved_default: true,
            solved_config: true,
            timeouts: 0,
        }
    }

    #[test]
    fn mean_times() {
        let o = |t| outcome(t, SolveStatus::Optimal);
        assert_eq!(mean_time(&[o(2.0), o(4.0)]).unwrap(), 3.0);
        assert_eq!(mean_time(&vec![o(1.7); 10]).unwrap(), 1.7);
        let ten: Vec<SolveOutcome> = (1..=10).map(|t| o(t as f64)).collect();
        assert_eq!(mean_time(&ten).unwrap(), 5.5);
        assert_eq!(mean_time(&[o(2.0), outcome(25.0, SolveStatus::TimeLimit)]).unwrap(), 13.5);
        assert_eq!(mean_time(&[o(2.0), outcome(99.0, SolveStatus::Error)]).unwrap(), 2.0);
        assert!(matches!(mean_time(&[]), Err(HarnessError::EmptyList)));
    }

    #[test]
    fn improvement_values() {
        assert_eq!(improvement(10.0, 5.0, 2.5).unwrap(), (50.0, false));
        assert_eq!(improvement(10.0, 25.0, 2.5).unwrap(), (-150.0, true));
        assert_eq!(improvement(3.3, 3.3, 2.5).unwrap(), (0.0, false));
        assert!(matches!(improvement(0.0, 1.0, 2.5), Err(HarnessError::NonPositiveDefaultTime(_))));
    }

    #[test]
    fn summaries() {
        let recs: Vec<EvalRecord> = [1.0, 2.0, 3.0, 4.0, 5.0].iter().map(|&v| record("x", v)).collect();
        let s = summarize(&recs).unwrap();
        assert_eq!((s.median, s.iqr), (3.0, 2.0));
        let s = summarize(&[record("x", 7.0)]).unwrap();
        assert_eq!((s.median, s.iqr), (7.0, 0.0));
        let recs: Vec<EvalRecord> = [-150.0, 0.0, 50.0].iter().map(|&v| record("x", v)).collect();
        let s = summarize(&recs).unwrap();
        assert_eq!(s.median, 0.0);
        assert_eq!(s.censored, 1);
        assert!(matches!(summarize(&[]), Err(HarnessError::EmptyList)));
    }

    #[test]
    fn gap_differences() {
        let unsolved =
            |instance: &str, gap: f64| EvalRecord { gap_config: gap, solved_config: false, ..record(instance, 0.0) };
        let a = vec![unsolved("p", 0.10), unsolved("q", 0.08)];
        let b = vec![unsolved("p", 0.09), unsolved("q", 0.08)];
        assert!((gap_comparison(&a, &b).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(gap_comparison(&a, &a).unwrap(), 0.0);
        let a = vec![unsolved("p", 0.05)];
        let b = vec![unsolved("p", 0.07)];
        assert!((gap_comparison(&a, &b).unwrap() + 2.0).abs() < 1e-9);
        let solved = vec![record("p", 0.0)];
        assert!(matches!(gap_comparison(&solved, &b), Err(HarnessError::NoCommonUnsolved)));
    }

    #[test]
    fn plan_checks() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let mut plan = RunPlan::new(&cat);
        assert!(plan.validate().is_ok());
        plan.machine_threads = 18;
        assert_eq!(plan.workers(), 4);
        plan.limit_multiplier = 1.0;
        assert!(plan.validate().is_err());
        plan.limit_multiplier = 2.5;
        plan.seeds = 0;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn instance_ids_from_paths() {
        assert_eq!(InstanceRef::from_path("/a/b/setcover_01.mps").id, "setcover_01");
        assert_eq!(InstanceRef::from_path("x/air04.mps.gz").id, "air04");
    }
}
