use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::logs::{parse_gurobi_log, parse_scip_log, ParsedLog};
use super::{HarnessError, SolveOutcome, SolveRequest, SolveStatus, SolverBackend};
use crate::catalog::{render_settings, Solver};

/// Argument vector with `{placeholder}` substitution.
///
/// Placeholders: `{bin}`, `{settings}`, `{instance}`, `{log}`, `{seed}`,
/// `{threads}`. The settings file already carries seed, limits and threads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandTemplate {
    pub args: Vec<String>,
}

impl CommandTemplate {
    pub fn scip() -> Self {
        CommandTemplate {
            args: vec![
                "{bin}".into(),
                "-c".into(),
                "set load {settings} read {instance} optimize display statistics quit".into(),
            ],
        }
    }

    pub fn gurobi() -> Self {
        CommandTemplate {
            args: vec!["{bin}".into(), "InputFile={settings}".into(), "LogFile={log}".into(), "{instance}".into()],
        }
    }

    pub fn expand(&self, vars: &BTreeMap<&str, String>) -> Vec<String> {
        self.args
            .iter()
            .map(|arg| {
                let mut out = arg.clone();
                for (k, v) in vars {
                    out = out.replace(&format!("{{{k}}}"), v);
                }
                out
            })
            .collect()
    }
}

/// SCIP or Gurobi run as a subprocess, one process per solve.
#[derive(Debug)]
pub struct ExternalBackend {
    solver: Solver,
    binary: PathBuf,
    template: CommandTemplate,
    log_dir: PathBuf,
    /// Pin each solve to its own block of cores with `taskset` when available.
    affinity: Option<Mutex<Vec<bool>>>,
    version: String,
}

/// Looks up `name` on `PATH` unless it already contains a path separator.
pub(crate) fn resolve_binary(name: &str) -> Option<PathBuf> {
    let candidate = Path::new(name);
    if candidate.components().count() > 1 {
        return candidate.is_file().then(|| candidate.to_path_buf());
    }
    std::env::var_os("PATH")
        .and_then(|paths| std::env::split_paths(&paths).map(|dir| dir.join(name)).find(|p| p.is_file()))
}

impl ExternalBackend {
    /// Resolves the solver binary and prepares the log directory.
    pub fn new(solver: Solver, binary: &str, log_dir: impl Into<PathBuf>) -> Result<Self, HarnessError> {
        let template = match solver {
            Solver::Scip => CommandTemplate::scip(),
            Solver::Gurobi => CommandTemplate::gurobi(),
            Solver::Stub => return Err(HarnessError::Other("the stub solver runs in-process".into())),
        };
        let binary = resolve_binary(binary).ok_or_else(|| HarnessError::SolverNotFound(binary.to_string()))?;
        let log_dir = log_dir.into();
        std::fs::create_dir_all(&log_dir)?;
        let version = format!("{}:{}", solver, binary.display());
        Ok(ExternalBackend { solver, binary, template, log_dir, affinity: None, version })
    }

    pub fn with_template(mut self, template: CommandTemplate) -> Self {
        self.template = template;
        self
    }

    /// Overrides the cache identity, e.g. with the solver's reported version string.
    pub fn with_version(mut self, version: impl Into<String>) -> Self {
        self.version = version.into();
        self
    }

    /// Enables core pinning for up to `workers` concurrent solves.
    pub fn with_affinity(mut self, workers: usize) -> Self {
        if resolve_binary("taskset").is_some() {
            self.affinity = Some(Mutex::new(vec![false; workers.max(1)]));
        }
        self
    }

    fn acquire_slot(&self) -> Option<usize> {
        let slots = self.affinity.as_ref()?;
        let mut slots = slots.lock().expect("slot lock");
        let i = slots.iter().position(|used| !used)?;
        slots[i] = true;
        Some(i)
    }

    fn release_slot(&self, slot: Option<usize>) {
        if let (Some(i), Some(slots)) = (slot, self.affinity.as_ref()) {
            slots.lock().expect("slot lock")[i] = false;
        }
    }

    fn settings(&self, request: &SolveRequest<'_>) -> Result<String, HarnessError> {
        let mut text = render_settings(request.config, request.catalog)?;
        match self.solver {
            Solver::Gurobi => {
                let _ = writeln!(text, "Seed {}", request.seed);
                let _ = writeln!(text, "Threads {}", request.threads);
                let _ = writeln!(text, "MIPGap {}", request.gap_target);
                if let Some(limit) = request.time_limit {
                    let _ = writeln!(text, "WorkLimit {limit}");
                }
            }
            _ => {
                let _ = writeln!(text, "randomization/randomseedshift = {}", request.seed);
                let _ = writeln!(text, "lp/threads = {}", request.threads);
                let _ = writeln!(text, "parallel/maxnthreads = {}", request.threads);
                let _ = writeln!(text, "limits/gap = {}", request.gap_target);
                if let Some(limit) = request.time_limit {
                    let _ = writeln!(text, "limits/time = {limit}");
                }
            }
        }
        Ok(text)
    }

    fn outcome(&self, request: &SolveRequest<'_>, parsed: ParsedLog, log: &Path) -> Result<SolveOutcome, HarnessError> {
        let fail =
            |message: &str| HarnessError::LogParseError { log: log.display().to_string(), message: message.into() };
        let mut status = parsed.status.ok_or_else(|| fail("no status line"))?;
        if status == SolveStatus::Error {
            return Err(fail("solver reported an abnormal termination"));
        }
        let mut time = parsed.time.ok_or_else(|| fail("no solve time"))?;
        let mut gap = parsed.gap.unwrap_or(0.0);
        if status == SolveStatus::Optimal && request.gap_target > 0.0 && gap > 1e-6 {
            status = SolveStatus::GapLimit;
        }
        if status == SolveStatus::Optimal {
            gap = 0.0;
        }
        if status == SolveStatus::TimeLimit {
            if let Some(limit) = request.time_limit {
                time = limit;
            }
        }

        let mut cuts_applied = BTreeMap::new();
        let mut unmapped_stats = Vec::new();
        for (name, count) in parsed.applied {
            match request.catalog.id_for_stats_name(&name) {
                Some(id) => {
                    *cuts_applied.entry(id.to_string()).or_insert(0) += count;
                }
                None if request.catalog.is_ignored_stats(&name) => {}
                None => unmapped_stats.push(name),
            }
        }
        Ok(SolveOutcome {
            instance: request.instance.id.clone(),
            config_hash: request.config.content_hash(),
            seed: request.seed,
            status,
            time,
            gap,
            log_path: Some(log.to_path_buf()),
            cuts_applied,
            unmapped_stats,
        })
    }
}

impl SolverBackend for ExternalBackend {
    fn solve(&self, request: &SolveRequest<'_>) -> Result<SolveOutcome, HarnessError> {
        let config_hash = request.config.content_hash();
        let stem = format!(
            "{}-{}-s{}{}",
            request.instance.id,
            &config_hash[..12],
            request.seed,
            if request.time_limit.is_none() { "-default" } else { "" }
        );
        let ext = if self.solver == Solver::Gurobi { "prm" } else { "set" };
        let settings_path = self.log_dir.join(format!("{stem}.{ext}"));
        let log_path = self.log_dir.join(format!("{stem}.log"));
        std::fs::write(&settings_path, self.settings(request)?)?;

        let vars: BTreeMap<&str, String> = [
            ("bin", self.binary.display().to_string()),
            ("settings", settings_path.display().to_string()),
            ("instance", request.instance.path.display().to_string()),
            ("log", log_path.display().to_string()),
            ("seed", request.seed.to_string()),
            ("threads", request.threads.to_string()),
        ]
        .into_iter()
        .collect();
        let mut argv = self.template.expand(&vars);

        let slot = self.acquire_slot();
        if let Some(i) = slot {
            let first = i * request.threads;
            let cores = format!("{}-{}", first, first + request.threads - 1);
            argv.splice(0..0, ["taskset".to_string(), "-c".to_string(), cores]);
        }

        // Gurobi writes its own log file; SCIP's stdout is the log.
        let capture = if self.solver == Solver::Gurobi { log_path.with_extension("out") } else { log_path.clone() };
        let result = (|| {
            let stdout = File::create(&capture)?;
            let stderr = stdout.try_clone()?;
            let mut child = Command::new(&argv[0])
                .args(&argv[1..])
                .stdin(Stdio::null())
                .stdout(stdout)
                .stderr(stderr)
                .spawn()
                .map_err(|e| HarnessError::LaunchError(format!("{}: {e}", argv[0])))?;
            // Guard against solvers ignoring their own limit.
            let guard = request.time_limit.map(|l| Duration::from_secs_f64(l * 4.0 + 120.0));
            let status = match guard {
                Some(d) => match child.wait_timeout(d)? {
                    Some(s) => s,
                    None => {
                        child.kill()?;
                        child.wait()?;
                        return Err(HarnessError::LaunchError(format!("solver exceeded the guard of {d:?}")));
                    }
                },
                None => child.wait()?,
            };
            if !status.success() {
                log::warn!("solver exited with {status} on {}", request.instance.id);
            }
            Ok(())
        })();
        self.release_slot(slot);
        result?;

        let text = std::fs::read_to_string(&log_path).unwrap_or_default();
        let parsed = match self.solver {
            Solver::Gurobi => parse_gurobi_log(&text),
            _ => parse_scip_log(&text),
        };
        self.outcome(request, parsed, &log_path)
    }

    fn version(&self) -> String {
        self.version.clone()
    }
}
