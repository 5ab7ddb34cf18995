use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::{HarnessError, SolveOutcome, SolveRequest, SolveStatus, SolverBackend};
use crate::catalog::{Configuration, SettingLevel};
use crate::hashing::sha256_hex;

/// Scripted behaviour of one stub instance under the default configuration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubInstance {
    pub base_time: f64,
    /// `(time, gap)` points, times relative to the unscaled run.
    #[serde(default)]
    pub gap_trace: Vec<(f64, f64)>,
    /// Cuts applied per statistics name under the default configuration.
    #[serde(default)]
    pub usage: BTreeMap<String, u64>,
}

/// A planted optimum: time grows with Hamming distance to `config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planted {
    /// Level signature, one of `o`/`d`/`a` per separator.
    pub config: String,
    pub penalty: f64,
}

/// Replaces the model for one configuration signature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Override {
    pub signature: String,
    /// Restricts the override to one instance.
    #[serde(default)]
    pub instance: Option<String>,
    #[serde(default)]
    pub multiplier: Option<f64>,
    /// Absolute time, ignoring the base time.
    #[serde(default)]
    pub time: Option<f64>,
}

/// Fixture table driving the stub solver.
///
/// Time for instance `i`, configuration `c` and seed `s` is
/// `base_i * M(c) * (1 + noise * u(i, s))` where `u` is a hash-derived value in
/// `[-1, 1]` and `M(c)` is the first matching override, or else the product of
/// per-separator level factors times the planted-distance term, normalised so
/// the default configuration has `M = 1`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubTable {
    #[serde(default)]
    pub default_base_time: Option<f64>,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub instances: BTreeMap<String, StubInstance>,
    /// Separator id → level name → time factor. Missing entries are 1.
    #[serde(default)]
    pub factors: BTreeMap<String, BTreeMap<SettingLevel, f64>>,
    #[serde(default)]
    pub planted: Option<Planted>,
    #[serde(default)]
    pub overrides: Vec<Override>,
}

impl StubTable {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Other(format!("stub table: {e}")))
    }

    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Other(format!("stub table: {e}")))
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("stub table serialises")
    }

    fn instance(&self, id: &str) -> Result<StubInstance, HarnessError> {
        match (self.instances.get(id), self.default_base_time) {
            (Some(inst), _) => Ok(inst.clone()),
            (None, Some(base_time)) => Ok(StubInstance { base_time, ..Default::default() }),
            (None, None) => Err(HarnessError::LaunchError(format!("stub table has no instance `{id}`"))),
        }
    }

    fn model_multiplier(&self, config: &Configuration) -> f64 {
        let signature = config.signature();
        let factor =
            |id: &str, level: SettingLevel| self.factors.get(id).and_then(|f| f.get(&level)).copied().unwrap_or(1.0);
        let mut m = 1.0;
        for (id, level) in config.levels() {
            m *= factor(id, level) / factor(id, SettingLevel::Default);
        }
        if let Some(planted) = &self.planted {
            let default_sig = "d".repeat(signature.len());
            let term = |sig: &str| 1.0 + planted.penalty * hamming(sig, &planted.config) as f64;
            m *= term(&signature) / term(&default_sig);
        }
        m
    }

    /// Time multiplier for `config` on `instance`, and whether it is absolute.
    fn multiplier(&self, instance: &str, config: &Configuration) -> (f64, bool) {
        let signature = config.signature();
        let hit = self
            .overrides
            .iter()
            .find(|o| o.signature == signature && o.instance.as_deref().is_none_or(|i| i == instance));
        match hit {
            Some(Override { time: Some(t), .. }) => (*t, true),
            Some(Override { multiplier: Some(m), .. }) => (*m, false),
            _ => (self.model_multiplier(config), false),
        }
    }
}

fn hamming(a: &str, b: &str) -> usize {
    let diff = a.chars().zip(b.chars()).filter(|(x, y)| x != y).count();
    diff + a.len().abs_diff(b.len())
}

/// Deterministic value in `[-1, 1]` for an (instance, seed) pair.
fn seed_noise(instance: &str, seed: u64) -> f64 {
    let digest = sha256_hex(format!("{instance}|{seed}").as_bytes());
    let v = u64::from_str_radix(&digest[..16], 16).expect("hex digest");
    (v as f64 / u64::MAX as f64) * 2.0 - 1.0
}

/// In-process deterministic solver driven by a [`StubTable`].
#[derive(Debug)]
pub struct StubBackend {
    table: StubTable,
    calls: AtomicUsize,
}

impl StubBackend {
    pub fn new(table: StubTable) -> Self {
        StubBackend { table, calls: AtomicUsize::new(0) }
    }

    pub fn table(&self) -> &StubTable {
        &self.table
    }

    /// Number of solves issued so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Unlimited solve time for a configuration and seed.
    pub fn scripted_time(&self, instance: &str, config: &Configuration, seed: u64) -> Result<f64, HarnessError> {
        let inst = self.table.instance(instance)?;
        Ok(self.scale(instance, &inst, config, seed))
    }

    fn scale(&self, instance: &str, inst: &StubInstance, config: &Configuration, seed: u64) -> f64 {
        let jitter = 1.0 + self.table.noise * seed_noise(instance, seed);
        match self.table.multiplier(instance, config) {
            (t, true) => t * jitter,
            (m, false) => inst.base_time * m * jitter,
        }
    }
}

impl SolverBackend for StubBackend {
    fn solve(&self, request: &SolveRequest<'_>) -> Result<SolveOutcome, HarnessError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let id = request.instance.id.as_str();
        let inst = self.table.instance(id)?;
        let finish = self.scale(id, &inst, request.config, request.seed);
        let ratio = if inst.base_time > 0.0 { finish / inst.base_time } else { 1.0 };
        let limit = request.time_limit.unwrap_or(f64::INFINITY);

        let trace: Vec<(f64, f64)> = inst.gap_trace.iter().map(|&(t, g)| (t * ratio, g)).collect();
        let gap_hit = (request.gap_target > 0.0)
            .then(|| trace.iter().find(|&&(t, g)| g <= request.gap_target && t < finish && t <= limit))
            .flatten();

        let (status, time, gap) = if let Some(&(t, g)) = gap_hit {
            (SolveStatus::GapLimit, t, g)
        } else if finish <= limit {
            (SolveStatus::Optimal, finish, 0.0)
        } else {
            let g = trace.iter().rev().find(|&&(t, _)| t <= limit).map_or(1.0, |&(_, g)| g);
            (SolveStatus::TimeLimit, limit, g)
        };

        let mut cuts_applied = BTreeMap::new();
        let mut unmapped_stats = Vec::new();
        for (name, &count) in &inst.usage {
            match request.catalog.id_for_stats_name(name) {
                Some(sep) => {
                    let applied = if request.config.level(sep) == Some(SettingLevel::Off) { 0 } else { count };
                    cuts_applied.insert(sep.to_string(), applied);
                }
                None => unmapped_stats.push(name.clone()),
            }
        }

        Ok(SolveOutcome {
            instance: id.to_string(),
            config_hash: request.config.content_hash(),
            seed: request.seed,
            status,
            time,
            gap,
            log_path: None,
            cuts_applied,
            unmapped_stats,
        })
    }

    fn version(&self) -> String {
        format!("stub-{}", &sha256_hex(self.table.to_toml_string().as_bytes())[..12])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{default_configuration, Provenance, SeparatorCatalog, Solver};
    use crate::harness::InstanceRef;

    fn table() -> StubTable {
        StubTable::from_toml_str(
            r#"
            [instances.slow]
            base_time = 12.0

            [instances.gappy]
            base_time = 20.0
            gap_trace = [[1.0, 0.5], [3.0, 0.08], [10.0, 0.01]]
            "#,
        )
        .unwrap()
    }

    fn solve(backend: &StubBackend, id: &str, limit: Option<f64>, gap: f64) -> SolveOutcome {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let config = default_configuration(&cat);
        let instance = InstanceRef { id: id.into(), path: format!("{id}.mps").into() };
        backend
            .solve(&SolveRequest {
                instance: &instance,
                config: &config,
                catalog: &cat,
                seed: 0,
                time_limit: limit,
                gap_target: gap,
                threads: 1,
            })
            .unwrap()
    }

    #[test]
    fn echoes_table_entry() {
        let b = StubBackend::new(table());
        let o = solve(&b, "slow", None, 0.0);
        assert_eq!((o.status, o.time, o.gap), (SolveStatus::Optimal, 12.0, 0.0));
        assert_eq!(b.calls(), 1);
    }

    #[test]
    fn time_limit_censors() {
        let o = solve(&StubBackend::new(table()), "slow", Some(5.0), 0.0);
        assert_eq!((o.status, o.time), (SolveStatus::TimeLimit, 5.0));
    }

    #[test]
    fn gap_target_stops_early() {
        let o = solve(&StubBackend::new(table()), "gappy", None, 0.10);
        assert_eq!((o.status, o.time, o.gap), (SolveStatus::GapLimit, 3.0, 0.08));
        let o = solve(&StubBackend::new(table()), "gappy", Some(2.0), 0.10);
        assert_eq!((o.status, o.time, o.gap), (SolveStatus::TimeLimit, 2.0, 0.5));
    }

    #[test]
    fn unknown_instance() {
        let b = StubBackend::new(table());
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let config = default_configuration(&cat);
        let instance = InstanceRef { id: "nope".into(), path: "nope.mps".into() };
        let req = SolveRequest {
            instance: &instance,
            config: &config,
            catalog: &cat,
            seed: 0,
            time_limit: None,
            gap_target: 0.0,
            threads: 1,
        };
        assert!(matches!(b.solve(&req), Err(HarnessError::LaunchError(_))));
    }

    #[test]
    fn planted_and_overrides() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let mut t = table();
        t.planted = Some(Planted { config: "aaoodd".into(), penalty: 0.5 });
        t.overrides.push(Override { signature: "oooooo".into(), instance: None, multiplier: Some(0.25), time: None });
        let b = StubBackend::new(t);
        let default = default_configuration(&cat);
        let star = Configuration::from_levels(
            &cat,
            &[
                SettingLevel::Aggressive,
                SettingLevel::Aggressive,
                SettingLevel::Off,
                SettingLevel::Off,
                SettingLevel::Default,
                SettingLevel::Default,
            ],
            Provenance::Manual,
        )
        .unwrap();
        let off = Configuration::uniform(&cat, SettingLevel::Off, Provenance::Manual).unwrap();
        assert_eq!(b.scripted_time("slow", &default, 0).unwrap(), 12.0);
        // Default is 4 flips away: (1 + 0) / (1 + 2).
        assert!((b.scripted_time("slow", &star, 0).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(b.scripted_time("slow", &off, 0).unwrap(), 3.0);
    }

    #[test]
    fn noise_is_deterministic_and_bounded() {
        for seed in 0..50 {
            let u = seed_noise("x", seed);
            assert!((-1.0..=1.0).contains(&u));
            assert_eq!(u, seed_noise("x", seed));
        }
    }
}
