//! Comparison methods: Pruning and Search(d).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, Configuration, Provenance, SeparatorCatalog, SettingLevel};
use crate::ensemble::{CandidateResult, SelectionOutcome, Strategy};
use crate::harness::{Harness, HarnessError, InstanceSet};
use crate::stats;

/// Candidate sampling draws from this ChaCha stream so candidate sequences do
/// not depend on anything else consuming the same seed.
pub const SEARCH_STREAM: u64 = 0x5ea7c4;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("validation set is empty")]
    EmptyValidationSet,
    #[error("statistics rows not mapped by the catalog: {0:?}")]
    UnknownSeparatorInStats(Vec<String>),
    #[error("d must be at least 1")]
    ZeroCandidates,
    #[error("no evaluation records for candidate {0}")]
    NoRecords(usize),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Cuts applied per separator id on one instance.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorUsage {
    pub instance: String,
    pub applied: BTreeMap<String, u64>,
}

impl SeparatorUsage {
    /// Maps statistics row names to separator ids, skipping the catalog's ignored rows.
    pub fn from_stats(
        instance: impl Into<String>,
        stats: &BTreeMap<String, u64>,
        catalog: &SeparatorCatalog,
    ) -> Result<Self, BaselineError> {
        let mut applied = BTreeMap::new();
        let mut unknown = Vec::new();
        for (name, &count) in stats {
            match catalog.id_for_stats_name(name) {
                Some(id) => *applied.entry(id.to_string()).or_insert(0) += count,
                None if catalog.is_ignored_stats(name) => {}
                None => unknown.push(name.clone()),
            }
        }
        if !unknown.is_empty() {
            return Err(BaselineError::UnknownSeparatorInStats(unknown));
        }
        Ok(SeparatorUsage { instance: instance.into(), applied })
    }
}

/// Usage summed over the seeds of each instance's default-configuration solves.
pub fn collect_usage(harness: &Harness<'_>, instances: &InstanceSet) -> Result<Vec<SeparatorUsage>, BaselineError> {
    if instances.is_empty() {
        return Err(BaselineError::EmptyValidationSet);
    }
    let mut out = Vec::with_capacity(instances.len());
    for (instance, outcomes) in instances.instances.iter().zip(harness.default_outcomes(instances)?) {
        let mut unknown: Vec<String> = outcomes.iter().flat_map(|o| o.unmapped_stats.iter().cloned()).collect();
        if !unknown.is_empty() {
            unknown.sort();
            unknown.dedup();
            return Err(BaselineError::UnknownSeparatorInStats(unknown));
        }
        let mut applied = BTreeMap::new();
        for o in &outcomes {
            for (id, n) in &o.cuts_applied {
                *applied.entry(id.clone()).or_insert(0) += n;
            }
        }
        out.push(SeparatorUsage { instance: instance.id.clone(), applied });
    }
    Ok(out)
}

/// Separators the solver cannot report on; Pruning never turns these off.
pub fn unobservable(catalog: &SeparatorCatalog) -> Vec<&str> {
    catalog.separators().iter().filter(|s| s.stats_name.is_none()).map(|s| s.id.as_str()).collect()
}

/// Off for every observable separator with zero applied cuts across all
/// instances, Default otherwise.
pub fn pruning(usage: &[SeparatorUsage], catalog: &SeparatorCatalog) -> Result<Configuration, BaselineError> {
    if usage.is_empty() {
        return Err(BaselineError::EmptyValidationSet);
    }
    let mut unknown: Vec<String> =
        usage.iter().flat_map(|u| u.applied.keys()).filter(|id| catalog.position(id).is_none()).cloned().collect();
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(BaselineError::UnknownSeparatorInStats(unknown));
    }
    let off = if catalog.allows(SettingLevel::Off) { SettingLevel::Off } else { SettingLevel::Default };
    let levels: Vec<SettingLevel> = catalog
        .separators()
        .iter()
        .map(|s| {
            let total: u64 = usage.iter().filter_map(|u| u.applied.get(&s.id)).sum();
            if total == 0 && s.stats_name.is_some() {
                off
            } else {
                SettingLevel::Default
            }
        })
        .collect();
    for id in unobservable(catalog) {
        log::warn!("separator `{id}` has no statistics row; kept at default");
    }
    Ok(Configuration::from_levels(catalog, &levels, Provenance::Baseline { name: "pruning".into() })?)
}

/// Each separator's level drawn independently and uniformly from the allowed levels.
pub fn random_configuration<R: Rng + ?Sized>(catalog: &SeparatorCatalog, rng: &mut R) -> Configuration {
    let allowed = catalog.allowed_levels();
    let levels: Vec<SettingLevel> =
        catalog.separators().iter().map(|_| *allowed.choose(rng).expect("at least two levels")).collect();
    Configuration::from_levels(catalog, &levels, Provenance::Baseline { name: "random".into() })
        .expect("levels drawn from the catalog")
}

/// The `d` candidates Search evaluates for a given seed. A longer list
/// extends a shorter one with the same seed.
pub fn search_candidates(d: usize, catalog: &SeparatorCatalog, seed: u64) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SEARCH_STREAM);
    (0..d).map(|_| random_configuration(catalog, &mut rng)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub selection: SelectionOutcome,
    /// Configured solves spent on candidates: `d * |validation| * seeds`.
    pub solves: usize,
    /// Instances whose runs failed, per candidate index.
    pub failures: Vec<(usize, String)>,
}

/// Evaluates `d` random configurations and keeps the best validation median
/// (ties to the earlier candidate).
pub fn search(
    d: usize,
    harness: &Harness<'_>,
    validation: &InstanceSet,
    seed: u64,
) -> Result<SearchResult, BaselineError> {
    if d == 0 {
        return Err(BaselineError::ZeroCandidates);
    }
    if validation.is_empty() {
        return Err(BaselineError::EmptyValidationSet);
    }
    let candidates = search_candidates(d, harness.catalog(), seed);
    let mut tested = Vec::with_capacity(d);
    let mut solves = 0;
    let mut failures = Vec::new();
    for (i, config) in candidates.iter().enumerate() {
        let eval = harness.evaluate(config, validation)?;
        solves += eval.solves;
        failures.extend(eval.failures.iter().map(|f| (i, f.instance.clone())));
        let values: Vec<f64> = eval.records.iter().map(|r| r.improvement).collect();
        let median = stats::median(&values).ok_or(BaselineError::NoRecords(i))?;
        tested.push(CandidateResult { config: config.clone(), median });
    }
    let mut best = 0;
    for (i, c) in tested.iter().enumerate() {
        if c.median > tested[best].median {
            best = i;
        }
    }
    let final_config = tested[best].config.clone().with_provenance(Provenance::Baseline { name: "search".into() });
    Ok(SearchResult {
        selection: SelectionOutcome {
            final_config,
            strategy: Strategy::RandomSearch,
            source_index: Some(best),
            candidates_tested: tested,
        },
        solves,
        failures,
    })
}
