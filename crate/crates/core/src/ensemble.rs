//! Reducing a configuration pool to one configuration.
//!
//! The pool is clustered with PAM (BUILD followed by SWAP) under the Hamming
//! distance between level vectors. The final configuration is either the
//! medoid of the largest cluster (cold start) or the medoid with the best
//! median validation improvement. Average, mode and smallest reductions are
//! provided for ablations.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Configuration, Provenance, SeparatorCatalog, SettingLevel};
use crate::harness::{Evaluation, Harness, InstanceSet};
use crate::stats;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("configurations come from different catalogs")]
    CatalogMismatch,
    #[error("k = {k} exceeds the {distinct} distinct configurations in the pool")]
    KTooLarge { k: usize, distinct: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("pool is empty")]
    EmptyPool,
    #[error("missing validation results: {0}")]
    MissingResults(String),
    #[error("validated selection needs a non-empty validation set")]
    MissingValidationSet,
    #[error("validation solves failed: {0}")]
    Harness(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    ColdStartLargestCluster,
    ValidatedBestMedian,
    Average,
    Mode,
    Smallest,
    RandomSearch,
    Pruning,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::ColdStartLargestCluster => "cold_start_largest_cluster",
            Strategy::ValidatedBestMedian => "validated_best_median",
            Strategy::Average => "average",
            Strategy::Mode => "mode",
            Strategy::Smallest => "smallest",
            Strategy::RandomSearch => "random_search",
            Strategy::Pruning => "pruning",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hamming distance between level vectors.
pub fn config_distance(a: &Configuration, b: &Configuration) -> Result<usize, EnsembleError> {
    if a.catalog() != b.catalog() {
        return Err(EnsembleError::CatalogMismatch);
    }
    Ok(a.levels().zip(b.levels()).filter(|((_, x), (_, y))| x != y).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Pool indices of the medoids, ascending; cluster `c` has medoid `medoid_indices[c]`.
    pub medoid_indices: Vec<usize>,
    /// Cluster index of every pool member.
    pub assignment: Vec<usize>,
    pub total_cost: usize,
    /// Total cost after BUILD and after each accepted swap.
    pub cost_history: Vec<usize>,
}

impl Clustering {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    /// Sum of member-to-medoid distances per cluster.
    pub fn within_costs(&self, dist: &DistanceMatrix) -> Vec<usize> {
        let mut costs = vec![0; self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            costs[c] += dist.get(i, self.medoid_indices[c]);
        }
        costs
    }
}

/// Dense symmetric distance matrix over a pool.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<usize>,
}

impl DistanceMatrix {
    pub fn new(pool: &[Configuration]) -> Result<Self, EnsembleError> {
        if let Some(first) = pool.first() {
            if pool.iter().any(|c| c.catalog() != first.catalog()) {
                return Err(EnsembleError::CatalogMismatch);
            }
        }
        let vectors: Vec<Vec<SettingLevel>> = pool.iter().map(Configuration::level_vector).collect();
        let n = pool.len();
        let data = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                vectors[i].iter().zip(&vectors[j]).filter(|(a, b)| a != b).count()
            })
            .collect();
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.data[i * self.n + j]
    }

    /// Total cost of assigning every point to its nearest medoid.
    pub fn cost(&self, medoids: &[usize]) -> usize {
        (0..self.n).map(|i| medoids.iter().map(|&m| self.get(i, m)).min().unwrap_or(0)).sum()
    }
}

/// PAM k-medoids. BUILD ties are broken by a seeded shuffle; SWAP applies
/// the best improving swap until none lowers the total cost. Medoids are
/// always pool members with pairwise distinct configurations.
pub fn kmedoids(pool: &[Configuration], k: usize, seed: u64) -> Result<Clustering, EnsembleError> {
    if pool.is_empty() {
        return Err(EnsembleError::EmptyPool);
    }
    if k == 0 {
        return Err(EnsembleError::ZeroK);
    }
    let distinct = pool.iter().collect::<HashSet<_>>().len();
    if k > distinct {
        return Err(EnsembleError::KTooLarge { k, distinct });
    }
    let dist = DistanceMatrix::new(pool)?;
    let n = pool.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let mut nearest = vec![usize::MAX; n];
    while medoids.len() < k {
        let mut best: Option<(i64, usize)> = None;
        for &cand in &order {
            if medoids.iter().any(|&m| dist.get(cand, m) == 0) {
                continue;
            }
            // Cost reduction if `cand` is added; the first medoid minimizes total distance.
            let score: i64 = if medoids.is_empty() {
                -((0..n).map(|j| dist.get(cand, j)).sum::<usize>() as i64)
            } else {
                (0..n).map(|j| nearest[j].saturating_sub(dist.get(cand, j)) as i64).sum()
            };
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, cand));
            }
        }
        let (_, chosen) = best.expect("k <= distinct guarantees a candidate");
        medoids.push(chosen);
        for (j, slot) in nearest.iter_mut().enumerate() {
            *slot = (*slot).min(dist.get(chosen, j));
        }
    }

    // SWAP
    let mut cost = dist.cost(&medoids);
    let mut history = vec![cost];
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for slot in 0..k {
            for &cand in &order {
                if medoids.iter().enumerate().any(|(s, &m)| s != slot && dist.get(cand, m) == 0)
                    || dist.get(cand, medoids[slot]) == 0
                {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = cand;
                let c = dist.cost(&trial);
                if c < best.map_or(cost, |(bc, _, _)| bc) {
                    best = Some((c, slot, cand));
                }
            }
        }
        match best {
            Some((c, slot, cand)) => {
                medoids[slot] = cand;
                cost = c;
                history.push(cost);
            }
            None => break,
        }
    }

    medoids.sort_unstable();
    let assignment: Vec<usize> = (0..n)
        .map(|i| {
            let mut best_c = 0;
            for c in 1..k {
                if dist.get(i, medoids[c]) < dist.get(i, medoids[best_c]) {
                    best_c = c;
                }
            }
            best_c
        })
        .collect();
    let total_cost = assignment.iter().enumerate().map(|(i, &c)| dist.get(i, medoids[c])).sum();
    debug_assert_eq!(total_cost, cost);
    Ok(Clustering { k, medoid_indices: medoids, assignment, total_cost, cost_history: history })
}

/// One candidate evaluated on validation instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub config: Configuration,
    pub median: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    #[serde(rename = "final")]
    pub final_config: Configuration,
    pub strategy: Strategy,
    /// Index of the chosen configuration in the pool or candidate list, when it is a member.
    pub source_index: Option<usize>,
    #[serde(default)]
    pub candidates_tested: Vec<CandidateResult>,
}

fn tagged(config: &Configuration, strategy: Strategy) -> Configuration {
    config.clone().with_provenance(Provenance::Ensemble { strategy: strategy.as_str().to_string() })
}

/// Medoid of the largest cluster; ties go to the lower within-cluster cost, then the lower cluster index.
pub fn select_cold_start(clustering: &Clustering, pool: &[Configuration]) -> Result<SelectionOutcome, EnsembleError> {
    if pool.is_empty() {
        return Err(EnsembleError::EmptyPool);
    }
    let dist = DistanceMatrix::new(pool)?;
    let sizes = clustering.cluster_sizes();
    let costs = clustering.within_costs(&dist);
    let best = (0..clustering.k)
        .min_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(costs[a].cmp(&costs[b])).then(a.cmp(&b)))
        .expect("k >= 1");
    let idx = clustering.medoid_indices[best];
    Ok(SelectionOutcome {
        final_config: tagged(&pool[idx], Strategy::ColdStartLargestCluster),
        strategy: Strategy::ColdStartLargestCluster,
        source_index: Some(idx),
        candidates_tested: Vec::new(),
    })
}

/// Candidate with the largest median improvement; ties go to fewer
/// non-default levels, then the earlier candidate.
pub fn select_validated(results: &[(Configuration, Vec<f64>)]) -> Result<SelectionOutcome, EnsembleError> {
    if results.is_empty() {
        return Err(EnsembleError::MissingResults("no candidates".into()));
    }
    let mut tested = Vec::with_capacity(results.len());
    for (i, (config, values)) in results.iter().enumerate() {
        let median = stats::median(values)
            .ok_or_else(|| EnsembleError::MissingResults(format!("candidate {i} has no improvement values")))?;
        tested.push(CandidateResult { config: config.clone(), median });
    }
    let best = (0..tested.len())
        .min_by(|&a, &b| {
            tested[b]
                .median
                .total_cmp(&tested[a].median)
                .then(tested[a].config.non_default_count().cmp(&tested[b].config.non_default_count()))
                .then(a.cmp(&b))
        })
        .expect("non-empty");
    Ok(SelectionOutcome {
        final_config: tagged(&tested[best].config, Strategy::ValidatedBestMedian),
        strategy: Strategy::ValidatedBestMedian,
        source_index: Some(best),
        candidates_tested: tested,
    })
}

/// Medoid evaluations behind a validated selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidatedSelection {
    pub selection: SelectionOutcome,
    /// One evaluation per medoid, in medoid order.
    pub evaluations: Vec<Evaluation>,
    /// Configured solves: `k * |validation| * seeds` when nothing fails.
    pub solves: usize,
}

/// Evaluates every medoid on the validation set and keeps the best median.
/// `source_index` in the outcome indexes the medoid list.
pub fn select_by_validation(
    clustering: &Clustering,
    pool: &[Configuration],
    harness: &Harness<'_>,
    validation: &InstanceSet,
) -> Result<ValidatedSelection, EnsembleError> {
    if validation.is_empty() {
        return Err(EnsembleError::MissingValidationSet);
    }
    let mut evaluations = Vec::with_capacity(clustering.k);
    let mut results = Vec::with_capacity(clustering.k);
    for &m in &clustering.medoid_indices {
        let eval = harness.evaluate(&pool[m], validation).map_err(|e| EnsembleError::Harness(e.to_string()))?;
        results.push((pool[m].clone(), eval.records.iter().map(|r| r.improvement).collect::<Vec<f64>>()));
        evaluations.push(eval);
    }
    let selection = select_validated(&results)?;
    let solves = evaluations.iter().map(|e| e.solves).sum();
    Ok(ValidatedSelection { selection, evaluations, solves })
}

fn uniform_catalog(pool: &[Configuration]) -> Result<(), EnsembleError> {
    let first = pool.first().ok_or(EnsembleError::EmptyPool)?;
    if pool.iter().any(|c| c.catalog() != first.catalog()) {
        return Err(EnsembleError::CatalogMismatch);
    }
    Ok(())
}

/// Per separator, the mean ordinal (off 0, default 1, aggressive 2) rounded half up.
///
/// The catalog is needed to rebuild a validated configuration; a rounded
/// level outside the catalog's allowed set falls back to `Default`.
pub fn ensemble_average(pool: &[Configuration], catalog: &SeparatorCatalog) -> Result<Configuration, EnsembleError> {
    uniform_catalog(pool)?;
    if pool[0].catalog() != &catalog.reference() {
        return Err(EnsembleError::CatalogMismatch);
    }
    let n = pool.len() as u64;
    let vectors: Vec<Vec<SettingLevel>> = pool.iter().map(Configuration::level_vector).collect();
    let levels: Vec<SettingLevel> = (0..catalog.len())
        .map(|s| {
            let sum: u64 = vectors.iter().map(|v| v[s].ordinal() as u64).sum();
            // round(sum / n) with halves rounded up, in integer arithmetic
            let rounded = (2 * sum + n) / (2 * n);
            let level = SettingLevel::from_ordinal(rounded as u8).expect("mean of ordinals is in range");
            if catalog.allows(level) {
                level
            } else {
                SettingLevel::Default
            }
        })
        .collect();
    let provenance = Provenance::Ensemble { strategy: Strategy::Average.as_str().into() };
    Configuration::from_levels(catalog, &levels, provenance).map_err(|_| EnsembleError::CatalogMismatch)
}

/// Most frequent whole configuration; ties go to fewer non-default levels, then the earliest first occurrence.
pub fn ensemble_mode(pool: &[Configuration]) -> Result<SelectionOutcome, EnsembleError> {
    uniform_catalog(pool)?;
    let mut counts: HashMap<&Configuration, (usize, usize)> = HashMap::new();
    for (i, c) in pool.iter().enumerate() {
        counts.entry(c).or_insert((0, i)).0 += 1;
    }
    let (_, &(_, first)) = counts
        .iter()
        .min_by(|(ca, (na, ia)), (cb, (nb, ib))| {
            nb.cmp(na).then(ca.non_default_count().cmp(&cb.non_default_count())).then(ia.cmp(ib))
        })
        .expect("non-empty");
    Ok(SelectionOutcome {
        final_config: tagged(&pool[first], Strategy::Mode),
        strategy: Strategy::Mode,
        source_index: Some(first),
        candidates_tested: Vec::new(),
    })
}

/// Configuration enabling the fewest separators (levels other than `Off`); ties go to the earliest.
pub fn ensemble_smallest(pool: &[Configuration]) -> Result<SelectionOutcome, EnsembleError> {
    uniform_catalog(pool)?;
    let idx = (0..pool.len()).min_by_key(|&i| (pool[i].enabled_count(), i)).expect("non-empty");
    Ok(SelectionOutcome {
        final_config: tagged(&pool[idx], Strategy::Smallest),
        strategy: Strategy::Smallest,
        source_index: Some(idx),
        candidates_tested: Vec::new(),
    })
}
