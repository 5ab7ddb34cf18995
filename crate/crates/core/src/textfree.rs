//! Configuration from an MPS file alone: constraint-type histogram, candidate
//! problem descriptions, per-description pools, cold-start selection.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::SeparatorCatalog;
use crate::ensemble::{kmedoids, select_cold_start, Clustering, EnsembleError, SelectionOutcome};
use crate::llm::{
    build_description_prompt, generate_pool, nonce, parse_descriptions, CardSource, GenerateOptions, LlmClient,
    LlmError, ProblemCard, PromptFlags,
};
use crate::mps::{histogram, parse_mps, MpsError, StructureHistogram};
use crate::pool::ConfigurationPool;

#[derive(Debug, Error)]
pub enum TextFreeError {
    #[error("the model produced no problem descriptions")]
    NoDescriptions,
    #[error(transparent)]
    Mps(#[from] MpsError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextFreePlan {
    pub k_desc: usize,
    pub configs_per_desc: usize,
    /// Clusters before largest-cluster selection.
    pub k: usize,
    pub retry_budget: usize,
    pub temperature: f64,
    pub concurrency: usize,
    pub seed: u64,
}

impl Default for TextFreePlan {
    fn default() -> Self {
        TextFreePlan {
            k_desc: 5,
            configs_per_desc: 20,
            k: 5,
            retry_budget: 3,
            temperature: 1.0,
            concurrency: 8,
            seed: 0,
        }
    }
}

impl TextFreePlan {
    pub fn intended_pool_size(&self) -> usize {
        self.k_desc * self.configs_per_desc
    }
}

/// Every intermediate of a text-free run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TextFreeRun {
    pub histogram: StructureHistogram,
    pub description_response: String,
    pub cards: Vec<ProblemCard>,
    pub pool: ConfigurationPool,
    pub clustering: Clustering,
    pub selection: SelectionOutcome,
}

/// Runs the pipeline on a parsed histogram. Never invokes a MILP solver.
pub fn textfree_from_histogram(
    hist: &StructureHistogram,
    catalog: &SeparatorCatalog,
    client: &dyn LlmClient,
    plan: &TextFreePlan,
) -> Result<TextFreeRun, TextFreeError> {
    let prompt = build_description_prompt(hist, plan.k_desc, plan.temperature, &client.model_id())?;
    let response = client.complete(&prompt, nonce(0, 0))?;
    let mut cards = match parse_descriptions(&response, plan.k_desc) {
        Ok(cards) => cards,
        Err(LlmError::NoBlockFound) => return Err(TextFreeError::NoDescriptions),
        Err(e) => return Err(e.into()),
    };
    for card in &mut cards {
        card.source = CardSource::LlmGenerated { instance: Some(hist.instance.clone()) };
    }

    let segments: Vec<Result<ConfigurationPool, LlmError>> = cards
        .par_iter()
        .enumerate()
        .map(|(d, card)| {
            let opts = GenerateOptions {
                pool_size: plan.configs_per_desc,
                flags: PromptFlags::default(),
                retry_budget: plan.retry_budget,
                temperature: plan.temperature,
                concurrency: plan.concurrency,
                description: Some(d),
            };
            match generate_pool(card, catalog, client, &opts) {
                Err(LlmError::PoolIncomplete { pool, .. }) => {
                    log::warn!("description {d}: pool has {} of {} configurations", pool.len(), plan.configs_per_desc);
                    Ok(*pool)
                }
                other => other,
            }
        })
        .collect();

    let mut pool = ConfigurationPool::new(catalog.reference());
    for segment in segments {
        let segment = segment?;
        pool.configs.extend(segment.configs);
        pool.failures.extend(segment.failures);
    }
    if pool.is_empty() {
        return Err(EnsembleError::EmptyPool.into());
    }
    let k = plan.k.min(pool.distinct_count()).max(1);
    let clustering = kmedoids(&pool.configs, k, plan.seed)?;
    let selection = select_cold_start(&clustering, &pool.configs)?;
    Ok(TextFreeRun { histogram: hist.clone(), description_response: response, cards, pool, clustering, selection })
}

pub fn textfree_configure(
    instance: impl AsRef<Path>,
    catalog: &SeparatorCatalog,
    client: &dyn LlmClient,
    plan: &TextFreePlan,
) -> Result<TextFreeRun, TextFreeError> {
    let milp = parse_mps(instance)?;
    textfree_from_histogram(&histogram(&milp), catalog, client, plan)
}
