use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_config_prompt, nonce, parse_config_response, LlmClient, LlmError, ProblemCard, PromptFlags};
use crate::catalog::{Configuration, Provenance, SeparatorCatalog};
use crate::pool::{ConfigurationPool, SampleFailure};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateOptions {
    pub pool_size: usize,
    pub flags: PromptFlags,
    /// Completions allowed per sample, including the first.
    pub retry_budget: usize,
    pub temperature: f64,
    /// Completions in flight at once.
    pub concurrency: usize,
    /// Recorded in each sample's provenance (text-free pools).
    pub description: Option<usize>,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            pool_size: 100,
            flags: PromptFlags::default(),
            retry_budget: 3,
            temperature: 1.0,
            concurrency: 8,
            description: None,
        }
    }
}

type SampleResult = (Option<Configuration>, Vec<SampleFailure>);

fn sample(
    i: usize,
    prompt: &super::PromptBundle,
    catalog: &SeparatorCatalog,
    client: &dyn LlmClient,
    opts: &GenerateOptions,
) -> SampleResult {
    let mut failures = Vec::new();
    for attempt in 0..opts.retry_budget.max(1) {
        let (error, raw) = match client.complete(prompt, nonce(i, attempt)) {
            Ok(raw) => match parse_config_response(&raw, catalog) {
                Ok(config) => {
                    let provenance = Provenance::LlmSample { index: i, description: opts.description };
                    return (Some(config.with_provenance(provenance)), failures);
                }
                Err(e) => (e.to_string(), Some(raw)),
            },
            Err(e) => (e.to_string(), None),
        };
        log::debug!("sample {i} attempt {attempt} failed: {error}");
        failures.push(SampleFailure { sample: i, attempt, error, raw });
    }
    (None, failures)
}

/// Samples `pool_size` configurations, each with at most `retry_budget`
/// completions. Members keep sample order; failed samples leave gaps that
/// surface as `PoolIncomplete` carrying the partial pool.
pub fn generate_pool(
    card: &ProblemCard,
    catalog: &SeparatorCatalog,
    client: &dyn LlmClient,
    opts: &GenerateOptions,
) -> Result<ConfigurationPool, LlmError> {
    if opts.pool_size == 0 {
        return Err(LlmError::PoolIncomplete {
            pool: Box::new(ConfigurationPool::new(catalog.reference())),
            wanted: 0,
        });
    }
    let prompt = build_config_prompt(card, catalog, opts.flags, opts.temperature, &client.model_id())?;
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.concurrency.max(1))
        .build()
        .map_err(|e| LlmError::Transport(e.to_string()))?;
    let results: Vec<SampleResult> = threads
        .install(|| (0..opts.pool_size).into_par_iter().map(|i| sample(i, &prompt, catalog, client, opts)).collect());
    let mut pool = ConfigurationPool::new(catalog.reference());
    for (config, failures) in results {
        pool.configs.extend(config);
        pool.failures.extend(failures);
    }
    if pool.len() < opts.pool_size {
        return Err(LlmError::PoolIncomplete { pool: Box::new(pool), wanted: opts.pool_size });
    }
    Ok(pool)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{SettingLevel, Solver};
    use crate::llm::{format_config_block, split_nonce, CardSource, ScriptedClient};

    fn card() -> ProblemCard {
        ProblemCard {
            title: "Set cover".into(),
            description: "Cover every element with the cheapest family of subsets.".into(),
            latex_model: String::new(),
            source: CardSource::Authored,
        }
    }

    fn valid(cat: &SeparatorCatalog, i: usize) -> String {
        let levels: Vec<SettingLevel> = (0..cat.len()).map(|j| SettingLevel::ALL[(i + j) % 3]).collect();
        format_config_block(&Configuration::from_levels(cat, &levels, Provenance::Manual).unwrap())
    }

    #[test]
    fn full_pool_in_order() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let c2 = cat.clone();
        let client = ScriptedClient::new(move |_, n| Ok(valid(&c2, split_nonce(n).0)));
        let pool = generate_pool(&card(), &cat, &client, &GenerateOptions::default()).unwrap();
        assert_eq!(pool.len(), 100);
        assert_eq!(pool.retries(), 0);
        for (i, c) in pool.configs.iter().enumerate() {
            assert_eq!(c.provenance(), &Provenance::LlmSample { index: i, description: None });
            assert_eq!(c.level_vector()[0], SettingLevel::ALL[i % 3]);
        }
    }

    #[test]
    fn retries_are_counted() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let c2 = cat.clone();
        let client = ScriptedClient::new(move |_, n| {
            let (i, attempt) = split_nonce(n);
            Ok(if attempt == 0 { "no block here".into() } else { valid(&c2, i) })
        });
        let opts = GenerateOptions { retry_budget: 2, ..Default::default() };
        let pool = generate_pool(&card(), &cat, &client, &opts).unwrap();
        assert_eq!(pool.len(), 100);
        assert_eq!(pool.retries(), 100);
        assert!(pool.failures.iter().all(|f| f.raw.as_deref() == Some("no block here")));
    }

    #[test]
    fn always_invalid_is_incomplete() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let client = ScriptedClient::new(|_, _| Ok("```\nsuperCuts: on\n```".into()));
        match generate_pool(&card(), &cat, &client, &GenerateOptions::default()) {
            Err(LlmError::PoolIncomplete { pool, wanted }) => {
                assert_eq!((pool.len(), wanted), (0, 100));
                assert_eq!(pool.failures.len(), 300);
            }
            other => panic!("expected PoolIncomplete, got {other:?}"),
        }
    }
}
