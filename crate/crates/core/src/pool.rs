use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogRef, Configuration};
use crate::hashing::sha256_hex;

/// A failed completion while sampling a pool member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample: usize,
    pub attempt: usize,
    pub error: String,
    /// Raw model output, kept for auditing.
    pub raw: Option<String>,
}

/// Ordered multiset of configurations over one catalog. Duplicates are kept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationPool {
    pub catalog: CatalogRef,
    pub configs: Vec<Configuration>,
    #[serde(default)]
    pub failures: Vec<SampleFailure>,
}

impl ConfigurationPool {
    pub fn new(catalog: CatalogRef) -> Self {
        ConfigurationPool { catalog, configs: Vec::new(), failures: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    /// Number of failed completions that were followed by a retry.
    pub fn retries(&self) -> usize {
        self.failures.len()
    }

    /// Hash over the member level vectors, in order.
    pub fn content_hash(&self) -> String {
        let joined: Vec<String> = self.configs.iter().map(Configuration::signature).collect();
        sha256_hex(format!("{}|{}", self.catalog.hash, joined.join(",")).as_bytes())
    }

    pub fn distinct_count(&self) -> usize {
        let set: std::collections::HashSet<&Configuration> = self.configs.iter().collect();
        set.len()
    }
}
