//! Payloads written to the artifact store. Nothing here depends on wall-clock
//! time, so replays produce byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sepconf::artifact::{ArtifactStore, StoredArtifact};
use sepconf::catalog::{default_configuration, parse_configuration, CatalogRef, Configuration, SeparatorCatalog};
use sepconf::ensemble::{Clustering, SelectionOutcome};
use sepconf::harness::{Evaluation, RunPlan, Summary};
use sepconf::llm::PromptFlags;
use sepconf::pool::ConfigurationPool;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateInputs {
    pub card_title: String,
    pub card_hash: String,
    pub catalog: CatalogRef,
    pub flags: PromptFlags,
    pub model_id: String,
    pub temperature: f64,
    pub pool_size: usize,
    pub retry_budget: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolArtifact {
    pub inputs: GenerateInputs,
    pub pool: ConfigurationPool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub plan: RunPlan,
    pub instances: Vec<String>,
    /// One evaluation per candidate, in candidate order.
    pub evaluations: Vec<Evaluation>,
    pub solves: usize,
}

/// Output of `ensemble`, `baseline` and `textfree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionArtifact {
    pub method: String,
    pub inputs: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clustering: Option<Clustering>,
    pub selection: SelectionOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalArtifact {
    pub label: String,
    pub config: Configuration,
    pub instance_set: String,
    pub plan: RunPlan,
    pub evaluation: Evaluation,
    /// Absent when no instance produced a record.
    pub summary: Option<Summary>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    crate::setup::require_file(path, what)?;
    ArtifactStore::get(path).map_err(|e| CliError::failure(format!("cannot read {what} {}: {e}", path.display())))
}

pub fn put<T: Serialize>(store: &ArtifactStore, kind: &str, value: &T) -> CliResult<StoredArtifact> {
    Ok(store.put(kind, value)?)
}

#[derive(Deserialize)]
struct FinalOnly {
    #[serde(rename = "final")]
    final_config: Configuration,
}

// Typed wrappers rather than `serde_json::Value`, whose maps would reorder the levels.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigDocument {
    Selection { selection: FinalOnly },
    Outcome(FinalOnly),
    Evaluation { config: Configuration },
    Bare(Configuration),
}

/// Resolves `default`, a selection, text-free or evaluation artifact, a bare
/// configuration JSON, or an `id: level` text file.
pub fn load_configuration(spec: &str, catalog: &SeparatorCatalog) -> CliResult<Configuration> {
    if spec == "default" {
        return Ok(default_configuration(catalog));
    }
    let path = Path::new(spec);
    crate::setup::require_file(path, "configuration")?;
    let text = std::fs::read_to_string(path)?;
    let config = if text.trim_start().starts_with('{') {
        match serde_json::from_str::<ConfigDocument>(&text) {
            Ok(ConfigDocument::Selection { selection }) => selection.final_config,
            Ok(ConfigDocument::Outcome(o)) => o.final_config,
            Ok(ConfigDocument::Evaluation { config }) | Ok(ConfigDocument::Bare(config)) => config,
            Err(e) => return Err(CliError::failure(format!("{spec} holds no configuration: {e}"))),
        }
    } else {
        parse_configuration(&text, catalog)?
    };
    config.validate(catalog)?;
    Ok(config)
}
