//! Separator catalogs and separator configurations.
//!
//! A catalog lists the cutting-plane separators a solver exposes, the
//! parameter lines each setting level renders to, and a short text
//! description used in prompts. Catalogs are loaded from TOML files and
//! identified by a SHA-256 over their canonical JSON form, so
//! configurations built against one catalog cannot be mixed with another.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing::sha256_hex;

const MAX_DESCRIPTION_WORDS: usize = 200;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid catalog: {0}")]
    Validation(String),
    #[error("catalog mismatch: expected {expected}, found {found}")]
    CatalogMismatch { expected: String, found: String },
    #[error("unknown separator(s): {}", .0.join(", "))]
    UnknownSeparator(Vec<String>),
    #[error("level {level} is not allowed for separator {id}")]
    IllegalLevel { id: String, level: String },
}

/// One of the three settings a separator can take. Ordered `Off < Default < Aggressive`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingLevel {
    Off,
    Default,
    Aggressive,
}

impl SettingLevel {
    pub const ALL: [SettingLevel; 3] = [SettingLevel::Off, SettingLevel::Default, SettingLevel::Aggressive];

    pub fn as_str(self) -> &'static str {
        match self {
            SettingLevel::Off => "off",
            SettingLevel::Default => "default",
            SettingLevel::Aggressive => "aggressive",
        }
    }

    pub fn ordinal(self) -> u8 {
        self as u8
    }

    pub fn from_ordinal(ordinal: u8) -> Option<Self> {
        Self::ALL.get(ordinal as usize).copied()
    }
}

impl fmt::Display for SettingLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingLevel {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(SettingLevel::Off),
            "default" => Ok(SettingLevel::Default),
            "aggressive" => Ok(SettingLevel::Aggressive),
            other => Err(CatalogError::Parse(format!("unknown setting level `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Scip,
    Gurobi,
    Stub,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Scip => "scip",
            Solver::Gurobi => "gurobi",
            Solver::Stub => "stub",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "scip" => Ok(Solver::Scip),
            "gurobi" => Ok(Solver::Gurobi),
            "stub" => Ok(Solver::Stub),
            other => Err(CatalogError::Parse(format!("unknown solver `{other}`"))),
        }
    }
}

/// Parameter lines emitted for each setting level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRenderings {
    pub off: Vec<(String, String)>,
    pub default: Vec<(String, String)>,
    pub aggressive: Vec<(String, String)>,
}

impl LevelRenderings {
    pub fn get(&self, level: SettingLevel) -> &[(String, String)] {
        match level {
            SettingLevel::Off => &self.off,
            SettingLevel::Default => &self.default,
            SettingLevel::Aggressive => &self.aggressive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorSpec {
    pub id: String,
    pub solver_param: String,
    pub display_name: String,
    pub description: String,
    /// Row name of this separator in the solver's statistics output.
    pub stats_name: Option<String>,
    pub renderings: LevelRenderings,
}

/// Identity of a catalog: configurations are comparable only when these match.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CatalogRef {
    pub solver: Solver,
    pub version_tag: String,
    pub hash: String,
}

impl fmt::Display for CatalogRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}@{}", self.solver, self.version_tag, &self.hash[..self.hash.len().min(12)])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorCatalog {
    solver: Solver,
    version_tag: String,
    separators: Vec<SeparatorSpec>,
    allowed_levels: Vec<SettingLevel>,
    index: IndexMap<String, usize>,
    ignored_stats: Vec<String>,
    hash: String,
}

// On-disk layout. Rendering values may be written as strings or numbers.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    solver: Solver,
    version_tag: String,
    allowed_levels: Vec<String>,
    /// Statistics rows produced by separators outside the catalog.
    #[serde(default)]
    ignored_stats: Vec<String>,
    separators: Vec<SeparatorFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparatorFile {
    id: String,
    solver_param: String,
    display_name: String,
    description: String,
    #[serde(default)]
    stats_name: Option<String>,
    levels: IndexMap<String, Vec<(String, toml::Value)>>,
}

#[derive(Serialize)]
struct CanonicalCatalog<'a> {
    solver: Solver,
    version_tag: &'a str,
    allowed_levels: &'a [SettingLevel],
    separators: &'a [SeparatorSpec],
    #[serde(skip_serializing_if = "<[String]>::is_empty")]
    ignored_stats: &'a [String],
}

fn scalar_to_string(value: &toml::Value) -> Result<String, CatalogError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        toml::Value::Boolean(b) => Ok(if *b { "TRUE".into() } else { "FALSE".into() }),
        other => Err(CatalogError::Parse(format!("rendering value must be a scalar, got {other}"))),
    }
}

impl SeparatorCatalog {
    pub fn new(
        solver: Solver,
        version_tag: impl Into<String>,
        separators: Vec<SeparatorSpec>,
        allowed_levels: &[SettingLevel],
    ) -> Result<Self, CatalogError> {
        let mut allowed: Vec<SettingLevel> = allowed_levels.to_vec();
        allowed.sort();
        allowed.dedup();
        let version_tag = version_tag.into();

        if separators.is_empty() {
            return Err(CatalogError::Validation("catalog has no separators".into()));
        }
        if allowed.len() < 2 || !allowed.contains(&SettingLevel::Default) {
            return Err(CatalogError::Validation(
                "allowed_levels needs at least two levels including `default`".into(),
            ));
        }
        let mut index = IndexMap::new();
        let mut params = HashSet::new();
        for (i, sep) in separators.iter().enumerate() {
            if sep.id.trim().is_empty() {
                return Err(CatalogError::Validation(format!("separator #{i} has an empty id")));
            }
            if index.insert(sep.id.clone(), i).is_some() {
                return Err(CatalogError::Validation(format!("duplicate separator id `{}`", sep.id)));
            }
            if sep.solver_param.trim().is_empty() {
                return Err(CatalogError::Validation(format!("separator `{}` has an empty solver_param", sep.id)));
            }
            if !params.insert(sep.solver_param.as_str()) {
                return Err(CatalogError::Validation(format!(
                    "solver_param `{}` is used by more than one separator",
                    sep.solver_param
                )));
            }
            let words = sep.description.split_whitespace().count();
            if words > MAX_DESCRIPTION_WORDS {
                return Err(CatalogError::Validation(format!(
                    "description of `{}` has {words} words (max {MAX_DESCRIPTION_WORDS})",
                    sep.id
                )));
            }
        }

        let mut catalog = SeparatorCatalog {
            solver,
            version_tag,
            separators,
            allowed_levels: allowed,
            index,
            ignored_stats: Vec::new(),
            hash: String::new(),
        };
        catalog.rehash();
        Ok(catalog)
    }

    /// Statistics row names to skip silently when mapping solver output.
    pub fn with_ignored_stats(mut self, names: Vec<String>) -> Self {
        self.ignored_stats = names;
        self.rehash();
        self
    }

    fn rehash(&mut self) {
        let canonical = CanonicalCatalog {
            solver: self.solver,
            version_tag: &self.version_tag,
            allowed_levels: &self.allowed_levels,
            separators: &self.separators,
            ignored_stats: &self.ignored_stats,
        };
        self.hash = sha256_hex(&serde_json::to_vec(&canonical).expect("catalog serializes"));
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        let allowed = file.allowed_levels.iter().map(|s| s.parse()).collect::<Result<Vec<SettingLevel>, _>>()?;

        let mut separators = Vec::with_capacity(file.separators.len());
        for sep in file.separators {
            let mut renderings = LevelRenderings::default();
            let mut seen = HashSet::new();
            for (name, lines) in sep.levels {
                let level: SettingLevel = name.parse()?;
                let lines = lines
                    .iter()
                    .map(|(path, value)| Ok((path.clone(), scalar_to_string(value)?)))
                    .collect::<Result<Vec<_>, CatalogError>>()?;
                seen.insert(level);
                match level {
                    SettingLevel::Off => renderings.off = lines,
                    SettingLevel::Default => renderings.default = lines,
                    SettingLevel::Aggressive => renderings.aggressive = lines,
                }
            }
            if let Some(missing) = allowed.iter().find(|l| !seen.contains(l)) {
                return Err(CatalogError::Validation(format!(
                    "separator `{}` has no rendering for level `{missing}`",
                    sep.id
                )));
            }
            separators.push(SeparatorSpec {
                id: sep.id,
                solver_param: sep.solver_param,
                display_name: sep.display_name,
                description: sep.description.split_whitespace().collect::<Vec<_>>().join(" "),
                stats_name: sep.stats_name,
                renderings,
            });
        }
        Ok(Self::new(file.solver, file.version_tag, separators, &allowed)?.with_ignored_stats(file.ignored_stats))
    }

    /// Reads and validates a catalog file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CatalogError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    /// Catalogs bundled with the crate.
    pub fn shipped(solver: Solver) -> Self {
        let text = match solver {
            Solver::Scip => include_str!("../catalogs/scip.toml"),
            Solver::Gurobi => include_str!("../catalogs/gurobi.toml"),
            Solver::Stub => include_str!("../catalogs/stub.toml"),
        };
        Self::from_toml_str(text).expect("shipped catalog is valid")
    }

    pub fn solver(&self) -> Solver {
        self.solver
    }

    pub fn version_tag(&self) -> &str {
        &self.version_tag
    }

    pub fn separators(&self) -> &[SeparatorSpec] {
        &self.separators
    }

    pub fn len(&self) -> usize {
        self.separators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.separators.is_empty()
    }

    pub fn allowed_levels(&self) -> &[SettingLevel] {
        &self.allowed_levels
    }

    pub fn allows(&self, level: SettingLevel) -> bool {
        self.allowed_levels.contains(&level)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn reference(&self) -> CatalogRef {
        CatalogRef { solver: self.solver, version_tag: self.version_tag.clone(), hash: self.hash.clone() }
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn separator(&self, id: &str) -> Option<&SeparatorSpec> {
        self.position(id).map(|i| &self.separators[i])
    }

    /// Maps a statistics row name to a separator id.
    pub fn id_for_stats_name(&self, stats_name: &str) -> Option<&str> {
        let wanted = stats_name.trim();
        self.separators.iter().find(|s| s.stats_name.as_deref().map(str::trim) == Some(wanted)).map(|s| s.id.as_str())
    }

    pub fn is_ignored_stats(&self, stats_name: &str) -> bool {
        self.ignored_stats.iter().any(|n| n == stats_name.trim())
    }

    fn check(&self, config: &Configuration) -> Result<(), CatalogError> {
        if config.catalog != self.reference() {
            return Err(CatalogError::CatalogMismatch {
                expected: self.reference().to_string(),
                found: config.catalog.to_string(),
            });
        }
        Ok(())
    }
}

/// How a configuration came to exist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    LlmSample {
        index: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<usize>,
    },
    Ensemble {
        strategy: String,
    },
    Baseline {
        name: String,
    },
    Manual,
}

/// A total assignment of setting levels over a catalog, in catalog order.
///
/// Equality and hashing consider the catalog and the levels; provenance is ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Configuration {
    catalog: CatalogRef,
    levels: IndexMap<String, SettingLevel>,
    provenance: Provenance,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.catalog == other.catalog && self.levels == other.levels
    }
}

impl Eq for Configuration {}

impl std::hash::Hash for Configuration {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.catalog.hash.hash(state);
        for level in self.levels.values() {
            level.hash(state);
        }
    }
}

impl Configuration {
    /// Builds a configuration from levels listed in catalog order.
    pub fn from_levels(
        catalog: &SeparatorCatalog,
        levels: &[SettingLevel],
        provenance: Provenance,
    ) -> Result<Self, CatalogError> {
        if levels.len() != catalog.len() {
            return Err(CatalogError::Validation(format!("expected {} levels, got {}", catalog.len(), levels.len())));
        }
        let mut map = IndexMap::with_capacity(levels.len());
        for (sep, &level) in catalog.separators().iter().zip(levels) {
            if !catalog.allows(level) {
                return Err(CatalogError::IllegalLevel { id: sep.id.clone(), level: level.to_string() });
            }
            map.insert(sep.id.clone(), level);
        }
        Ok(Configuration { catalog: catalog.reference(), levels: map, provenance })
    }

    /// Builds a configuration from `(id, level)` pairs; ids not listed are `Default`.
    pub fn from_assignments<'a>(
        catalog: &SeparatorCatalog,
        assignments: impl IntoIterator<Item = (&'a str, SettingLevel)>,
        provenance: Provenance,
    ) -> Result<Self, CatalogError> {
        let mut levels = vec![SettingLevel::Default; catalog.len()];
        let mut unknown = Vec::new();
        for (id, level) in assignments {
            match catalog.position(id) {
                Some(i) => levels[i] = level,
                None => unknown.push(id.to_string()),
            }
        }
        if !unknown.is_empty() {
            return Err(CatalogError::UnknownSeparator(unknown));
        }
        Self::from_levels(catalog, &levels, provenance)
    }

    pub fn uniform(
        catalog: &SeparatorCatalog,
        level: SettingLevel,
        provenance: Provenance,
    ) -> Result<Self, CatalogError> {
        Self::from_levels(catalog, &vec![level; catalog.len()], provenance)
    }

    pub fn catalog(&self) -> &CatalogRef {
        &self.catalog
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn level(&self, id: &str) -> Option<SettingLevel> {
        self.levels.get(id).copied()
    }

    pub fn levels(&self) -> impl Iterator<Item = (&str, SettingLevel)> + '_ {
        self.levels.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn level_vector(&self) -> Vec<SettingLevel> {
        self.levels.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Number of separators not at `Default`.
    pub fn non_default_count(&self) -> usize {
        self.levels.values().filter(|&&l| l != SettingLevel::Default).count()
    }

    /// Number of separators not switched `Off`.
    pub fn enabled_count(&self) -> usize {
        self.levels.values().filter(|&&l| l != SettingLevel::Off).count()
    }

    /// Compact level string, one character per separator (`o`, `d`, `a`).
    pub fn signature(&self) -> String {
        self.levels
            .values()
            .map(|l| match l {
                SettingLevel::Off => 'o',
                SettingLevel::Default => 'd',
                SettingLevel::Aggressive => 'a',
            })
            .collect()
    }

    /// Content hash over catalog identity and levels.
    pub fn content_hash(&self) -> String {
        sha256_hex(format!("{}:{}", self.catalog.hash, self.signature()).as_bytes())
    }

    /// Checks totality and allowed levels against `catalog`.
    pub fn validate(&self, catalog: &SeparatorCatalog) -> Result<(), CatalogError> {
        catalog.check(self)?;
        if self.levels.len() != catalog.len()
            || !catalog.separators().iter().zip(self.levels.keys()).all(|(s, id)| &s.id == id)
        {
            return Err(CatalogError::Validation("configuration is not total over the catalog".into()));
        }
        for (id, level) in &self.levels {
            if !catalog.allows(*level) {
                return Err(CatalogError::IllegalLevel { id: id.clone(), level: level.to_string() });
            }
        }
        Ok(())
    }
}

/// All separators at `Default`.
pub fn default_configuration(catalog: &SeparatorCatalog) -> Configuration {
    Configuration::uniform(catalog, SettingLevel::Default, Provenance::Manual)
        .expect("default is always an allowed level")
}

/// Renders a configuration to the solver's settings-file syntax.
pub fn render_settings(config: &Configuration, catalog: &SeparatorCatalog) -> Result<String, CatalogError> {
    catalog.check(config)?;
    let mut out = String::new();
    for sep in catalog.separators() {
        let level = config.level(&sep.id).unwrap_or(SettingLevel::Default);
        for (path, value) in sep.renderings.get(level) {
            match catalog.solver() {
                Solver::Gurobi => out.push_str(&format!("{path} {value}\n")),
                Solver::Scip | Solver::Stub => out.push_str(&format!("{path} = {value}\n")),
            }
        }
    }
    Ok(out)
}

/// Serializes to the configuration interchange document.
pub fn serialize_configuration(config: &Configuration) -> String {
    let mut out = String::new();
    out.push_str(&format!("solver = \"{}\"\n", config.catalog.solver));
    out.push_str(&format!("version_tag = {}\n", toml_string(&config.catalog.version_tag)));
    out.push_str(&format!("catalog_hash = \"{}\"\n", config.catalog.hash));
    out.push_str("partial = false\n\n[levels]\n");
    for (id, level) in &config.levels {
        out.push_str(&format!("{} = \"{}\"\n", toml_key(id), level));
    }
    out
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn toml_key(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        s.to_string()
    } else {
        toml_string(s)
    }
}

#[derive(Deserialize)]
struct InterchangeDoc {
    #[serde(default)]
    catalog_hash: Option<String>,
    #[serde(default)]
    partial: bool,
    levels: IndexMap<String, String>,
    #[serde(flatten)]
    _rest: IndexMap<String, toml::Value>,
}

/// Parses a configuration interchange document against `catalog`.
pub fn parse_configuration(doc: &str, catalog: &SeparatorCatalog) -> Result<Configuration, CatalogError> {
    let parsed: InterchangeDoc = toml::from_str(doc).map_err(|e| CatalogError::Parse(e.to_string()))?;
    if let Some(hash) = &parsed.catalog_hash {
        if hash != catalog.hash() {
            return Err(CatalogError::CatalogMismatch { expected: catalog.hash().to_string(), found: hash.clone() });
        }
    }

    let unknown: Vec<String> = parsed.levels.keys().filter(|id| catalog.position(id).is_none()).cloned().collect();
    if !unknown.is_empty() {
        return Err(CatalogError::UnknownSeparator(unknown));
    }

    let mut levels: Vec<Option<SettingLevel>> = vec![None; catalog.len()];
    for (id, raw) in &parsed.levels {
        let level: SettingLevel =
            raw.parse().map_err(|_| CatalogError::IllegalLevel { id: id.clone(), level: raw.clone() })?;
        if !catalog.allows(level) {
            return Err(CatalogError::IllegalLevel { id: id.clone(), level: raw.clone() });
        }
        levels[catalog.position(id).expect("checked above")] = Some(level);
    }

    let mut total = Vec::with_capacity(levels.len());
    for (sep, level) in catalog.separators().iter().zip(levels) {
        match level {
            Some(l) => total.push(l),
            None if parsed.partial => total.push(SettingLevel::Default),
            None => {
                return Err(CatalogError::Parse(format!("separator `{}` missing from a non-partial document", sep.id)))
            }
        }
    }
    Configuration::from_levels(catalog, &total, Provenance::Manual)
}
