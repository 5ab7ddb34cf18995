//! Prompt construction, completion clients, and response parsing.
//!
//! The model is asked for one fenced block of `id: level` lines. Parsing is
//! strict about ids and levels (hallucinated separators are rejected) and
//! lenient about omissions (missing ids stay at the solver default).

mod client;
mod generate;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, Configuration, Provenance, SeparatorCatalog, SettingLevel};
use crate::hashing::sha256_hex;
use crate::mps::{ConstraintType, StructureHistogram};
use crate::pool::ConfigurationPool;

pub use client::{
    nonce, split_nonce, FixtureEntry, FixtureFile, HttpClient, LlmClient, RecordingClient, ReplayClient, ScriptedClient,
};
pub use generate::{generate_pool, GenerateOptions};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("catalog has no separators")]
    EmptyCatalog,
    #[error("problem card has an empty description")]
    EmptyDescription,
    #[error("histogram has no constraints")]
    EmptyHistogram,
    #[error("no fenced block in the response")]
    NoBlockFound,
    #[error("unknown separators: {0:?}")]
    UnknownSeparator(Vec<String>),
    #[error("illegal level `{level}` for separator `{id}`")]
    IllegalLevel { id: String, level: String },
    #[error("malformed line in block: `{0}`")]
    MalformedLine(String),
    #[error("pool incomplete: {} of {wanted} configurations", pool.len())]
    PoolIncomplete { pool: Box<ConfigurationPool>, wanted: usize },
    #[error("no recorded response for prompt {hash} nonce {nonce}")]
    FixtureMissing { hash: String, nonce: u64 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid completion payload: {0}")]
    Payload(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CardSource {
    Authored,
    /// Written by a model from a constraint-type histogram of `instance`.
    LlmGenerated {
        instance: Option<String>,
    },
}

/// Problem-specific prompt input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemCard {
    pub title: String,
    pub description: String,
    #[serde(default)]
    pub latex_model: String,
    #[serde(default = "authored")]
    pub source: CardSource,
}

fn authored() -> CardSource {
    CardSource::Authored
}

impl ProblemCard {
    pub fn from_toml_str(text: &str) -> Result<Self, LlmError> {
        let card: ProblemCard = toml::from_str(text).map_err(|e| LlmError::Payload(format!("problem card: {e}")))?;
        if card.source == CardSource::Authored && card.description.trim().is_empty() {
            return Err(LlmError::EmptyDescription);
        }
        Ok(card)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("card serializes"))
    }
}

/// Which prompt components are included; all on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptFlags {
    pub separator_descriptions: bool,
    pub problem_text: bool,
    pub latex_model: bool,
}

impl Default for PromptFlags {
    fn default() -> Self {
        PromptFlags { separator_descriptions: true, problem_text: true, latex_model: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub user_text: String,
    pub flags: PromptFlags,
    pub temperature: f64,
    pub model_id: String,
}

impl PromptBundle {
    /// Fixture key: depends on the texts only, so recorded responses replay
    /// under any model id or temperature.
    pub fn hash(&self) -> String {
        sha256_hex(format!("{}\u{0}{}", self.system_text, self.user_text).as_bytes())
    }
}

/// Heading of the separator section; appears exactly once per prompt.
pub const SEPARATOR_HEADING: &str = "## Available separators";

const SYSTEM_CONFIG: &str = "You are an expert in mixed-integer linear programming and in tuning the cutting plane \
separators of MILP solvers. You answer with a separator configuration in the exact format requested.";

const SYSTEM_DESCRIBE: &str = "You are an expert in mixed-integer linear programming who recognises application \
problems from the structure of their constraints.";

pub fn build_config_prompt(
    card: &ProblemCard,
    catalog: &SeparatorCatalog,
    flags: PromptFlags,
    temperature: f64,
    model_id: &str,
) -> Result<PromptBundle, LlmError> {
    if catalog.is_empty() {
        return Err(LlmError::EmptyCatalog);
    }
    if flags.problem_text && card.description.trim().is_empty() {
        return Err(LlmError::EmptyDescription);
    }
    let levels: Vec<&str> = catalog.allowed_levels().iter().map(|l| l.as_str()).collect();
    let mut u = String::new();
    let _ = writeln!(
        u,
        "We solve a family of MILP instances with {} ({}). Pick one setting for each cutting plane separator so that \
         instances of this family solve as fast as possible.\n",
        catalog.solver(),
        catalog.version_tag()
    );
    let _ = writeln!(u, "{SEPARATOR_HEADING}\n");
    let _ = writeln!(u, "Every separator accepts one of: {}.\n", levels.join(", "));
    for sep in catalog.separators() {
        if flags.separator_descriptions {
            let _ = writeln!(
                u,
                "- `{}` (parameter `{}`), {}: {}",
                sep.id, sep.solver_param, sep.display_name, sep.description
            );
        } else {
            let _ = writeln!(u, "- `{}` (parameter `{}`), {}", sep.id, sep.solver_param, sep.display_name);
        }
    }
    u.push('\n');

    let show_latex = flags.latex_model && !card.latex_model.trim().is_empty();
    if flags.problem_text || show_latex {
        let _ = writeln!(u, "## Problem: {}\n", card.title.trim());
        if flags.problem_text {
            let _ = writeln!(u, "{}\n", card.description.trim());
        }
        if show_latex {
            let _ = writeln!(u, "Formulation:\n\n$$\n{}\n$$\n", card.latex_model.trim());
        }
    } else {
        u.push_str("No information about the problem is available beyond the solver itself.\n\n");
    }

    let _ = writeln!(u, "## Answer format\n");
    let _ = writeln!(
        u,
        "Reply with exactly one fenced code block. Inside it write one line per separator of the form `id: level`, \
         using the ids listed above and a level from {{{}}}. Separators you leave out keep their default setting. \
         Reasoning, if any, goes before the block.",
        levels.join(", ")
    );
    Ok(PromptBundle {
        system_text: SYSTEM_CONFIG.to_string(),
        user_text: u,
        flags,
        temperature,
        model_id: model_id.to_string(),
    })
}

/// Contents of every fenced block, in order. An unterminated final block
/// runs to the end of the text.
pub fn fenced_blocks(raw: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in raw.lines() {
        let is_fence = line.trim_start().starts_with("```");
        match (&mut current, is_fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(lines), true) => {
                blocks.push(lines.join("\n"));
                current = None;
            }
            (Some(lines), false) => lines.push(line),
            (None, false) => {}
        }
    }
    if let Some(lines) = current {
        blocks.push(lines.join("\n"));
    }
    blocks
}

fn resolve_id<'a>(catalog: &'a SeparatorCatalog, key: &str) -> Option<&'a str> {
    if let Some(sep) = catalog.separator(key) {
        return Some(sep.id.as_str());
    }
    catalog
        .separators()
        .iter()
        .find(|s| s.id.eq_ignore_ascii_case(key) || s.solver_param.eq_ignore_ascii_case(key))
        .map(|s| s.id.as_str())
}

/// First fenced block of `raw` as a configuration; unlisted separators stay at Default.
pub fn parse_config_response(raw: &str, catalog: &SeparatorCatalog) -> Result<Configuration, LlmError> {
    let block = fenced_blocks(raw).into_iter().next().ok_or(LlmError::NoBlockFound)?;
    let mut assigned: BTreeMap<&str, SettingLevel> = BTreeMap::new();
    let mut unknown = Vec::new();
    for line in block.lines() {
        let line = line.trim().trim_start_matches("- ").trim_end_matches(',').trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("//") || line == "{" || line == "}" {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .or_else(|| line.split_once('='))
            .ok_or_else(|| LlmError::MalformedLine(line.to_string()))?;
        let key = key.trim().trim_matches(|c| c == '"' || c == '\'' || c == '`');
        let value = value.trim().trim_matches(|c| c == '"' || c == '\'' || c == '`').to_ascii_lowercase();
        let Some(id) = resolve_id(catalog, key) else {
            unknown.push(key.to_string());
            continue;
        };
        let level: SettingLevel = value
            .parse()
            .ok()
            .filter(|l| catalog.allows(*l))
            .ok_or_else(|| LlmError::IllegalLevel { id: id.to_string(), level: value.clone() })?;
        if let Some(prev) = assigned.insert(id, level) {
            if prev != level {
                return Err(LlmError::MalformedLine(format!("`{id}` assigned both {prev} and {level}")));
            }
        }
    }
    if !unknown.is_empty() {
        return Err(LlmError::UnknownSeparator(unknown));
    }
    let config = Configuration::from_assignments(catalog, assigned, Provenance::Manual)?;
    config.validate(catalog)?;
    Ok(config)
}

/// Serialises a configuration in the answer format; `parse_config_response` inverts it.
pub fn format_config_block(config: &Configuration) -> String {
    let mut out = String::from("```\n");
    for (id, level) in config.levels() {
        let _ = writeln!(out, "{id}: {level}");
    }
    out.push_str("```\n");
    out
}

pub fn build_description_prompt(
    hist: &StructureHistogram,
    k_desc: usize,
    temperature: f64,
    model_id: &str,
) -> Result<PromptBundle, LlmError> {
    if hist.total() == 0 {
        return Err(LlmError::EmptyHistogram);
    }
    let k = k_desc.max(1);
    let mut u = String::new();
    let _ = writeln!(
        u,
        "A MILP instance has {} variables ({} binary, {} general integer, {} continuous) and {} constraints. \
         Its constraints fall into these classes:\n",
        hist.n_vars, hist.n_binary, hist.n_integer, hist.n_continuous, hist.n_constrs
    );
    for t in ConstraintType::ALL {
        let c = hist.count(t);
        if c > 0 {
            let _ = writeln!(u, "- {}: {c}", t.label());
        }
    }
    u.push('\n');
    if k == 1 {
        u.push_str(
            "Describe one plausible application problem whose model would have exactly this constraint structure.",
        );
    } else {
        let _ = write!(
            u,
            "Describe {k} plausible and clearly different application problems whose models would have this \
             constraint structure."
        );
    }
    u.push_str(
        " Put each description in its own fenced code block. Start the block with a line `Title: <name>`, follow \
         with a short paragraph, and optionally end with a line `Formulation:` followed by a LaTeX model.\n",
    );
    Ok(PromptBundle {
        system_text: SYSTEM_DESCRIBE.to_string(),
        user_text: u,
        flags: PromptFlags { separator_descriptions: false, problem_text: false, latex_model: false },
        temperature,
        model_id: model_id.to_string(),
    })
}

/// Up to `k_desc` cards, one per non-empty fenced block.
pub fn parse_descriptions(raw: &str, k_desc: usize) -> Result<Vec<ProblemCard>, LlmError> {
    let blocks: Vec<String> = fenced_blocks(raw).into_iter().filter(|b| !b.trim().is_empty()).collect();
    if blocks.is_empty() {
        return Err(LlmError::NoBlockFound);
    }
    let mut seen = HashSet::new();
    let mut cards = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        let mut title = format!("Candidate problem {}", i + 1);
        let mut text = Vec::new();
        let mut latex = Vec::new();
        let mut in_latex = false;
        for line in block.lines() {
            let t = line.trim();
            if let Some(rest) = t.strip_prefix("Title:") {
                title = rest.trim().to_string();
            } else if t == "Formulation:" {
                in_latex = true;
            } else if in_latex {
                latex.push(line);
            } else {
                text.push(t);
            }
        }
        let description = text.join(" ").split_whitespace().collect::<Vec<_>>().join(" ");
        if description.is_empty() || !seen.insert(description.clone()) {
            continue;
        }
        cards.push(ProblemCard {
            title,
            description,
            latex_model: latex.join("\n").trim().to_string(),
            source: CardSource::LlmGenerated { instance: None },
        });
        if cards.len() == k_desc {
            break;
        }
    }
    if cards.is_empty() {
        return Err(LlmError::NoBlockFound);
    }
    Ok(cards)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Solver;
    use std::collections::BTreeMap as Map;

    fn card() -> ProblemCard {
        ProblemCard {
            title: "Maximum cut".into(),
            description: "Partition the vertices of a weighted graph into two sets maximising the crossing weight."
                .into(),
            latex_model: r"\max \sum_{(i,j)\in E} w_{ij} y_{ij}".into(),
            source: CardSource::Authored,
        }
    }

    #[test]
    fn config_prompt_components() {
        let cat = SeparatorCatalog::shipped(Solver::Gurobi);
        let p = build_config_prompt(&card(), &cat, PromptFlags::default(), 1.0, "m").unwrap();
        assert_eq!(p.user_text.matches(SEPARATOR_HEADING).count(), 1);
        assert_eq!(p.user_text.lines().filter(|l| l.starts_with("- `")).count(), 21);
        assert!(p.user_text.contains(r"w_{ij}"));
        assert!(p.user_text.contains("weighted graph"));

        let no_latex = PromptFlags { latex_model: false, ..Default::default() };
        let p = build_config_prompt(&card(), &cat, no_latex, 1.0, "m").unwrap();
        assert!(p.user_text.contains("weighted graph") && !p.user_text.contains(r"w_{ij}"));

        let solver_only = PromptFlags { problem_text: false, latex_model: false, ..Default::default() };
        let p = build_config_prompt(&card(), &cat, solver_only, 1.0, "m").unwrap();
        assert!(!p.user_text.contains("weighted graph") && !p.user_text.contains("Maximum cut"));

        let names_only = PromptFlags { separator_descriptions: false, ..Default::default() };
        let p = build_config_prompt(&card(), &cat, names_only, 1.0, "m").unwrap();
        let first = &cat.separators()[0];
        assert!(!p.user_text.contains(&first.description));
        assert!(p.user_text.contains(&first.display_name));
    }

    #[test]
    fn prompts_are_deterministic() {
        let cat = SeparatorCatalog::shipped(Solver::Scip);
        let a = build_config_prompt(&card(), &cat, PromptFlags::default(), 1.0, "m").unwrap();
        let b = build_config_prompt(&card(), &cat, PromptFlags::default(), 1.0, "m").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.hash(), b.hash());
    }

    #[test]
    fn empty_description_rejected() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let c = ProblemCard { description: " ".into(), ..card() };
        assert!(matches!(
            build_config_prompt(&c, &cat, PromptFlags::default(), 1.0, "m"),
            Err(LlmError::EmptyDescription)
        ));
        let solver_only = PromptFlags { problem_text: false, latex_model: false, ..Default::default() };
        assert!(build_config_prompt(&c, &cat, solver_only, 1.0, "m").is_ok());
    }

    #[test]
    fn parses_block() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        let raw = "Clique structure dominates.\n```yaml\nclique: aggressive\ngomory: off\n```\nDone.";
        let c = parse_config_response(raw, &cat).unwrap();
        assert_eq!(c.non_default_count(), 2);
        assert_eq!(c.level("clique"), Some(SettingLevel::Aggressive));
        assert_eq!(c.level("gomory"), Some(SettingLevel::Off));
        assert_eq!(c.level("mcf"), Some(SettingLevel::Default));
    }

    #[test]
    fn rejects_hallucinations() {
        let cat = SeparatorCatalog::shipped(Solver::Stub);
        assert!(matches!(
            parse_config_response("```\nsuperCuts: aggressive\n```", &cat),
            Err(LlmError::UnknownSeparator(v)) if v == ["superCuts"]
        ));
        assert!(matches!(parse_config_response("```\nclique: turbo\n```", &cat), Err(LlmError::IllegalLevel { .. })));
        assert!(matches!(parse_config_response("I would turn on clique cuts.", &cat), Err(LlmError::NoBlockFound)));
    }

    #[test]
    fn block_round_trip() {
        let cat = SeparatorCatalog::shipped(Solver::Gurobi);
        let levels: Vec<SettingLevel> = (0..21).map(|i| SettingLevel::ALL[i % 3]).collect();
        let c = Configuration::from_levels(&cat, &levels, Provenance::Manual).unwrap();
        assert_eq!(parse_config_response(&format_config_block(&c), &cat).unwrap(), c);
    }

    fn hist(counts: &[(ConstraintType, usize)]) -> StructureHistogram {
        let counts: Map<ConstraintType, usize> = counts.iter().copied().collect();
        let m = counts.values().sum();
        StructureHistogram {
            instance: "x".into(),
            counts,
            n_vars: 10,
            n_constrs: m,
            n_binary: 10,
            n_integer: 0,
            n_continuous: 0,
        }
    }

    #[test]
    fn description_prompt() {
        let h = hist(&[(ConstraintType::SetCovering, 250)]);
        let p = build_description_prompt(&h, 5, 1.0, "m").unwrap();
        assert!(p.user_text.contains(ConstraintType::SetCovering.label()));
        assert!(p.user_text.contains("250"));
        assert!(p.user_text.contains("Describe 5 "));
        let p = build_description_prompt(&h, 1, 1.0, "m").unwrap();
        assert!(p.user_text.contains("Describe one"));
        let four = [
            ConstraintType::SetCovering,
            ConstraintType::Knapsack,
            ConstraintType::VariableBound,
            ConstraintType::Precedence,
        ];
        let h = hist(&four.map(|t| (t, 3)));
        let p = build_description_prompt(&h, 5, 1.0, "m").unwrap();
        assert!(four.iter().all(|t| p.user_text.contains(t.label())));
        assert!(matches!(build_description_prompt(&hist(&[]), 5, 1.0, "m"), Err(LlmError::EmptyHistogram)));
    }

    #[test]
    fn description_parsing() {
        let block = |i: usize| format!("```\nTitle: P{i}\nProblem number {i} text.\nFormulation:\nx_{i} \\ge 0\n```\n");
        let five: String = (0..5).map(block).collect();
        let cards = parse_descriptions(&five, 5).unwrap();
        assert_eq!(cards.len(), 5);
        assert_eq!(cards[2].title, "P2");
        assert_eq!(cards[2].latex_model, "x_2 \\ge 0");
        let three: String = (0..3).map(block).collect();
        assert_eq!(parse_descriptions(&three, 5).unwrap().len(), 3);
        assert!(matches!(parse_descriptions("no blocks", 5), Err(LlmError::NoBlockFound)));
    }
}
