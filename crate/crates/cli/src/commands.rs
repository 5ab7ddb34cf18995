use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use sepconf::artifact::{write_atomic, ArtifactStore, StoredArtifact};
use sepconf::baselines::{collect_usage, pruning, search, unobservable};
use sepconf::catalog::{CatalogRef, SeparatorCatalog};
use sepconf::ensemble::{
    ensemble_average, ensemble_mode, ensemble_smallest, kmedoids, select_by_validation, select_cold_start,
    SelectionOutcome, Strategy,
};
use sepconf::harness::{summarize, Harness, InstanceSet};
use sepconf::llm::{generate_pool, GenerateOptions, LlmError, ProblemCard, PromptFlags};
use sepconf::mps::{histogram, miplib_filter, parse_mps, SolveSummary, StructureHistogram};
use sepconf::textfree::{textfree_configure, TextFreePlan};

use crate::artifacts::{
    load_configuration, put, read_json, EvalArtifact, GenerateInputs, PoolArtifact, SelectionArtifact, ValidationRecord,
};
use crate::error::{CliError, CliResult};
use crate::report::{evaluation_csv, median_iqr_cell, render_csv, render_table};
use crate::setup::{load_catalog, require_dir, require_file, ClientArgs, Defaults, SolverArgs};

/// What a command hands back to `main`.
pub struct Done {
    /// Some requested output is missing (short pool, failed instances).
    pub partial: bool,
}

impl Done {
    fn complete() -> Self {
        Done { partial: false }
    }
}

pub struct Context {
    pub defaults: Defaults,
    pub store: ArtifactStore,
}

impl Context {
    fn finish(&self, command: &str, inputs: serde_json::Value, outputs: Vec<StoredArtifact>) -> CliResult<()> {
        for o in &outputs {
            println!("{}: {}", o.kind, o.path.display());
        }
        self.store.record_run(command, inputs, outputs)?;
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn load_instances(dir: &Path, what: &str) -> CliResult<InstanceSet> {
    require_dir(dir, what)?;
    let set = InstanceSet::from_dir(dir)?;
    if set.is_empty() {
        return Err(CliError::usage(format!("{what} {} holds no .mps files", dir.display())));
    }
    Ok(set)
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Problem card (TOML with title, description, latex_model).
    #[arg(long)]
    pub card: PathBuf,
    #[arg(long, default_value = "scip")]
    pub catalog: String,
    /// Pool size.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub no_sep_descriptions: bool,
    #[arg(long)]
    pub no_problem_text: bool,
    #[arg(long)]
    pub no_latex: bool,
    #[command(flatten)]
    pub client: ClientArgs,
}

pub fn generate(ctx: &Context, args: &GenerateArgs) -> CliResult<Done> {
    require_file(&args.card, "problem card")?;
    let card = ProblemCard::load(&args.card)?;
    let catalog = load_catalog(&args.catalog)?;
    let client = args.client.build()?;
    let opts = GenerateOptions {
        pool_size: args.size.unwrap_or(ctx.defaults.pool_size),
        flags: PromptFlags {
            separator_descriptions: !args.no_sep_descriptions,
            problem_text: !args.no_problem_text,
            latex_model: !args.no_latex,
        },
        retry_budget: args.client.retries.unwrap_or(ctx.defaults.retries),
        temperature: args.client.temperature.unwrap_or(ctx.defaults.temperature),
        concurrency: args.client.concurrency,
        description: None,
    };
    if opts.pool_size == 0 {
        return Err(CliError::usage("pool size must be at least 1"));
    }
    let (pool, partial) = match generate_pool(&card, &catalog, client.as_ref(), &opts) {
        Ok(pool) => (pool, false),
        Err(LlmError::PoolIncomplete { pool, wanted }) => {
            eprintln!("pool incomplete: {} of {wanted} configurations", pool.len());
            (*pool, true)
        }
        Err(e) => return Err(e.into()),
    };
    let inputs = GenerateInputs {
        card_title: card.title.clone(),
        card_hash: card.content_hash(),
        catalog: catalog.reference(),
        flags: opts.flags,
        model_id: client.model_id(),
        temperature: opts.temperature,
        pool_size: opts.pool_size,
        retry_budget: opts.retry_budget,
    };
    let stored = put(&ctx.store, "pool", &PoolArtifact { inputs: inputs.clone(), pool })?;
    ctx.finish("generate", serde_json::to_value(&inputs)?, vec![stored])?;
    Ok(Done { partial })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EnsembleMode {
    /// Medoid of the largest cluster, no solves.
    Llm0,
    /// Best medoid on a validation set.
    Llmk,
    Average,
    Mode,
    Smallest,
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    /// Pool artifact written by `generate`.
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: EnsembleMode,
    /// Seed for clustering tie-breaks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Validation instance directory (llmk only).
    #[arg(long)]
    pub val: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn catalog_for(reference: &CatalogRef, explicit: Option<&str>) -> CliResult<SeparatorCatalog> {
    let catalog = load_catalog(explicit.unwrap_or(reference.solver.as_str()))?;
    if &catalog.reference() != reference {
        return Err(CliError::usage(format!("pool was built over catalog {reference}; pass the matching --catalog")));
    }
    Ok(catalog)
}

pub fn ensemble(ctx: &Context, args: &EnsembleArgs) -> CliResult<Done> {
    let artifact: PoolArtifact = read_json(&args.pool, "pool artifact")?;
    let pool = &artifact.pool.configs;
    if pool.is_empty() {
        return Err(CliError::failure("pool artifact holds no configurations"));
    }
    let k = args.k.unwrap_or(ctx.defaults.k);
    let mut inputs = json!({
        "pool": artifact.pool.content_hash(),
        "mode": format!("{:?}", args.mode).to_lowercase(),
        "k": k,
        "seed": args.seed,
    });
    let mut outputs = Vec::new();
    let (clustering, selection, validation) = match args.mode {
        EnsembleMode::Llm0 => {
            let clustering = kmedoids(pool, k, args.seed)?;
            let selection = select_cold_start(&clustering, pool)?;
            (Some(clustering), selection, None)
        }
        EnsembleMode::Llmk => {
            let val = args.val.as_ref().ok_or(sepconf::ensemble::EnsembleError::MissingValidationSet)?;
            let instances = load_instances(val, "validation set")?;
            let setup = args.solver.setup(&ctx.defaults)?;
            if setup.catalog.reference() != artifact.pool.catalog {
                return Err(CliError::usage("solver catalog differs from the pool's catalog"));
            }
            let clustering = kmedoids(pool, k, args.seed)?;
            let harness = Harness::new(setup.backend.as_ref(), &setup.catalog, setup.plan.clone(), &setup.cache)?;
            let validated = select_by_validation(&clustering, pool, &harness, &instances)?;
            setup.save_cache()?;
            inputs["plan"] = serde_json::to_value(&setup.plan)?;
            inputs["validation_set"] = json!(instances.name);
            let record = ValidationRecord {
                plan: setup.plan.clone(),
                instances: instances.instances.iter().map(|i| i.id.clone()).collect(),
                evaluations: validated.evaluations,
                solves: validated.solves,
            };
            println!("validation solves: {}", record.solves);
            (Some(clustering), validated.selection, Some(record))
        }
        EnsembleMode::Average => {
            let catalog = catalog_for(&artifact.pool.catalog, args.solver.catalog.as_deref())?;
            let config = ensemble_average(pool, &catalog)?;
            let selection = SelectionOutcome {
                final_config: config,
                strategy: Strategy::Average,
                source_index: None,
                candidates_tested: Vec::new(),
            };
            (None, selection, None)
        }
        EnsembleMode::Mode => (None, ensemble_mode(pool)?, None),
        EnsembleMode::Smallest => (None, ensemble_smallest(pool)?, None),
    };
    let partial = validation.as_ref().is_some_and(|v| v.evaluations.iter().any(|e| !e.failures.is_empty()));
    println!("final: {} ({})", selection.final_config.signature(), selection.final_config.content_hash());
    let artifact = SelectionArtifact {
        method: format!("{:?}", args.mode).to_lowercase(),
        inputs: inputs.clone(),
        clustering,
        selection,
        validation,
    };
    outputs.push(put(&ctx.store, "selection", &artifact)?);
    ctx.finish("ensemble", inputs, outputs)?;
    Ok(Done { partial })
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// `default`, a selection artifact, or a configuration file.
    #[arg(long, default_value = "default")]
    pub config: String,
    #[arg(long)]
    pub instances: PathBuf,
    /// Column name in reports; defaults to the configuration file stem.
    #[arg(long)]
    pub label: Option<String>,
    /// Per-instance CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn evaluate(ctx: &Context, args: &EvaluateArgs) -> CliResult<Done> {
    let instances = load_instances(&args.instances, "instance directory")?;
    let setup = args.solver.setup(&ctx.defaults)?;
    let config = load_configuration(&args.config, &setup.catalog)?;
    let harness = Harness::new(setup.backend.as_ref(), &setup.catalog, setup.plan.clone(), &setup.cache)?;
    let evaluation = harness.evaluate(&config, &instances)?;
    setup.save_cache()?;
    let summary = summarize(&evaluation.records).ok();
    match &summary {
        Some(s) => println!("improvement: {} over {} instances", median_iqr_cell(s.median, s.iqr), s.count),
        None => println!("improvement: n/a (no instance evaluated)"),
    }
    for f in &evaluation.failures {
        eprintln!("instance {} failed: {}", f.instance, f.message);
    }
    let label = args.label.clone().unwrap_or_else(|| match args.config.as_str() {
        "default" => "default".into(),
        path => Path::new(path).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
    });
    if let Some(path) = &args.csv {
        write_text(path, &evaluation_csv(&evaluation.records)?)?;
    }
    let partial = !evaluation.failures.is_empty();
    let artifact = EvalArtifact {
        label,
        config,
        instance_set: instances.name.clone(),
        plan: setup.plan.clone(),
        evaluation,
        summary,
    };
    let stored = put(&ctx.store, "evaluation", &artifact)?;
    let inputs = json!({ "config": artifact.config.content_hash(), "instances": instances.name, "plan": setup.plan });
    ctx.finish("evaluate", inputs, vec![stored])?;
    Ok(Done { partial })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaselineKind {
    Pruning,
    Search,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(value_enum)]
    pub kind: BaselineKind,
    /// Validation instance directory.
    #[arg(long)]
    pub val: PathBuf,
    /// Number of random candidates (search only).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn baseline(ctx: &Context, args: &BaselineArgs) -> CliResult<Done> {
    let instances = load_instances(&args.val, "validation set")?;
    let setup = args.solver.setup(&ctx.defaults)?;
    let harness = Harness::new(setup.backend.as_ref(), &setup.catalog, setup.plan.clone(), &setup.cache)?;
    let mut inputs = json!({ "kind": format!("{:?}", args.kind).to_lowercase(), "validation_set": instances.name, "plan": setup.plan });
    let ids: Vec<String> = instances.instances.iter().map(|i| i.id.clone()).collect();
    let (selection, solves, partial) = match args.kind {
        BaselineKind::Pruning => {
            let usage = collect_usage(&harness, &instances)?;
            let config = pruning(&usage, &setup.catalog)?;
            let flagged = unobservable(&setup.catalog);
            if !flagged.is_empty() {
                eprintln!("kept at default, usage not observable: {}", flagged.join(", "));
            }
            inputs["unobservable"] = json!(flagged);
            let selection = SelectionOutcome {
                final_config: config,
                strategy: Strategy::Pruning,
                source_index: None,
                candidates_tested: Vec::new(),
            };
            (selection, harness.counts().default, false)
        }
        BaselineKind::Search => {
            let d = args.d.ok_or_else(|| CliError::usage("search needs --d"))?;
            inputs["d"] = json!(d);
            inputs["seed"] = json!(args.seed);
            let result = search(d, &harness, &instances, args.seed)?;
            for (i, instance) in &result.failures {
                eprintln!("candidate {i}: instance {instance} failed");
            }
            (result.selection, result.solves, !result.failures.is_empty())
        }
    };
    setup.save_cache()?;
    println!("solves: {solves}");
    println!("final: {}", selection.final_config.signature());
    let artifact = SelectionArtifact {
        method: format!("{:?}", args.kind).to_lowercase(),
        inputs: inputs.clone(),
        clustering: None,
        selection,
        validation: Some(ValidationRecord {
            plan: setup.plan.clone(),
            instances: ids,
            evaluations: Vec::new(),
            solves,
        }),
    };
    let stored = put(&ctx.store, "selection", &artifact)?;
    ctx.finish("baseline", inputs, vec![stored])?;
    Ok(Done { partial })
}

#[derive(Args, Debug)]
pub struct TextfreeArgs {
    /// MPS instance; no problem text is needed.
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "scip")]
    pub catalog: String,
    /// Candidate problem descriptions requested.
    #[arg(long, default_value_t = 5)]
    pub k_desc: usize,
    /// Configurations sampled per description.
    #[arg(long, default_value_t = 20)]
    pub per_desc: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub client: ClientArgs,
}

pub fn textfree(ctx: &Context, args: &TextfreeArgs) -> CliResult<Done> {
    require_file(&args.instance, "instance")?;
    let catalog = load_catalog(&args.catalog)?;
    let client = args.client.build()?;
    let plan = TextFreePlan {
        k_desc: args.k_desc,
        configs_per_desc: args.per_desc,
        k: args.k.unwrap_or(ctx.defaults.k),
        retry_budget: args.client.retries.unwrap_or(ctx.defaults.retries),
        temperature: args.client.temperature.unwrap_or(ctx.defaults.temperature),
        concurrency: args.client.concurrency,
        seed: args.seed,
    };
    let run = textfree_configure(&args.instance, &catalog, client.as_ref(), &plan)?;
    // Fewer descriptions than requested is expected; short segments are not.
    let partial = run.pool.len() < run.cards.len() * plan.configs_per_desc;
    if run.pool.len() < plan.intended_pool_size() {
        eprintln!("pool has {} of {} configurations", run.pool.len(), plan.intended_pool_size());
    }
    println!("descriptions: {}", run.cards.len());
    println!("final: {}", run.selection.final_config.signature());
    let inputs = json!({ "instance": run.histogram.instance, "catalog": catalog.reference(), "plan": plan, "model_id": client.model_id() });
    let stored = put(&ctx.store, "textfree", &run)?;
    ctx.finish("textfree", inputs, vec![stored])?;
    Ok(Done { partial })
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Evaluation artifacts, one column each.
    #[arg(required = true)]
    pub artifacts: Vec<PathBuf>,
    /// Column names replacing the artifact labels, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub labels: Vec<String>,
    /// Add the MIP gap difference row relative to the first column.
    #[arg(long)]
    pub gap: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn report(_ctx: &Context, args: &ReportArgs) -> CliResult<Done> {
    let mut artifacts: Vec<EvalArtifact> =
        args.artifacts.iter().map(|p| read_json(p, "evaluation artifact")).collect::<CliResult<_>>()?;
    if !args.labels.is_empty() {
        if args.labels.len() != artifacts.len() {
            return Err(CliError::usage("--labels needs one name per artifact"));
        }
        for (a, l) in artifacts.iter_mut().zip(&args.labels) {
            a.label = l.clone();
        }
    }
    let table = render_table(&artifacts, args.gap)?;
    match &args.out {
        Some(path) => write_text(path, &table)?,
        None => print!("{table}"),
    }
    if let Some(path) = &args.csv {
        write_text(path, &render_csv(&artifacts)?)?;
    }
    Ok(Done::complete())
}

#[derive(Args, Debug)]
pub struct HistogramArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Human-readable listing instead of CSV.
    #[arg(long)]
    pub text: bool,
}

pub fn histogram_cmd(_ctx: &Context, args: &HistogramArgs) -> CliResult<Done> {
    let mut failed = false;
    if !args.text {
        println!("{}", StructureHistogram::csv_header());
    }
    for file in &args.files {
        require_file(file, "instance")?;
        match parse_mps(file) {
            Ok(milp) => {
                let h = histogram(&milp);
                if args.text {
                    println!("{}", h.report());
                } else {
                    println!("{}", h.csv_row());
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", file.display());
                failed = true;
            }
        }
    }
    Ok(Done { partial: failed })
}

#[derive(Args, Debug)]
pub struct FilterArgs {
    /// JSON array of probe-solve summaries.
    #[arg(long)]
    pub stats: PathBuf,
}

pub fn filter(_ctx: &Context, args: &FilterArgs) -> CliResult<Done> {
    let summaries: Vec<SolveSummary> = read_json(&args.stats, "probe statistics")?;
    let mut w = csv::Writer::from_writer(std::io::stdout());
    w.write_record(["instance", "keep", "reason"]).map_err(CliError::failure)?;
    let mut incomplete = false;
    for s in &summaries {
        let (keep, reason) = match miplib_filter(s) {
            Ok(d) => (d.keep.to_string(), d.reason.unwrap_or_default()),
            Err(e) => {
                incomplete = true;
                ("".into(), e.to_string())
            }
        };
        w.write_record([s.instance.as_str(), &keep, &reason]).map_err(CliError::failure)?;
    }
    w.flush()?;
    Ok(Done { partial: incomplete })
}
