use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sepconf::artifact::ArtifactStore;

mod artifacts;
mod commands;
mod error;
mod report;
mod setup;

use commands::{
    BaselineArgs, Context, EnsembleArgs, EvaluateArgs, FilterArgs, GenerateArgs, HistogramArgs, ReportArgs,
    TextfreeArgs,
};
use error::exit;
use setup::Defaults;

/// Cutting-plane separator configuration for MILP solvers.
#[derive(Parser, Debug)]
#[command(name = "sepconf", version)]
struct Cli {
    /// TOML file with a [defaults] table.
    #[arg(long, env = "SEPCONF_CONFIG", global = true)]
    config_file: Option<PathBuf>,
    /// Artifact store root.
    #[arg(long, default_value = "store", global = true)]
    store: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a configuration pool from a problem card.
    Generate(GenerateArgs),
    /// Reduce a pool to one configuration.
    Ensemble(EnsembleArgs),
    /// Measure a configuration against the solver default.
    Evaluate(EvaluateArgs),
    /// Run the pruning or random-search baseline.
    Baseline(BaselineArgs),
    /// Configure from an MPS file without problem text.
    Textfree(TextfreeArgs),
    /// Tabulate evaluation artifacts.
    Report(ReportArgs),
    /// Constraint-type histograms of MPS files.
    Histogram(HistogramArgs),
    /// Apply the benchmark-library inclusion filter to probe statistics.
    Filter(FilterArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let defaults = match Defaults::load(cli.config_file.as_deref()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code());
        }
    };
    let ctx = Context { defaults, store: ArtifactStore::new(&cli.store) };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(&ctx, a),
        Command::Ensemble(a) => commands::ensemble(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Baseline(a) => commands::baseline(&ctx, a),
        Command::Textfree(a) => commands::textfree(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
        Command::Histogram(a) => commands::histogram_cmd(&ctx, a),
        Command::Filter(a) => commands::filter(&ctx, a),
    };
    match result {
        Ok(done) if done.partial => ExitCode::from(exit::PARTIAL),
        Ok(_) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
