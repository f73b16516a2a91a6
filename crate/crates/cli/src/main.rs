use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use blockfresh_cli::{
    list_experiments, parse_config_value, parse_seeds, preset, resolve, run_experiment, CliError,
    Overrides,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "blockfresh",
    version,
    about = "Block freshness experiments",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args)]
struct GlobalArgs {
    /// Config file (TOML or JSON) overlaid on the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated run seeds.
    #[arg(long, global = true)]
    seeds: Option<String>,
    /// Integration step.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Mean-field integration horizon.
    #[arg(long, global = true)]
    horizon: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Average AoBI over the packing rate (defaults to fig7).
    AobiSweep,
    /// Mean-field trajectories (defaults to fig5).
    Epidemic,
    /// Terminal consensus level surface (defaults to consensus-surface).
    SteadyState,
    /// Replicator dynamics phase portrait (defaults to fig3a).
    Evogame,
    /// Agent-based simulation (defaults to fig12).
    Abm,
    /// Forwarding mechanism comparison (defaults to fig4).
    Compare,
    /// Run a built-in experiment by name.
    Preset { name: String },
    /// Print the built-in experiments.
    List,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = match &cli.command {
        Command::List => {
            for p in list_experiments() {
                println!("{:<20} {:<22} {}", p.name, p.kind, p.description);
            }
            return Ok(());
        }
        Command::AobiSweep => "fig7",
        Command::Epidemic => "fig5",
        Command::SteadyState => "consensus-surface",
        Command::Evogame => "fig3a",
        Command::Abm => "fig12",
        Command::Compare => "fig4",
        Command::Preset { name } => name.as_str(),
    };
    let base =
        preset(name).ok_or_else(|| CliError::Validation(format!("unknown preset {name:?}")))?;
    let g = &cli.global;
    let config = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", path.display()))
            })?;
            Some(parse_config_value(&text)?)
        }
        None => None,
    };
    let overrides = Overrides {
        out: g.out.clone(),
        seeds: g.seeds.as_deref().map(parse_seeds).transpose()?,
        step: g.step,
        horizon: g.horizon,
    };
    let spec = resolve(&base, config, &overrides)?;
    let manifest = run_experiment(&spec)?;
    println!(
        "{}: {} files in {}",
        manifest.name,
        manifest.files.len() + 1,
        manifest.output_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
