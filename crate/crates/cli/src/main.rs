use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nhlab_cli::{parse_config, preset_text, resolve_workers, run_experiment, write_outputs, Experiment, PRESETS};

#[derive(Parser)]
#[command(name = "nhlab", version, about = "Non-Hermitian lattice delocalization experiments")]
struct Cli {
    /// Print the built-in preset configs and exit.
    #[arg(long)]
    list_presets: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Complex single-particle spectra.
    Spectrum(RunArgs),
    /// Fermi-sea velocity against mu (and beta).
    ImvSweep(RunArgs),
    /// Translation-averaged correlation function and decay classification.
    Correlation(RunArgs),
    /// Half-chain second Renyi entropy.
    RenyiScaling(RunArgs),
    /// IPR and peak positions of left/right eigenvectors.
    EigenstateScatter(RunArgs),
    /// Finite-temperature velocity (free fermions or many-body trace).
    ThermalImv(RunArgs),
    /// Interacting ground-state velocity by exact diagonalization.
    EdInteraction(RunArgs),
    /// Step fidelities along interpolation paths.
    Adiabatic(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset name (see --list-presets).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides output.dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "NHLAB_WORKERS")]
    workers: Option<usize>,
    /// Base seed (overrides seeds.base).
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::Spectrum(a) => (Experiment::Spectrum, a),
            Command::ImvSweep(a) => (Experiment::ImvSweep, a),
            Command::Correlation(a) => (Experiment::Correlation, a),
            Command::RenyiScaling(a) => (Experiment::RenyiScaling, a),
            Command::EigenstateScatter(a) => (Experiment::EigenstateScatter, a),
            Command::ThermalImv(a) => (Experiment::ThermalImv, a),
            Command::EdInteraction(a) => (Experiment::EdInteraction, a),
            Command::Adiabatic(a) => (Experiment::Adiabatic, a),
        }
    }
}

fn run(experiment: Experiment, args: &RunArgs) -> anyhow::Result<bool> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(name)) => preset_text(name)
            .with_context(|| format!("unknown preset `{name}` (see --list-presets)"))?
            .to_string(),
        (None, None) => bail!("pass --config PATH or --preset NAME"),
    };
    let mut cfg = match parse_config(&text, Some(experiment)) {
        Ok(c) => c,
        Err(errs) => bail!("invalid config:\n  {}", errs.join("\n  ")),
    };
    if let Some(s) = args.seed {
        cfg.seed_base = s;
    }
    if let Some(out) = &args.out {
        cfg.output = out.to_string_lossy().into_owned();
    }
    let workers = resolve_workers(args.workers, &cfg);
    log::info!(
        "{}: {} scheduled tasks on {workers} workers -> {}",
        experiment.name(),
        cfg.scheduled_tasks(),
        cfg.output
    );
    let table = run_experiment(&cfg, workers)?;
    let summary = write_outputs(std::path::Path::new(&cfg.output), &cfg, &table)?;
    let failed = summary["failed"].as_bool().unwrap_or(true);
    eprintln!(
        "{} rows ({} errors) from {} units written to {}",
        table.rows.len(),
        summary["error_rows"],
        table.units,
        cfg.output
    );
    Ok(!failed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.list_presets {
        for (name, text) in PRESETS {
            println!("### {name}\n{text}");
        }
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("no experiment given; see `nhlab --help`");
        return ExitCode::from(2);
    };
    let (experiment, args) = command.split();
    match run(experiment, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("every task failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
