use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use etpa_cli::analyze::{analyze, write_analysis, AnalyzeOptions};
use etpa_cli::config::{load_config, read_config_bytes};
use etpa_cli::csvio::{read_counts, write_counts};
use etpa_cli::error::{CliError, CliResult};
use etpa_cli::homscan::{fit_hom_scan, write_hom_report};
use etpa_cli::ingest::ingest_file;
use etpa_cli::runsim::{run_simulation, RunOptions};
use etpa_core::estimators::{sensitivity_bound, HomShape};
use etpa_core::montecarlo::SimulationMode;

/// Simulate and analyze photon-counting transmission experiments on
/// entangled pair sources.
#[derive(Parser)]
#[command(name = "etpa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rate,
    Event,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Dip,
    Peak,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic counts for the configured sweep.
    Simulate(SimulateArgs),
    /// Produce cross-section tables, signal series, and sensitivity bounds
    /// from a counts CSV.
    Analyze(AnalyzeArgs),
    /// Normalize an externally recorded counts CSV into the canonical
    /// schema.
    Ingest(IngestArgs),
    /// Fit the interference curve to a delay scan.
    HomFit(HomFitArgs),
    /// Transmittance-scheme sensitivity lower bound for a given solvent
    /// rate and concentration.
    Bound(BoundArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for counts.csv and manifest.toml.
    #[arg(long)]
    out: PathBuf,
    /// Base seed; overrides the config's base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Sampling mode.
    #[arg(long, value_enum, default_value = "rate")]
    mode: ModeArg,
    /// Replicas per sweep point; overrides the config's sweep.replicas.
    #[arg(long)]
    replicas: Option<u32>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Experiment configuration (TOML); supplies channel and detector
    /// parameters.
    #[arg(long)]
    config: PathBuf,
    /// Counts CSV to analyze.
    #[arg(long)]
    counts: PathBuf,
    /// Output directory for report.csv, signals.csv, absorption.csv,
    /// bounds.csv.
    #[arg(long)]
    out: PathBuf,
    /// Apply the reference-arm drift correction to sample-arm rates.
    #[arg(long)]
    ref_correct: bool,
    /// Override the cuvette path length (cm) used in cross-section
    /// conversions.
    #[arg(long)]
    path_length_cm: Option<f64>,
}

#[derive(Args)]
struct IngestArgs {
    /// External counts CSV.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for the normalized counts.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HomFitArgs {
    /// Counts CSV holding the delay scan (one row per delay point).
    #[arg(long)]
    counts: PathBuf,
    /// Expected feature shape.
    #[arg(long, value_enum)]
    shape: ShapeArg,
    /// Output directory for homfit.toml and homfit_curve.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// Mean solvent count rate, s^-1.
    #[arg(long)]
    rate: f64,
    /// Sample concentration, mol/L.
    #[arg(long)]
    concentration: f64,
    /// Cuvette path length, cm.
    #[arg(long, default_value_t = 1.0)]
    path_length_cm: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => {
            let config = load_config(&args.config)?;
            let config_bytes = read_config_bytes(&args.config)?;
            let options = RunOptions {
                mode: match args.mode {
                    ModeArg::Rate => SimulationMode::Rate,
                    ModeArg::Event => SimulationMode::Event,
                },
                seed_override: args.seed,
                replicas_override: args.replicas,
            };
            let summary = run_simulation(config, &config_bytes, &args.out, &options)?;
            println!(
                "wrote {} rows to {} (manifest: {})",
                summary.rows,
                summary.counts_path.display(),
                summary.manifest_path.display()
            );
            Ok(())
        }
        Command::Analyze(args) => {
            let config = load_config(&args.config)?;
            let rows = read_counts(&args.counts)?;
            let options = AnalyzeOptions {
                path_length_cm: args.path_length_cm,
                ref_correct: args.ref_correct,
            };
            let analysis = analyze(&rows, &config, &options)?;
            write_analysis(&args.out, &analysis)?;
            let cells: usize = analysis.tables.iter().map(|t| t.rows.len()).sum();
            println!(
                "analyzed {} rows into {} table cells; reports in {}",
                rows.len(),
                cells,
                args.out.display()
            );
            Ok(())
        }
        Command::Ingest(args) => {
            let outcome = ingest_file(&args.input)?;
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            for rejected in &outcome.rejected {
                eprintln!("rejected {rejected}");
            }
            if outcome.rows.is_empty() {
                return Err(CliError::validation("no valid rows after ingestion"));
            }
            std::fs::create_dir_all(&args.out)
                .map_err(|e| CliError::io(format!("{}: {e}", args.out.display())))?;
            let path = args.out.join("counts.csv");
            write_counts(&path, &outcome.rows)?;
            println!(
                "ingested {} rows ({} rejected) into {}",
                outcome.rows.len(),
                outcome.rejected.len(),
                path.display()
            );
            Ok(())
        }
        Command::HomFit(args) => {
            let rows = read_counts(&args.counts)?;
            let shape = match args.shape {
                ShapeArg::Dip => HomShape::Dip,
                ShapeArg::Peak => HomShape::Peak,
            };
            let report = fit_hom_scan(&rows, shape)?;
            write_hom_report(&args.out, &rows, shape, &report)?;
            println!(
                "visibility = {:.4}, fwhm = {:.1} fs, center/baseline = {:.3} ({} points); report in {}",
                report.params.visibility,
                report.params.fwhm_fs,
                report.params.center_to_baseline_ratio(),
                report.n_points,
                args.out.display()
            );
            Ok(())
        }
        Command::Bound(args) => {
            let bound = sensitivity_bound(args.rate, args.concentration, args.path_length_cm)?;
            println!("{bound:e}");
            Ok(())
        }
    }
}
