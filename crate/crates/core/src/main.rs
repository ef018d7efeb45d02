//! Thin CLI over the experiment drivers in the library.
//!
//! Exit codes: 0 success, 1 config error, 2 validation-gate failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cavity_erasure::experiments::{
    cmd_compare, cmd_squeeze, cmd_store, cmd_sweep, paper_grid, CurveTable, ExperimentError,
    ExperimentSpec, Preset, DEFAULT_COMPARE_TRAJECTORIES,
};

#[derive(Parser)]
#[command(
    name = "cavity-erasure",
    version,
    about = "Protected ring cavity simulator: storage and squeezing generation \
             with homodyne erasing, analytic curves cross-checked by Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Storage fidelity vs cycle count (presets: fig2, fig3).
    Store(CurveArgs),
    /// Squeezing-generation variances and target fidelities (presets: fig4, fig5).
    Squeeze(CurveArgs),
    /// Minimal cycle count to reach a target, over a parameter grid.
    Sweep(SweepArgs),
    /// Analytic-vs-Monte-Carlo z-score gate over the paper parameter grid.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl PresetArg {
    fn preset(self) -> Preset {
        match self {
            PresetArg::Fig2 => Preset::Fig2,
            PresetArg::Fig3 => Preset::Fig3,
            PresetArg::Fig4 => Preset::Fig4,
            PresetArg::Fig5 => Preset::Fig5,
        }
    }
}

#[derive(Args)]
struct CurveArgs {
    /// TOML experiment config.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in figure spec.
    #[arg(long)]
    preset: Option<PresetArg>,
    /// Output CSV path (default: the spec's `out`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trajectories per grid point (0 = analytic only).
    #[arg(long)]
    trajectories: Option<usize>,
    /// Drop Monte Carlo columns even if the config requests them.
    #[arg(long)]
    no_mc: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML experiment config (grids are lists, `target` selects the goal).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CompareArgs {
    /// TOML experiment config; defaults to the built-in paper grid.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report CSV path (summary always goes to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_COMPARE_TRAJECTORIES)]
    trajectories: usize,
    /// Debug probe: multiply all feed-forward weights by this factor.
    /// Anything other than 1.0 must trip the gate.
    #[arg(long, default_value_t = 1.0, hide = true)]
    corrupt_weights: f64,
}

fn load_spec(path: &PathBuf) -> Result<ExperimentSpec, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Io(path.display().to_string(), e.to_string()))?;
    ExperimentSpec::from_toml(&text)
}

fn resolve_curve_spec(
    args: &CurveArgs,
    default_preset: Preset,
) -> Result<ExperimentSpec, ExperimentError> {
    let mut spec = match (&args.config, args.preset) {
        (Some(path), _) => load_spec(path)?,
        (None, Some(p)) => p.preset().spec(),
        (None, None) => default_preset.spec(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.trajectories {
        spec.trajectories = n;
    }
    if args.no_mc {
        spec.trajectories = 0;
    }
    Ok(spec)
}

fn emit(
    table: &CurveTable,
    out: Option<&PathBuf>,
    spec_out: Option<&str>,
) -> Result<(), ExperimentError> {
    match out.cloned().or_else(|| spec_out.map(PathBuf::from)) {
        Some(path) => {
            table.write_csv(&path)?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{}", table.to_csv());
            Ok(())
        }
    }
}

fn run() -> Result<ExitCode, ExperimentError> {
    match Cli::parse().command {
        Command::Store(args) => {
            let spec = resolve_curve_spec(&args, Preset::Fig2)?;
            let table = cmd_store(&spec)?;
            emit(&table, args.out.as_ref(), spec.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Squeeze(args) => {
            let spec = resolve_curve_spec(&args, Preset::Fig4)?;
            let table = cmd_squeeze(&spec)?;
            emit(&table, args.out.as_ref(), spec.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let mut spec = load_spec(&args.config)?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            let table = cmd_sweep(&spec)?;
            emit(&table, args.out.as_ref(), spec.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let specs = match &args.config {
                Some(path) => {
                    let mut spec = load_spec(path)?;
                    spec.seed = args.seed;
                    if spec.trajectories == 0 {
                        spec.trajectories = args.trajectories;
                    }
                    vec![spec]
                }
                None => paper_grid(args.trajectories, args.seed),
            };
            let report = cmd_compare(&specs, args.corrupt_weights)?;
            if let Some(path) = &args.out {
                report.to_table().write_csv(path)?;
            }
            print!("{}", report.summary());
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                for row in report.failing() {
                    eprintln!(
                        "gate failure: {} strategy {} {}: z = {:e}",
                        row.scenario.label(),
                        row.strategy.letter(),
                        row.check.moment.label(),
                        row.check.z
                    );
                }
                Ok(ExitCode::from(2))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
