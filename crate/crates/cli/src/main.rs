//! `wtp`: de-bias stated WTP data, estimate demand, and set prices.

mod commands;
mod config;
mod error;
mod run;
mod series;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wtp_core::debias::Procedure;
use wtp_core::study::DcMeanMode;

use crate::config::{Decimal, GridDecl, RunConfig, StudyMode};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "wtp",
    version,
    about = "De-bias stated willingness-to-pay data and price from it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic OE / DC / BDM scenario with known truth.
    Simulate(RunArgs),
    /// Remove the OE inflation using the DC mean.
    Debias(RunArgs),
    /// Demand curves and mean WTP with intervals and tests.
    Estimate(RunArgs),
    /// Profit-maximizing price, quantity, and profit per data source.
    Optimize(RunArgs),
    /// Grid-narrowing Monte-Carlo study.
    Study(RunArgs),
    /// Re-render an estimate/optimize JSON report as text or CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcedureArg {
    Basic,
    Epsilon,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Parametric,
    Nonparametric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StudyModeArg {
    Parametric,
    Nonparametric,
    Both,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration (or a manifest from an earlier run).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Open-ended WTP CSV (respondent_id,stated_wtp).
    #[arg(long)]
    oe: Option<PathBuf>,
    /// Dichotomous-choice CSV (respondent_id,price_cue,accept).
    #[arg(long)]
    dc: Option<PathBuf>,
    /// Incentive-aligned WTP CSV used as benchmark and to calibrate cov.
    #[arg(long)]
    bdm: Option<PathBuf>,
    /// Additional WTP series to include, e.g. a de-biased CSV. Repeatable.
    #[arg(long)]
    wtp: Vec<PathBuf>,
    #[arg(long, value_enum)]
    procedure: Option<ProcedureArg>,
    /// cov(θ, p) for FULL; defaults to BDM mean minus DC mean when --bdm is given.
    #[arg(long, allow_hyphen_values = true)]
    cov: Option<f64>,
    /// σ of the simulated ε; defaults to the SD of the OE series.
    #[arg(long)]
    epsilon_sd: Option<f64>,
    /// Set negative de-biased values to zero.
    #[arg(long)]
    clamp_at_zero: bool,
    /// Known DC mean WTP, instead of estimating it from --dc.
    #[arg(long)]
    dc_mean: Option<f64>,
    #[arg(long, value_enum)]
    dc_mean_mode: Option<ModeArg>,
    #[arg(long, requires_all = ["grid_max", "grid_step"])]
    grid_min: Option<f64>,
    #[arg(long, requires_all = ["grid_min", "grid_step"])]
    grid_max: Option<f64>,
    #[arg(long, requires_all = ["grid_min", "grid_max"])]
    grid_step: Option<f64>,
    /// Explicit DC price levels, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "grid_min")]
    grid_levels: Option<Vec<f64>>,
    /// Marginal cost c.
    #[arg(long)]
    cost: Option<f64>,
    /// Market size ms.
    #[arg(long)]
    market_size: Option<f64>,
    /// Bootstrap replicates.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Respondents per simulated group.
    #[arg(long)]
    n: Option<usize>,
    /// Study replicates.
    #[arg(long)]
    samples: Option<usize>,
    /// Study DC mean mode(s).
    #[arg(long, value_enum)]
    mode: Option<StudyModeArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReportFormat {
    Text,
    Csv,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// estimate.json or optimize.json from an earlier run.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let paths = [
        (&args.oe, &mut cfg.oe),
        (&args.dc, &mut cfg.dc),
        (&args.bdm, &mut cfg.bdm),
    ];
    for (flag, slot) in paths {
        if let Some(p) = flag {
            *slot = Some(p.clone());
        }
    }
    if !args.wtp.is_empty() {
        cfg.wtp = args.wtp.clone();
    }
    if let Some(p) = args.procedure {
        cfg.procedure = match p {
            ProcedureArg::Basic => Procedure::Basic,
            ProcedureArg::Epsilon => Procedure::Epsilon,
            ProcedureArg::Full => Procedure::Full,
        };
    }
    if let Some(m) = args.dc_mean_mode {
        cfg.dc_mean_mode = match m {
            ModeArg::Parametric => DcMeanMode::Parametric,
            ModeArg::Nonparametric => DcMeanMode::Nonparametric,
        };
    }
    if let Some(m) = args.mode {
        cfg.study_mode = match m {
            StudyModeArg::Parametric => StudyMode::Parametric,
            StudyModeArg::Nonparametric => StudyMode::Nonparametric,
            StudyModeArg::Both => StudyMode::Both,
        };
    }
    cfg.cov = args.cov.map(Decimal).or(cfg.cov);
    cfg.epsilon_sd = args.epsilon_sd.map(Decimal).or(cfg.epsilon_sd);
    cfg.dc_mean = args.dc_mean.map(Decimal).or(cfg.dc_mean);
    cfg.clamp_at_zero |= args.clamp_at_zero;
    if let (Some(min), Some(max), Some(step)) = (args.grid_min, args.grid_max, args.grid_step) {
        cfg.grid = Some(GridDecl::Range {
            min: Decimal(min),
            max: Decimal(max),
            step: Decimal(step),
        });
    }
    if let Some(levels) = &args.grid_levels {
        cfg.grid = Some(GridDecl::Levels(
            levels.iter().copied().map(Decimal).collect(),
        ));
    }
    if let Some(c) = args.cost {
        cfg.market.marginal_cost = Decimal(c);
    }
    if let Some(ms) = args.market_size {
        cfg.market.market_size = Decimal(ms);
    }
    if let Some(c) = args.confidence {
        cfg.confidence = Decimal(c);
    }
    cfg.reps = args.reps.unwrap_or(cfg.reps);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.scenario.n_per_group = args.n.unwrap_or(cfg.scenario.n_per_group);
    cfg.study.n_samples = args.samples.unwrap_or(cfg.study.n_samples);
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(resolve(&a)?),
        Command::Debias(a) => commands::debias(resolve(&a)?),
        Command::Estimate(a) => commands::estimate(resolve(&a)?),
        Command::Optimize(a) => commands::optimize(resolve(&a)?),
        Command::Study(a) => commands::study(resolve(&a)?),
        Command::Report(a) => commands::report(&a.input, a.format, a.out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
