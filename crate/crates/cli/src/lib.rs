//! The `endpower` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use endpower::inference::schoenfeld_sample_size;
use endpower::io::{load_dataset, render_report, ReportFormat, ReportRow, ScenarioConfig};
use endpower::power::{analysis_panel, evaluate, resample_power, run_power_study};
use endpower::{Error, MethodSpec, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

const DEFAULT_SIMS: u64 = 1000;
const DEFAULT_RESAMPLES: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "endpower", version, about = "Power analysis for ordinal trial endpoints")]
struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one trial and write it as a dataset file.
    Simulate(SimulateArgs),
    /// Monte Carlo power of a scenario.
    Power(PowerArgs),
    /// Empirical power by subsampling a dataset.
    Resample(ResampleArgs),
    /// Run the analysis panel on a dataset.
    Analyze(AnalyzeArgs),
    /// Events and total sample size for a time-to-event comparison.
    Samplesize(SampleSizeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LagModeArg {
    Literal,
    Corrected,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario configuration file (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named scenario: reference, lagged, faster_recovery, faster_mortality,
    /// mortality_only, null, scenario_a, scenario_b, scenario_c.
    #[arg(long)]
    preset: Option<String>,
    /// How the lagged model treats the control arm.
    #[arg(long, value_enum)]
    lag_mode: Option<LagModeArg>,
    /// Added to the fixed intercept (0 = published parameters).
    #[arg(long, allow_hyphen_values = true)]
    baseline_offset: Option<f64>,
    #[arg(long)]
    n_per_arm: Option<usize>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Report format (default: csv to a file, text to stdout).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Replicate index within the seed.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Master seed (required unless the config sets master_seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated trials [default: 1000].
    #[arg(long)]
    sims: Option<u64>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Comma-separated methods, e.g. `prop_odds@14,cox_improvement:2`.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ResampleArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    n_per_arm: usize,
    #[arg(long)]
    seed: u64,
    /// Number of resamples.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    sims: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SampleSizeArgs {
    /// Target hazard ratio.
    #[arg(long)]
    hr: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    power: f64,
    /// Probability that a subject has the event.
    #[arg(long)]
    event_rate: f64,
    /// Fraction of subjects allocated to treatment.
    #[arg(long, default_value_t = 0.5)]
    allocation: f64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line with the process's stdout and stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Runs the command line, writing results to `out` and diagnostics to `err`.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    init_logging(cli.verbose);
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Power(a) => power(a, out),
        Command::Resample(a) => resample(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Samplesize(a) => sample_size(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // A second call (tests run several commands per process) keeps the first logger.
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Configuration file (or preset) with the command-line overrides applied.
fn scenario_config(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(p) = &args.preset {
        cfg.preset = Some(p.clone());
    }
    if let Some(m) = args.lag_mode {
        cfg.lag_mode = Some(
            match m {
                LagModeArg::Literal => "literal",
                LagModeArg::Corrected => "corrected",
            }
            .into(),
        );
    }
    if let Some(o) = args.baseline_offset {
        cfg.baseline_offset = Some(o);
    }
    if let Some(n) = args.n_per_arm {
        cfg.n_per_arm = Some(n);
    }
    Ok(cfg)
}

fn required_seed(flag: Option<u64>, config: Option<u64>) -> Result<u64, Failure> {
    flag.or(config)
        .ok_or_else(|| Failure::Usage("--seed is required (or master_seed in the config file)".into()))
}

fn parse_methods(list: &[String], alpha: Option<f64>) -> Result<Vec<MethodSpec>, Failure> {
    let specs = list
        .iter()
        .map(|m| MethodSpec::parse(m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    with_alpha(specs, alpha)
}

fn with_alpha(specs: Vec<MethodSpec>, alpha: Option<f64>) -> Result<Vec<MethodSpec>, Failure> {
    match alpha {
        None => Ok(specs),
        Some(a) => specs
            .into_iter()
            .map(|s| MethodSpec::with_alpha(s.method, s.day, a))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn emit(rows: &[ReportRow], output: &OutputArgs, fallback: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let path = output.out.as_deref().or(fallback);
    let format = match (output.format, path) {
        (Some(FormatArg::Csv), _) | (None, Some(_)) => ReportFormat::Csv,
        (Some(FormatArg::Text), _) | (None, None) => ReportFormat::Text,
    };
    let text = render_report(rows, format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?,
        None => write_stdout(out, &text)?,
    }
    Ok(())
}

fn write_stdout(out: &mut dyn Write, text: &str) -> Outcome {
    out.write_all(text.as_bytes()).map_err(|e| {
        Failure::Data(Error::Io {
            path: "<stdout>".into(),
            message: e.to_string(),
        })
    })
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Outcome {
    let cfg = scenario_config(&args.scenario)?;
    let seed = required_seed(args.seed, cfg.master_seed)?;
    let resolved = cfg.resolve()?;
    let data = resolved.scenario.generate(seed, args.replicate)?;
    match &args.out {
        Some(p) => endpower::io::write_dataset(&data, p)?,
        None => write_stdout(out, &endpower::io::format_dataset(&data))?,
    }
    log::info!("simulated {} subjects", data.len());
    Ok(())
}

fn power(args: PowerArgs, out: &mut dyn Write) -> Outcome {
    let mut cfg = scenario_config(&args.scenario)?;
    if let Some(m) = &args.methods {
        parse_methods(m, args.alpha)?;
        cfg.methods = Some(m.clone());
    }
    if let Some(a) = args.alpha {
        cfg.alpha = Some(a);
    }
    let seed = required_seed(args.seed, cfg.master_seed)?;
    let resolved = cfg.resolve()?;
    let n_sims = args.sims.or(resolved.n_sims).unwrap_or(DEFAULT_SIMS);
    if n_sims == 0 {
        return Err(Failure::Usage("--sims must be at least 1".into()));
    }
    if args.workers == Some(0) {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    log_scenario(&resolved.scenario);
    let table = run_power_study(&resolved.scenario, &resolved.methods, n_sims, seed, args.workers)?;
    let rows = ReportRow::from_power(&table);
    if let Some(p) = &resolved.text_output {
        endpower::io::write_report(&rows, p, ReportFormat::Text)?;
    }
    emit(&rows, &args.output, resolved.output.as_deref(), out)
}

fn log_scenario(scenario: &Scenario<f64>) {
    match scenario {
        Scenario::Line(p) => log::info!(
            "line model: {} per arm, baseline_offset {}, lagged {} ({})",
            p.n_per_arm,
            p.baseline_offset,
            p.lagged,
            p.lag_mode.name()
        ),
        Scenario::PropOdds(p) => log::info!("proportional-odds generator: {} per arm", p.n_per_arm),
    }
}

fn resample(args: ResampleArgs, out: &mut dyn Write) -> Outcome {
    let data = load_dataset(&args.data)?;
    let methods = match &args.methods {
        Some(m) => parse_methods(m, args.alpha)?,
        None => with_alpha(analysis_panel(data.horizon_days()), args.alpha)?,
    };
    if args.workers == Some(0) {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    if args.sims == 0 || args.n_per_arm == 0 {
        return Err(Failure::Usage("--sims and --n-per-arm must be at least 1".into()));
    }
    let table = resample_power::<f64>(&data, args.n_per_arm, args.sims, &methods, args.seed, args.workers)?;
    emit(&ReportRow::from_power(&table), &args.output, None, out)
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> Outcome {
    let data = load_dataset(&args.data)?;
    let methods = match &args.methods {
        Some(m) => parse_methods(m, args.alpha)?,
        None => with_alpha(analysis_panel(data.horizon_days()), args.alpha)?,
    };
    let view = data.view();
    view.require_both_arms()?;
    let rows: Vec<ReportRow> = methods
        .iter()
        .map(|spec| {
            let r = evaluate::<f64>(spec, &view);
            if let Err(e) = &r {
                log::warn!("{spec}: {e}");
            }
            ReportRow::from_test(spec, &r)
        })
        .collect();
    emit(&rows, &args.output, None, out)
}

fn sample_size(args: SampleSizeArgs, out: &mut dyn Write) -> Outcome {
    let s = schoenfeld_sample_size(args.hr, args.alpha, args.power, args.event_rate, args.allocation)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    write_stdout(out, &format!("events: {}\ntotal_n: {}\n", s.events, s.total_n))
}
