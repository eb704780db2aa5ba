//! The `rabbit-hunt` command line.
//!
//! Every subcommand accepts `--config FILE` (JSON when the name ends in
//! `.json`, TOML otherwise) whose keys mirror the long flag names; flags win
//! over file values. A run manifest is itself a valid config file.
//!
//! Exit codes: 0 success or hit, 1 runtime failure (I/O, failed `--check`),
//! 2 usage error, 3 hunt censored, 4 arithmetic overflow.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{integral_sandwich, reciprocal_partial_sums, survival_for_strategy, SandwichRow};
use crate::enumeration::{covering_bound, zd_forward, zd_inverse, Dimension};
use crate::envelope::{validate_h, HFunction, ValidationReport};
use crate::error::Error;
use crate::export::{run_montecarlo, write_montecarlo, write_survival_to, ExportError, Manifest};
use crate::model::RabbitModel;
use crate::simulation::{run_hunt, HuntConfig, HuntOutcomeJson};
use crate::strategy::StrategySpec;

pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const CENSORED: u8 = 3;
    pub const ARITHMETIC: u8 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "rabbit-hunt", version, about = "Hunt invisible rabbits on the integer line")]
pub struct Cli {
    /// Config file supplying any flag (JSON or TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; a fresh one is drawn and recorded when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one hunt and print its outcome as JSON.
    Hunt(HuntArgs),
    /// Run a batch of seeded hunts and write CSV/JSON results.
    Montecarlo(MonteCarloArgs),
    /// Dump the index ↔ Z^d enumeration as CSV.
    Enumerate(EnumerateArgs),
    /// Check an envelope function and report on its reciprocal series.
    ValidateH(ValidateArgs),
    /// Print the exact survival curve of a hunt as CSV.
    Survival(SurvivalArgs),
}

#[derive(Debug, Args)]
struct HuntArgs {
    /// Rabbit, e.g. `linear:5,-3`, `polynomial:2,0,1`, `real-linear:0.3,1.0`, `lattice:1,2,3,4`.
    #[arg(long, allow_hyphen_values = true)]
    rabbit: Option<String>,
    /// Strategy: `diagonal:snake|3|4` or `probabilistic:<envelope>`.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    cutoff: Option<u64>,
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long, allow_hyphen_values = true)]
    rabbit: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    cutoff: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Truncation horizons for the mean of min(T, K'); defaults to decades and K.
    #[arg(long, value_delimiter = ',')]
    horizons: Option<Vec<u64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail (exit 1) unless the batch agrees with the analytic curve.
    #[arg(long)]
    check: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    /// Lattice dimension (2, 3 or 4).
    #[arg(long = "d")]
    d: Option<usize>,
    /// Dump indices 1..=COUNT.
    #[arg(long, conflicts_with = "box_radius")]
    count: Option<u64>,
    /// Dump every point of [-M, M]^d with its index, in index order.
    #[arg(long = "box", value_name = "M")]
    box_radius: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Envelope name: klogk, xloglog, k15, const:C, linear:C, pow:P.
    name: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
}

#[derive(Debug, Args)]
struct SurvivalArgs {
    #[arg(long, allow_hyphen_values = true)]
    rabbit: Option<String>,
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Keys accepted in a config file.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    rabbit: Option<String>,
    strategy: Option<String>,
    cutoff: Option<u64>,
    trials: Option<u64>,
    seed: Option<u64>,
    horizon: Option<u64>,
    horizons: Option<Vec<u64>>,
    out: Option<PathBuf>,
    check: Option<bool>,
    threads: Option<usize>,
    d: Option<usize>,
    count: Option<u64>,
    #[serde(rename = "box")]
    box_radius: Option<u64>,
    name: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Arithmetic(String),
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Arithmetic(_) => exit::ARITHMETIC,
            CliError::Failure(_) => exit::FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Arithmetic(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_arithmetic() {
            CliError::Arithmetic(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<ExportError> for CliError {
    fn from(e: ExportError) -> Self {
        match e {
            ExportError::Model(m) => m.into(),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o error: {e}"))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T>(flag: Option<T>, file: Option<T>, name: &str) -> Result<T, CliError> {
    flag.or(file).ok_or_else(|| usage(format!("missing --{name} (flag or config key)")))
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

fn fresh_seed() -> u64 {
    ChaCha8Rng::from_os_rng().next_u64()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return exit::USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return exit::SUCCESS;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "rabbit-hunt: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8, CliError> {
    let file = load_config(cli.config.as_deref())?;
    let seed_given = cli.seed.or(file.seed);
    let seed = seed_given.unwrap_or_else(fresh_seed);
    if seed_given.is_none() {
        writeln!(stderr, "rabbit-hunt: using fresh seed {seed}")?;
    }
    match cli.command {
        Command::Hunt(args) => hunt(args, file, seed, stdout),
        Command::Montecarlo(args) => montecarlo(args, file, seed, stdout),
        Command::Enumerate(args) => enumerate(args, file, stdout),
        Command::ValidateH(args) => validate(args, file, seed, stdout),
        Command::Survival(args) => survival(args, file, stdout),
    }
}

#[derive(Serialize)]
struct HuntReport {
    #[serde(flatten)]
    outcome: HuntOutcomeJson,
    manifest: Manifest,
}

fn hunt(args: HuntArgs, file: FileConfig, seed: u64, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let rabbit: RabbitModel = required(args.rabbit, file.rabbit, "rabbit")?.parse()?;
    let strategy: StrategySpec = required(args.strategy, file.strategy, "strategy")?.parse()?;
    let cutoff = required(args.cutoff, file.cutoff, "cutoff")?;
    if cutoff == 0 {
        return Err(usage("--cutoff must be at least 1"));
    }
    strategy.check_compatible(&rabbit)?;

    let mut hunter = strategy.hunter(seed, 0);
    let outcome = run_hunt(&rabbit, &mut hunter, cutoff)?;
    let manifest = Manifest {
        rabbit: Some(rabbit.to_string()),
        strategy: Some(strategy.to_string()),
        cutoff: Some(cutoff),
        ..Manifest::new("hunt", seed)
    };
    writeln!(stdout, "{}", to_json(&HuntReport { outcome: outcome.to_json(), manifest })?)?;
    Ok(if outcome.is_hit() { exit::SUCCESS } else { exit::CENSORED })
}

fn montecarlo(args: MonteCarloArgs, file: FileConfig, seed: u64, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let config = HuntConfig {
        rabbit: required(args.rabbit, file.rabbit, "rabbit")?.parse()?,
        strategy: required(args.strategy, file.strategy, "strategy")?.parse()?,
        cutoff: required(args.cutoff, file.cutoff, "cutoff")?,
        master_seed: seed,
        trials: required(args.trials, file.trials, "trials")?,
    };
    config.validate()?;
    let horizons = args.horizons.or(file.horizons).unwrap_or_default();
    if let Some(&bad) = horizons.iter().find(|&&h| h == 0 || h > config.cutoff) {
        return Err(usage(format!("horizon {bad} outside 1..={}", config.cutoff)));
    }
    let out = required(args.out, file.out, "out")?;
    let check = args.check || file.check.unwrap_or(false);

    let run = match args.threads.or(file.threads) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Failure(e.to_string()))?;
            pool.install(|| run_montecarlo(&config, &horizons))?
        }
        None => run_montecarlo(&config, &horizons)?,
    };
    write_montecarlo(&out, &run)?;
    writeln!(stdout, "{}", to_json(&run.summary)?)?;
    Ok(if check && !run.summary.check.passed { exit::FAILURE } else { exit::SUCCESS })
}

const MAX_ENUMERATION_ROWS: u64 = 50_000_000;

fn enumerate(args: EnumerateArgs, file: FileConfig, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let d = Dimension::new(required(args.d, file.d, "d")?)?.get();
    let (count, box_radius) = match (args.count, args.box_radius) {
        (None, None) => (file.count, file.box_radius),
        flags => flags,
    };
    let mut sink: Box<dyn Write> = match args.out.or(file.out) {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(&mut *stdout),
    };
    let mut w = csv::Writer::from_writer(&mut sink);
    let mut header = vec!["index".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(|e| CliError::Failure(e.to_string()))?;
    let mut emit = |k: u64, p: &[i64]| -> Result<(), CliError> {
        let mut row = vec![k.to_string()];
        row.extend(p.iter().map(|c| c.to_string()));
        w.write_record(&row).map_err(|e| CliError::Failure(e.to_string()))
    };

    match (count, box_radius) {
        (Some(count), None) => {
            if count > MAX_ENUMERATION_ROWS {
                return Err(usage(format!("--count above {MAX_ENUMERATION_ROWS}")));
            }
            for k in 1..=count {
                emit(k, &zd_forward(d, k)?)?;
            }
        }
        (None, Some(m)) => {
            let side = 2 * m.min(1 << 20) + 1;
            if side.saturating_pow(d as u32) > MAX_ENUMERATION_ROWS {
                return Err(usage(format!("box of radius {m} in dimension {d} is too large to dump")));
            }
            // bounded by the covering bound, so the indices stay in range
            covering_bound(d, m)?;
            let m = m as i64;
            let mut rows = Vec::new();
            let mut point = vec![-m; d];
            loop {
                rows.push((zd_inverse(d, &point)?, point.clone()));
                let Some(i) = point.iter().rposition(|&c| c < m) else { break };
                point[i] += 1;
                point[i + 1..].iter_mut().for_each(|c| *c = -m);
            }
            rows.sort_unstable_by_key(|r| r.0);
            for (k, p) in rows {
                emit(k, &p)?;
            }
        }
        (Some(_), Some(_)) => return Err(usage("--count and --box are mutually exclusive")),
        (None, None) => return Err(usage("one of --count or --box is required")),
    }
    w.flush()?;
    Ok(exit::SUCCESS)
}

#[derive(Serialize)]
struct ReciprocalRow {
    m: u64,
    floored: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    unfloored: Option<f64>,
}

#[derive(Serialize)]
struct IntegralTest {
    holds: bool,
    slack: f64,
    rows: Vec<SandwichRow>,
}

#[derive(Serialize)]
struct ValidateOutput {
    report: ValidationReport,
    reciprocal_partial_sums: Vec<ReciprocalRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    integral_test: Option<IntegralTest>,
    manifest: Manifest,
}

const SANDWICH_SLACK: f64 = 1e-6;

fn validate(args: ValidateArgs, file: FileConfig, seed: u64, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let name = required(args.name, file.name, "name")?;
    let h = HFunction::by_name(&name)?;
    let horizon = args.horizon.or(file.horizon).unwrap_or(100_000);
    let report = validate_h(&h, horizon)?;
    let sums = reciprocal_partial_sums(&h, horizon)?;
    let checkpoints: Vec<u64> = report.reciprocal_sums.iter().map(|&(m, _)| m).collect();
    let reciprocal_partial_sums = checkpoints
        .iter()
        .map(|&m| ReciprocalRow { m, floored: sums.floored_at(m), unfloored: sums.unfloored_at(m) })
        .collect();
    let integral_test = if name == "klogk" {
        let rows = integral_sandwich(&sums, &checkpoints, SANDWICH_SLACK)?;
        Some(IntegralTest { holds: rows.iter().all(|r| r.holds), slack: SANDWICH_SLACK, rows })
    } else {
        None
    };
    let out = ValidateOutput {
        report,
        reciprocal_partial_sums,
        integral_test,
        manifest: Manifest { horizons: vec![horizon], ..Manifest::new("validate-h", seed) },
    };
    writeln!(stdout, "{}", to_json(&out)?)?;
    Ok(exit::SUCCESS)
}

fn survival(args: SurvivalArgs, file: FileConfig, stdout: &mut dyn Write) -> Result<u8, CliError> {
    let rabbit: RabbitModel = required(args.rabbit, file.rabbit, "rabbit")?.parse()?;
    let strategy: StrategySpec = required(args.strategy, file.strategy, "strategy")?.parse()?;
    let horizon = required(args.horizon, file.horizon.or(file.cutoff), "horizon")?;
    let curve = survival_for_strategy(&rabbit, &strategy, horizon)?;
    match args.out.or(file.out) {
        Some(path) => write_survival_to(fs::File::create(path)?, &curve, None)?,
        None => write_survival_to(&mut *stdout, &curve, None)?,
    }
    Ok(exit::SUCCESS)
}
