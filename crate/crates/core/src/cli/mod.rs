//! Command-line front end: `cache-mimo <command> [--config PATH] [--out DIR] ...`.
//!
//! Every command writes `results.csv` and/or `results.json` (or `checks.*` for
//! `validate`) plus a `manifest.json` holding the fully resolved configuration.
//! Passing that manifest back through `--config` reproduces the results.

pub mod config;
pub mod output;
pub mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{self, CachingStatistics, LargeSystem, Mode, PointStatus, PrecoderFamily};
use crate::channel;
use crate::error::Error;
use crate::exec::{self, Exec};
use crate::precoding::PrecoderKind;
use crate::rates::{self, CachePolicy, Method};

pub use config::RunConfig;
use config::{Axis, CacheAxis, MethodChoice};
use output::{Artifacts, CheckRecord, Record};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Rate per user versus antennas per user.
    SweepRho0,
    /// Rate per user versus cache size.
    SweepCache,
    /// Run the self-check suite and report pass/fail per check.
    Validate,
    /// Optimal RZF regularizer versus antennas per user.
    OptimizeXi,
    /// Monte Carlo ergodic rates of a finite system.
    McRate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SweepRho0 => "sweep-rho0",
            Command::SweepCache => "sweep-cache",
            Command::Validate => "validate",
            Command::OptimizeXi => "optimize-xi",
            Command::McRate => "mc-rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Parser)]
#[command(name = "cache-mimo", version, about = "Cache-aided massive MIMO downlink rates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// mc-rate only: write the first trial's channel matrix here.
    #[arg(long, global = true)]
    pub dump_channel: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub threads: Option<usize>,
    pub format: Format,
    pub force: bool,
    pub dump_channel: Option<PathBuf>,
}

impl From<Cli> for RunManifest {
    fn from(c: Cli) -> Self {
        RunManifest {
            command: c.command,
            config_path: c.config,
            output_dir: c.out,
            seed: c.seed,
            trials: c.trials,
            threads: c.threads,
            format: c.format,
            force: c.force,
            dump_channel: c.dump_channel,
        }
    }
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    pub seed: u64,
    pub trials: u64,
    pub threads: Option<usize>,
    pub format: Format,
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) | Error::InvalidRegularizer(_) => EXIT_CONFIG,
            Error::ZfInfeasible { .. } | Error::NoActiveUsers => EXIT_INFEASIBLE,
            Error::DegenerateChannel | Error::ExpectationDiverges(_) | Error::OptimizerDomain(_) => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_CONFIG, message: msg.into() }
}

/// Reads a TOML config, or the `config` field of a manifest when the file is JSON.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        let m: ManifestFile = serde_json::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        Ok(m.config)
    } else {
        RunConfig::parse_toml(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }
}

/// Fills every default so the manifest fully determines the run.
pub fn resolve(mut config: RunConfig, manifest: &RunManifest) -> Result<RunConfig, CliError> {
    if manifest.seed.is_some() {
        config.seed = manifest.seed;
    }
    if manifest.trials.is_some() {
        config.trials = manifest.trials;
    }
    config.seed = Some(config.seed());
    config.trials = Some(config.trials());
    config.antennas.get_or_insert(config::DEFAULT_ANTENNAS);
    let default_users = match (manifest.command, config.method) {
        (Command::SweepRho0 | Command::SweepCache, Some(MethodChoice::MonteCarlo)) => config::DEFAULT_MC_USERS,
        _ => config::DEFAULT_USERS,
    };
    config.users.get_or_insert(default_users);
    config.library_size.get_or_insert(100);
    config.file_size_mb.get_or_insert(1.0);
    config.snr_db.get_or_insert(10.0);
    config.beta.get_or_insert(0.5);
    config.noise_power.get_or_insert(1.0);
    config.precoders = Some(config.precoders());
    config.modes = Some(config.modes());
    config.method.get_or_insert(MethodChoice::Analytic);
    if config.cache_size.is_none() {
        config.cache_size = Some(match manifest.command {
            Command::SweepCache => CacheAxis::List(config::default_cache_grid()),
            _ => CacheAxis::Value(config::DEFAULT_CACHE_SIZE),
        });
    }
    if config.rho0.is_none() {
        config.rho0 = Some(match manifest.command {
            Command::SweepRho0 | Command::OptimizeXi => Axis::Grid(config::default_rho0_grid()),
            _ => Axis::Value(config::DEFAULT_RHO0),
        });
    }
    Ok(config)
}

enum Output {
    Rates(Vec<Record>),
    Checks(Vec<CheckRecord>),
}

fn execute(command: Command, config: &RunConfig, manifest: &RunManifest, exec: Exec) -> Result<Output, CliError> {
    let seed = config.seed();
    match command {
        Command::SweepRho0 => {
            let template = config.template(config.scalar_cache_size()?, config::DEFAULT_RHO0);
            let grid = config.rho0_grid()?;
            let r = analysis::sweep_rho0(&template, &grid, &config.precoders(), &config.modes(), config.sweep_method(), exec)?;
            Ok(Output::Rates(output::records_from_sweep(&r, seed)))
        }
        Command::SweepCache => {
            let template = config.template(config::DEFAULT_CACHE_SIZE, config.scalar_rho0()?);
            let grid = config.cache_grid();
            let r = analysis::sweep_cache_size(&template, &grid, &config.precoders(), &config.modes(), config.sweep_method(), exec)?;
            Ok(Output::Rates(output::records_from_sweep(&r, seed)))
        }
        Command::OptimizeXi => optimize_xi(config).map(Output::Rates),
        Command::McRate => mc_rate(config, manifest, exec).map(Output::Rates),
        Command::Validate => Ok(Output::Checks(validate::run_checks(seed, manifest.trials, exec)?)),
    }
}

fn large_system(config: &RunConfig, mode: Mode) -> Result<LargeSystem, Error> {
    let t = config.template(config.scalar_cache_size()?, config::DEFAULT_RHO0);
    let stats = CachingStatistics::new(t.library_size, t.cache_size, 2)?;
    Ok(LargeSystem::new(t.beta, 10f64.powf(t.snr_db / 10.0), &stats, mode))
}

fn optimize_xi(config: &RunConfig) -> Result<Vec<Record>, CliError> {
    let grid = config.rho0_grid()?;
    let mut out = Vec::new();
    for mode in config.modes() {
        let system = large_system(config, mode)?;
        for &rho0 in &grid {
            let (rate, xi, status) = match system.rzf_optimized(rho0) {
                Ok(o) => (Some(o.rate), Some(o.xi), PointStatus::Ok),
                Err(Error::NoActiveUsers) => (None, None, PointStatus::NoActiveUsers),
                Err(e) => return Err(e.into()),
            };
            out.push(Record {
                axis: "rho0".into(),
                axis_value: rho0,
                precoder: PrecoderFamily::Rzf,
                mode,
                method: Method::Asymptotic,
                rate,
                stderr: None,
                trials: 0,
                seed: config.seed(),
                xi,
                status,
            });
        }
    }
    Ok(out)
}

fn mc_rate(config: &RunConfig, manifest: &RunManifest, exec: Exec) -> Result<Vec<Record>, CliError> {
    let system = config.system()?;
    let rho0 = system.antennas as f64 / system.users as f64;
    let trials = config.trials();
    let mut out = Vec::new();
    for precoder in config.precoders() {
        for mode in config.modes() {
            let xi = match (precoder, config.xi) {
                (PrecoderFamily::Rzf, Some(xi)) => Some(xi),
                (PrecoderFamily::Rzf, None) => Some(large_system(config, mode)?.rzf_optimized(rho0)?.xi),
                _ => None,
            };
            let kind = match precoder {
                PrecoderFamily::Mrt => PrecoderKind::Mrt,
                PrecoderFamily::Zf => PrecoderKind::Zf,
                PrecoderFamily::Rzf => PrecoderKind::Rzf { alpha: xi.unwrap_or_default() * system.antennas as f64 },
            };
            let policy = match mode {
                Mode::Proposed => CachePolicy::Random,
                Mode::Baseline => CachePolicy::Baseline,
            };
            let mut record = Record {
                axis: "rho0".into(),
                axis_value: rho0,
                precoder,
                mode,
                method: Method::MonteCarlo,
                rate: None,
                stderr: None,
                trials: 0,
                seed: system.seed,
                xi,
                status: PointStatus::Ok,
            };
            match rates::mc_ergodic_rate(&system, &policy, kind, trials, exec) {
                Ok(r) => {
                    record.rate = Some(r.mean_rate);
                    record.stderr = r.mean_stderr;
                    record.trials = r.trials;
                }
                Err(Error::ZfInfeasible { .. }) => record.status = PointStatus::ZfInfeasible,
                Err(Error::NoActiveUsers) => record.status = PointStatus::NoActiveUsers,
                Err(e) => return Err(e.into()),
            }
            out.push(record);
        }
    }
    if let Some(path) = &manifest.dump_channel {
        if path.exists() && !manifest.force {
            return Err(overwrite_error(path));
        }
        let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
        channel::draw_channel_for_trial(&system, 0)
            .write_dump(std::io::BufWriter::new(file))
            .map_err(|e| io_error(path, e))?;
    }
    Ok(out)
}

fn overwrite_error(path: &Path) -> CliError {
    CliError { code: EXIT_IO, message: format!("{} exists; pass --force to overwrite", path.display()) }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Exit code implied by the per-point statuses of a rate table.
fn status_code(records: &[Record]) -> i32 {
    if records.iter().any(|r| r.status == PointStatus::NumericalFailure) {
        EXIT_NUMERICAL
    } else if !records.is_empty() && records.iter().all(|r| r.status != PointStatus::Ok) {
        EXIT_INFEASIBLE
    } else {
        0
    }
}

/// Runs one command. Returns the process exit code on success paths that
/// still carry a failure status (failed checks, all points infeasible).
pub fn run(manifest: &RunManifest) -> Result<i32, CliError> {
    let raw = match &manifest.config_path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let config = resolve(raw, manifest)?;
    let dir = &manifest.output_dir;
    let stem = if manifest.command == Command::Validate { "checks" } else { "results" };
    let mut artifacts = Artifacts::default();
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let manifest_path = dir.join("manifest.json");
    // refuse before doing any work
    let targets: Vec<&PathBuf> = [
        manifest.format.csv().then_some(&csv_path),
        manifest.format.json().then_some(&json_path),
        Some(&manifest_path),
    ]
    .into_iter()
    .flatten()
    .collect();
    if !manifest.force {
        if let Some(p) = targets.iter().find(|p| p.exists()) {
            return Err(overwrite_error(p));
        }
    }

    let result = exec::with_threads(manifest.threads, || execute(manifest.command, &config, manifest, Exec::Parallel))?;

    let code = match &result {
        Output::Rates(records) => {
            if manifest.format.csv() {
                artifacts.add(csv_path.clone(), output::results_csv(records));
            }
            if manifest.format.json() {
                artifacts.add(json_path.clone(), json(records));
            }
            println!("{} rows", records.len());
            status_code(records)
        }
        Output::Checks(checks) => {
            for c in checks {
                println!(
                    "{} {:<26} value={} target={} tol={}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.check,
                    output::fmt_sig(c.value),
                    output::fmt_sig(c.target),
                    output::fmt_sig(c.tolerance),
                );
            }
            if manifest.format.csv() {
                artifacts.add(csv_path.clone(), output::checks_csv(checks));
            }
            if manifest.format.json() {
                artifacts.add(json_path.clone(), json(checks));
            }
            if checks.iter().all(|c| c.passed) { 0 } else { EXIT_NUMERICAL }
        }
    };
    let file = ManifestFile {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: manifest.command,
        seed: config.seed(),
        trials: config.trials(),
        config,
        threads: manifest.threads,
        format: manifest.format,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    artifacts.add(manifest_path, json(&file));
    artifacts.write_all().map_err(|e| io_error(dir, e))?;
    for p in artifacts.paths() {
        println!("wrote {}", p.display());
    }
    Ok(code)
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli.into()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}
