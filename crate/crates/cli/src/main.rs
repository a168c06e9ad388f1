use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fblrelay_cli::config::OutputFormat;
use fblrelay_cli::output::{write_records, Record};
use fblrelay_cli::{apply_overrides, parse_config, select, sweep, validate, CliError, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "fblrelay",
    version,
    about = "Short-packet BLER and duplex-mode analysis for relay links"
)]
struct Cli {
    /// JSON scenario file; omitted fields take their defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Monte Carlo seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo draws per point (0 disables simulation)
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Output file (default: stdout)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Field override such as `ps_dbm=25` or `sweep.step=0.5`; repeatable
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form, asymptotic and simulated BLER along one axis
    BlerSweep,
    /// Minimum frame lengths of both modes against the BLER target
    DelaySweep,
    /// Pick the duplex mode for one BLER target
    Select {
        /// BLER target (default: target_bler from the config)
        #[arg(long)]
        target: Option<f64>,
        /// Also evaluate the closed forms at the implied frame lengths
        #[arg(long)]
        verify: bool,
    },
    /// Cross-check closed forms against quadrature, simulation and asymptotes
    Validate,
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(&path.display().to_string(), &e.to_string()))?;
            parse_config(&text)?
        }
        None => ScenarioConfig::default(),
    };
    let mut cfg = apply_overrides(&base, &cli.overrides)?;
    if let Some(f) = cli.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Jsonl => OutputFormat::Jsonl,
        };
    }
    if let Some(seed) = cli.seed {
        cfg.monte_carlo.seed = seed;
    }
    if let Some(n) = cli.samples {
        cfg.monte_carlo.samples = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("FBLRELAY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config("FBLRELAY_THREADS", "must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(io::Error::other(e)))
}

fn emit(cli: &Cli, format: OutputFormat, records: &[Record]) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_records(&mut w, format, records)?;
            w.flush()?;
        }
        None => write_records(io::stdout().lock(), format, records)?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = load(cli)?;
    log::debug!("scenario: {}", fblrelay_cli::emit_config(&cfg));
    match &cli.command {
        Command::BlerSweep => {
            let rows = sweep::run_bler_sweep(&cfg)?;
            emit(cli, cfg.format, &rows.iter().map(|r| r.record()).collect::<Vec<_>>())
        }
        Command::DelaySweep => {
            let rows = sweep::run_delay_sweep(&cfg)?;
            emit(cli, cfg.format, &rows.iter().map(|r| r.record()).collect::<Vec<_>>())
        }
        Command::Select { target, verify } => {
            let report = select::run_select(&cfg, target.unwrap_or(cfg.target_bler), *verify)?;
            emit(cli, cfg.format, &[report.record()])
        }
        Command::Validate => {
            let report = validate::run_validate(&cfg);
            emit(
                cli,
                cfg.format,
                &report.checks.iter().map(|c| c.record()).collect::<Vec<_>>(),
            )?;
            report.failure().map_or(Ok(()), Err)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fblrelay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
