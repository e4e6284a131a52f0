use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use kglab::config::{Command, ExperimentConfig, Format};
use kglab::experiments::{read_report, render_report, run};
use kglab::Error;

/// Klein-Gordon causality laboratory.
#[derive(Parser)]
#[command(name = "kglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bulk output format; overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Sub {
    /// Cauchy evolution with light-cone, energy and boundary checks.
    Evolve(RunArgs),
    /// Positive-frequency spreading and Compton tails.
    Hegerfeldt(RunArgs),
    /// Commutator function slices, support scan and bridge identity.
    Propagator(RunArgs),
    /// Render a JSON run report as a table.
    Report {
        /// Report written by one of the run commands.
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn fail(e: &Error) -> ExitCode {
    let mut body = json!({ "error": e.kind(), "message": e.to_string() });
    if let Error::Config { field, rule } = e {
        body["field"] = json!(field);
        body["rule"] = json!(rule);
    }
    eprintln!("{body}");
    ExitCode::from(EXIT_ERROR)
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("KGLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        raw.trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::Config {
                field: "KGLAB_THREADS".into(),
                rule: format!("positive integer, got {raw:?}"),
            })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Io(e.to_string()))
}

fn execute(command: Command, args: RunArgs) -> Result<bool, Error> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let out = args
        .out
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Config {
            field: "output.dir".into(),
            rule: "required unless --out is given".into(),
        })?;
    let format = args.format.unwrap_or(cfg.output.format);
    let report = run(command, &cfg, &out, format)?;
    print!("{}", render_report(&report));
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let outcome = match cli.command {
        Sub::Evolve(a) => execute(Command::Evolve, a),
        Sub::Hegerfeldt(a) => execute(Command::Hegerfeldt, a),
        Sub::Propagator(a) => execute(Command::Propagator, a),
        Sub::Report { config } => read_report(&config).map(|r| {
            print!("{}", render_report(&r));
            r.pass
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => fail(&e),
    }
}
