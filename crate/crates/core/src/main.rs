use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hofer_forge::scenario::{self, ConfigFile, Header, OutputFormat, ScenarioKind};
use hofer_forge::Error;

/// Hofer-length lab: runs one scenario and writes a JSON report (or a CSV
/// plot table). Exit status: 0 all checks pass, 1 a check failed, 2 bad
/// configuration.
#[derive(Parser)]
#[command(name = "hofer-forge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generator-calculus oracle on random quadratic-affine inputs.
    CalculusCheck(Flags),
    /// Disc disjoiner: landing, exterior support and area audit.
    Disjoin(Flags),
    /// Shortening pipeline: ℓ₊ along the deformation path.
    Shorten(Flags),
    /// Index: Hessian of the block length at the origin.
    Index(Flags),
    /// Hofer length of the circle action, optionally deformed.
    Length(Flags),
}

#[derive(Args)]
struct Flags {
    /// Flat TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
    /// Odd number of time nodes.
    #[arg(long)]
    tnodes: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated weights, e.g. 3,1.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<u32>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    a: Option<u32>,
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    area: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "eps-bar")]
    eps_bar: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
}

impl Flags {
    fn overrides(self, kind: ScenarioKind) -> ConfigFile {
        ConfigFile {
            kind: Some(kind),
            weights: self.weights,
            alpha: self.alpha,
            d: self.d,
            a: self.a,
            b: self.b,
            area: self.area,
            eps: self.eps,
            eps_bar: self.eps_bar,
            delta: self.delta,
            lambda: self.lambda,
            grid: self.grid,
            t_nodes: self.tnodes,
            steps: self.steps,
            samples: self.samples,
            seed: self.seed,
            format: self.format.map(|f| if f == "csv" { OutputFormat::Csv } else { OutputFormat::Json }),
            out: self.out,
        }
    }
}

fn config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidParameter(_)
            | Error::DisjoinConfig(_)
            | Error::Containment(_)
            | Error::DimensionMismatch { .. }
            | Error::DCondition { .. }
    )
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HOFER_FORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("HOFER_FORGE_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Err(e) = hofer_forge::flows::sign_convention_self_test() {
        eprintln!("error: sign-convention self-test failed: {e}");
        return ExitCode::from(1);
    }
    let (kind, flags) = match cli.command {
        Command::CalculusCheck(f) => (ScenarioKind::CalculusCheck, f),
        Command::Disjoin(f) => (ScenarioKind::Disjoin, f),
        Command::Shorten(f) => (ScenarioKind::Shorten, f),
        Command::Index(f) => (ScenarioKind::Index, f),
        Command::Length(f) => (ScenarioKind::Length, f),
    };
    let base = match &flags.config {
        Some(p) => match ConfigFile::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ConfigFile::default(),
    };
    let cfg = match base.merge(&flags.overrides(kind)).resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let outcome = match scenario::run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(if config_error(&e) { 2 } else { 1 });
        }
    };
    let header = Header::now(start.elapsed().as_secs_f64(), outcome.table.as_ref());
    let written = match &cfg.out {
        Some(path) => scenario::emit(&outcome, &header, cfg.format, path).map(|paths| {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }),
        None => match cfg.format {
            OutputFormat::Json => Ok(print!("{}", scenario::to_json(&outcome, &header))),
            OutputFormat::Csv => scenario::to_csv(&outcome).map(|s| print!("{s}")),
        },
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    for c in &outcome.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
