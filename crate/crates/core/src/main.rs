use clap::{Parser, ValueEnum};
use fracbern::cli::{self, Experiment, Format, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, ValueEnum)]
enum Command {
    KernelNorms,
    BernsteinSweep,
    WeightsCheck,
    Cubature,
    ApproxLp,
    Embedding,
}

/// Runs a numerical experiment and writes a CSV or JSON report.
///
/// Settings come from an optional flat `key = value` config file and are
/// overridden by flags. Lists are comma separated; n runs over powers of two.
#[derive(Parser)]
#[command(name = "fracbern", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sphere dimension; only 3 is supported.
    #[arg(long)]
    d: Option<String>,
    /// Jacobi alpha values.
    #[arg(long)]
    alpha: Option<String>,
    /// Jacobi beta values.
    #[arg(long)]
    beta: Option<String>,
    /// Integrability exponents p.
    #[arg(long)]
    p: Option<String>,
    /// Smoothness order; decay exponent of the test function for approx-lp.
    #[arg(long)]
    r: Option<String>,
    /// Target exponents for embedding.
    #[arg(long)]
    q: Option<String>,
    /// Smallest n (a power of two).
    #[arg(long)]
    n_min: Option<String>,
    /// Largest n (a power of two).
    #[arg(long)]
    n_max: Option<String>,
    /// unit or power:a1,a2,a3
    #[arg(long)]
    weight: Option<String>,
    /// zonal-extremal or random-coefficients
    #[arg(long)]
    ensemble: Option<String>,
    /// Random draws per n.
    #[arg(long)]
    draws: Option<String>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<String>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    tol: Option<String>,
    /// Grid oversampling factor.
    #[arg(long)]
    oversample: Option<String>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Directory of cached run records keyed by config hash.
    #[arg(long)]
    cache_dir: Option<String>,
}

fn experiment(c: Command) -> Experiment {
    match c {
        Command::KernelNorms => Experiment::KernelNorms,
        Command::BernsteinSweep => Experiment::BernsteinSweep,
        Command::WeightsCheck => Experiment::WeightsCheck,
        Command::Cubature => Experiment::Cubature,
        Command::ApproxLp => Experiment::ApproxLp,
        Command::Embedding => Experiment::Embedding,
    }
}

fn build(args: &Args) -> fracbern::Result<RunConfig> {
    let mut cfg = RunConfig::new(experiment(args.command));
    if let Some(path) = &args.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        cfg.experiment = experiment(args.command);
    }
    let flags = [
        ("d", &args.d),
        ("alpha", &args.alpha),
        ("beta", &args.beta),
        ("p", &args.p),
        ("r", &args.r),
        ("q", &args.q),
        ("n-min", &args.n_min),
        ("n-max", &args.n_max),
        ("weight", &args.weight),
        ("ensemble", &args.ensemble),
        ("draws", &args.draws),
        ("seed", &args.seed),
        ("tol", &args.tol),
        ("oversample", &args.oversample),
        ("out", &args.out),
        ("format", &args.format),
        ("cache-dir", &args.cache_dir),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let run = || -> fracbern::Result<()> {
        let cfg = build(&args)?;
        let rec = cli::run_experiment(&cfg)?;
        let body = cli::emit_report(&rec, cfg.format, cfg.out.as_deref())?;
        if cfg.out.is_none() {
            print!("{body}");
        }
        if cfg.format == Format::Csv {
            eprintln!("config hash {} ({:.2}s{})", rec.config_hash, rec.wall_time_s, if rec.cache_hit { ", cached" } else { "" });
        }
        Ok(())
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracbern: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
