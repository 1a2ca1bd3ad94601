use std::path::PathBuf;
use std::process::ExitCode;

use cat0lab::group::BallCache;
use cat0lab::harness::{run, Command, ExperimentConfig, ModeName};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cat0lab", version, about = "Drift, CAT(0) geometry and fixed-point experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Drift table (n, L^n, running max, L^n/n, stderr) and drift estimate.
    Drift(Common),
    /// Drift bound for a convex combination of convolution powers.
    ConvComb(Common),
    /// Energy descent and orbit circumcenter for an isometric action.
    FixedPoint(Common),
    /// Halving search for points of small displacement.
    Shalom(Common),
    /// Element orders over a word ball of the Grigorchuk group.
    GrigorchukAudit(Common),
    /// Metric axioms, CN inequality and variance inequality on samples.
    SpaceCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the JSON record and CSV series.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, conflicts_with = "monte_carlo")]
    exact: bool,
    #[arg(long)]
    monte_carlo: bool,
    /// Number of Monte Carlo walks or sampled points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Ball cache directory; overrides CAT0LAB_CACHE_DIR.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn execute(command: Command, args: Common) -> cat0lab::Result<i32> {
    let mut config = ExperimentConfig::load(&args.config)?;
    let p = &mut config.params;
    if let Some(seed) = args.seed {
        p.seed = seed;
    }
    if args.exact {
        p.mode = ModeName::Exact;
    }
    if args.monte_carlo {
        p.mode = ModeName::MonteCarlo;
    }
    if args.samples.is_some() {
        p.samples = args.samples;
    }
    if args.tol.is_some() {
        p.tol = args.tol;
    }
    if args.out.is_some() {
        config.output.dir = args.out;
    }
    let cache = args.cache_dir.map(BallCache::new).transpose()?;
    let out = run(command, &config, cache.as_ref())?;
    println!("{}", serde_json::to_string_pretty(&out.record)?);
    for w in &out.record.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = &config.output.dir {
        for path in out.write(dir, config.output.csv.unwrap_or(true))? {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(out.record.status.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Drift(a) => (Command::Drift, a),
        Sub::ConvComb(a) => (Command::ConvComb, a),
        Sub::FixedPoint(a) => (Command::FixedPoint, a),
        Sub::Shalom(a) => (Command::Shalom, a),
        Sub::GrigorchukAudit(a) => (Command::GrigorchukAudit, a),
        Sub::SpaceCheck(a) => (Command::SpaceCheck, a),
    };
    match execute(command, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
