//! `openbook`: classify measures, compute barycenters, sample, and run
//! the law-of-large-numbers and central-limit experiments.
//!
//! Exit status: 0 on success (and all tests passing), 1 if a statistical
//! test fails, 2 on a usage or configuration error.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use openbook::frechet::{barycenter, frechet_objective};
use openbook::io::{read_points_csv, ExperimentConfig, ExperimentMode, MeasureSpec};
use openbook::measures::BookMeasure;
use openbook::rng::{SeedStream, DOMAIN_SAMPLES};
use openbook::simulate::{
    run_clt, run_lln, sample_measure, write_clt_csv, write_lln_csv, write_points_csv, CltConfig,
    LlnConfig,
};
use openbook::stats::DEFAULT_ALPHA;

#[derive(Parser)]
#[command(
    name = "openbook",
    version,
    about = "Fréchet means and limit theorems on open books"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the stickiness verdict, first moments and population mean.
    Classify {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Print the barycenter of a point file and its Fréchet objective.
    Mean {
        #[arg(long)]
        points: PathBuf,
        /// Number of leaves; defaults to the largest leaf index in the file
        /// (at least 3).
        #[arg(long)]
        leaves: Option<usize>,
    },
    /// Draw a sample from a measure as a point file.
    Sample {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write `points.csv` here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Track where the empirical mean sits along growing samples.
    Lln(ExperimentArgs),
    /// Compare rescaled empirical means with the predicted limit law.
    Clt(ExperimentArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    measure: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sample size per replicate (clt).
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated checkpoints (lln).
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Directory for `replicates.csv` and `summary.json`; without it the
    /// summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything an experiment needs, after merging config file and flags.
struct Experiment {
    measure: BookMeasure,
    seed: u64,
    sample_size: Option<usize>,
    checkpoints: Option<Vec<usize>>,
    replicates: usize,
    workers: usize,
    alpha: f64,
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Statistical,
}

impl From<openbook::Error> for Failure {
    fn from(e: openbook::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify { measure } => classify(&measure),
        Command::Mean { points, leaves } => mean(&points, leaves),
        Command::Sample {
            measure,
            n,
            seed,
            out,
        } => sample(&measure, n, seed, out.as_deref()),
        Command::Lln(args) => resolve(args, ExperimentMode::Lln).and_then(lln),
        Command::Clt(args) => resolve(args, ExperimentMode::Clt).and_then(clt),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Statistical) => ExitCode::from(1),
        Err(Failure::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load_measure(path: &Path) -> Result<BookMeasure, Failure> {
    let spec = MeasureSpec::from_path(path)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(spec.build()?)
}

fn print_json<T: Serialize>(value: &T) -> Outcome {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn classify(path: &Path) -> Outcome {
    let measure = load_measure(path)?;
    let c = measure.classify()?;
    let shape = measure.shape();
    print_json(&json!({
        "d": shape.dim(),
        "K": shape.leaves(),
        "verdict": c.verdict.name(),
        "leaf": c.verdict.leaf(),
        "m": c.moments,
        "v": c.leaf_means,
        "w0": c.spine_weight,
        "w": c.leaf_weights,
        "population_mean": measure.population_mean()?,
    }))
}

fn mean(path: &Path, leaves: Option<usize>) -> Outcome {
    let file = File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let sample = read_points_csv(file, leaves)?;
    let b = barycenter(&sample)?;
    let objective = frechet_objective(&b, &sample)?;
    let shape = sample.shape();
    print_json(&json!({
        "d": shape.dim(),
        "K": shape.leaves(),
        "n": sample.len(),
        "barycenter": b,
        "objective": objective,
    }))
}

fn sample(path: &Path, n: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let measure = load_measure(path)?;
    let points = sample_measure(&measure, SeedStream::new(seed).domain(DOMAIN_SAMPLES), n)?;
    let dim = measure.shape().dim();
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let file = BufWriter::new(File::create(dir.join("points.csv"))?);
            write_points_csv(points.points(), dim, file)?;
        }
        None => write_points_csv(points.points(), dim, io::stdout().lock())?,
    }
    Ok(())
}

fn resolve(args: ExperimentArgs, mode: ExperimentMode) -> Result<Experiment, Failure> {
    let config = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::from_path(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            if cfg.mode != mode {
                return Err(Failure::Config(format!(
                    "config {} is for a different subcommand",
                    path.display()
                )));
            }
            Some(cfg)
        }
        None => None,
    };
    let measure = match (&args.measure, &config) {
        (Some(path), _) => load_measure(path)?,
        (None, Some(cfg)) => {
            let base = args.config.as_deref().and_then(Path::parent);
            cfg.measure.load(base)?.build()?
        }
        (None, None) => return Err(Failure::Config("--measure or --config is required".into())),
    };
    let from_config = |f: &dyn Fn(&ExperimentConfig) -> Option<usize>| config.as_ref().and_then(f);
    let replicates = args
        .replicates
        .or_else(|| from_config(&|c| Some(c.replicates)))
        .ok_or_else(|| Failure::Config("--replicates is required".into()))?;
    Ok(Experiment {
        measure,
        seed: args.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0),
        sample_size: args.n.or_else(|| from_config(&|c| c.sample_size)),
        checkpoints: args
            .checkpoints
            .or_else(|| config.as_ref().and_then(|c| c.checkpoints.clone())),
        replicates,
        workers: args
            .workers
            .or_else(|| from_config(&|c| c.workers))
            .unwrap_or(1),
        alpha: args
            .alpha
            .or_else(|| config.as_ref().and_then(|c| c.alpha))
            .unwrap_or(DEFAULT_ALPHA),
        out: args.out,
    })
}

/// Writes the replicate CSV (if an output directory is set) and the summary,
/// then maps the pass flag to the exit status.
fn emit(
    out: Option<&Path>,
    summary: serde_json::Value,
    pass: bool,
    write_csv: impl FnOnce(BufWriter<File>) -> openbook::Result<()>,
) -> Outcome {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_csv(BufWriter::new(File::create(dir.join("replicates.csv"))?))?;
            let mut file = BufWriter::new(File::create(dir.join("summary.json"))?);
            serde_json::to_writer_pretty(&mut file, &summary)?;
            writeln!(file)?;
        }
        None => print_json(&summary)?,
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::Statistical)
    }
}

fn lln(x: Experiment) -> Outcome {
    let checkpoints = x
        .checkpoints
        .ok_or_else(|| Failure::Config("--checkpoints is required for lln".into()))?;
    let mut config = LlnConfig::new(checkpoints, x.replicates);
    config.workers = x.workers;
    let report = run_lln(&x.measure, SeedStream::new(x.seed), &config)?;
    let pass = report.pass();
    let summary = json!({
        "mode": "lln",
        "seed": x.seed,
        "replicates": x.replicates,
        "report": report,
        "pass": pass,
    });
    let dim = x.measure.shape().dim();
    emit(x.out.as_deref(), summary, pass, |w| {
        write_lln_csv(&report, dim, w)
    })
}

fn clt(x: Experiment) -> Outcome {
    let n = x
        .sample_size
        .ok_or_else(|| Failure::Config("--n is required for clt".into()))?;
    let mut config = CltConfig::new(n, x.replicates);
    config.workers = x.workers;
    config.alpha = x.alpha;
    let report = run_clt(&x.measure, SeedStream::new(x.seed), &config)?;
    let pass = report.pass();
    let summary = json!({
        "mode": "clt",
        "seed": x.seed,
        "replicates": x.replicates,
        "alpha": x.alpha,
        "report": report,
        "pass": pass,
    });
    emit(x.out.as_deref(), summary, pass, |w| {
        write_clt_csv(&report, w)
    })
}
