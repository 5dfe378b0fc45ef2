//! `lppsd`: dominance tests on data files, simulation tables and curve data.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success (whatever the test decision)      |
//! | 2    | bad command line                          |
//! | 3    | input file unreadable                     |
//! | 4    | non-numeric field in an input file        |
//! | 5    | negative or non-finite observation        |
//! | 6    | empty input or malformed paired columns   |
//! | 7    | paired samples of unequal length          |
//! | 8    | invalid parameter, spec or config         |
//! | 9    | numerical failure                         |
//! | 10   | output could not be written               |

mod curves;
mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lppsd_core::sim::{builtin_spec, builtin_specs, standard_tables};
use lppsd_core::{
    ksb3_test, run_experiment, run_test, ExperimentSpec, Ksb3Config, Sample, Sampling, Scheme,
    StatKind, TestConfig, DEFAULT_SEED, FSD_THETA,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: '{text}' is not a number")]
    NonNumeric {
        path: String,
        line: usize,
        text: String,
    },
    #[error("{path}:{line}: observation {value} must be finite and non-negative")]
    BadValue {
        path: String,
        line: usize,
        value: f64,
    },
    #[error("{0}: no observations")]
    Empty(String),
    #[error("{path}:{line}: expected 2 comma-separated columns, found {found}")]
    Columns {
        path: String,
        line: usize,
        found: usize,
    },
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] lppsd_core::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        use lppsd_core::Error as E;
        match self {
            CliError::Read { .. } => 3,
            CliError::NonNumeric { .. } => 4,
            CliError::BadValue { .. } => 5,
            CliError::Empty(_) | CliError::Columns { .. } => 6,
            CliError::Config(_) => 8,
            CliError::Write { .. } => 10,
            CliError::Core(e) => match e {
                E::InvalidObservation { .. } => 5,
                E::EmptySample => 6,
                E::UnpairedSamples { .. } => 7,
                E::Numerical(_) => 9,
                _ => 8,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lppsd",
    version,
    about = "Lorenz P-P plot tests of stochastic dominance"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test H0: X dominates Y on data files and print the outcome as JSON.
    Test(TestArgs),
    /// Run a built-in or custom simulation design and write its rejection table.
    Simulate(SimArgs),
    /// Emit LPP, identity and P-P plot columns for plotting.
    Curves(CurveArgs),
}

#[derive(Args)]
struct TestArgs {
    /// Sample X (one value per line), or both columns with --paired.
    #[arg(long)]
    x: PathBuf,
    /// Sample Y (one value per line).
    #[arg(long)]
    y: Option<PathBuf>,
    /// tinf, t1, tp:<p> or ksb3.
    #[arg(long, default_value = "tinf")]
    stat: String,
    /// Dominance order for ksb3 (defaults to 1 with --fsd, 2 otherwise).
    #[arg(long)]
    order: Option<u8>,
    /// Power transform for the TSD test.
    #[arg(long, conflicts_with = "fsd")]
    theta: Option<f64>,
    /// First-order test (theta = 50).
    #[arg(long)]
    fsd: bool,
    /// Matched pairs: resample whole pairs. Reads two columns from --x when --y is absent.
    #[arg(long)]
    paired: bool,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Bootstrap replicates K.
    #[arg(long, default_value_t = 500)]
    boot: usize,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// KSB3 grid size r.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    /// Include the replicate values in the JSON.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SimArgs {
    /// Built-in design name, a comma-separated list, or `all` for the seventeen tables.
    #[arg(long, conflicts_with = "config", required_unless_present_any = ["config", "list"])]
    spec: Option<String>,
    /// JSON file holding an experiment spec.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the built-in design names and exit.
    #[arg(long)]
    list: bool,
    /// Keep the full settings (500 runs, K = 500, n = 50..1000) unless overridden.
    #[arg(long)]
    full_scale: bool,
    /// Monte Carlo runs per sample size [desk default: 100].
    #[arg(long)]
    runs: Option<usize>,
    /// Bootstrap replicates K [desk default: 200].
    #[arg(long)]
    boot: Option<usize>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, requires = "y", conflicts_with_all = ["dist_f", "dist_g"])]
    x: Option<PathBuf>,
    #[arg(long, requires = "x")]
    y: Option<PathBuf>,
    /// e.g. `weibull:2,1.5`, `exp`, `sm:1.5,1.2`, `lognormal:0.86,0.6` or a JSON object.
    #[arg(long, requires = "dist_g", required_unless_present = "x")]
    dist_f: Option<String>,
    #[arg(long, requires = "dist_f")]
    dist_g: Option<String>,
    /// Number of grid intervals on [0, 1].
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Comma-separated powers, one output block each.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    theta: Vec<f64>,
    /// Quantile-sample size used for population curves.
    #[arg(long, default_value_t = 20_000)]
    resolution: usize,
}

const DESK_RUNS: usize = 100;
const DESK_BOOT: usize = 200;

fn with_pool<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn load_samples(a: &TestArgs) -> Result<(Sample, Sample), CliError> {
    match (&a.y, a.paired) {
        (None, true) => Ok(input::read_pairs(&a.x)?.into_parts()),
        (None, false) => Err(CliError::Config(
            "--y is required unless --paired reads two columns from --x".into(),
        )),
        (Some(y), _) => {
            let xs = input::read_sample(&a.x)?;
            let ys = input::read_sample(y)?;
            if a.paired {
                Scheme::MatchedPairs.check(xs.len(), ys.len())?;
            }
            Ok((xs, ys))
        }
    }
}

fn cmd_test(a: TestArgs) -> Result<(), CliError> {
    let (x, y) = load_samples(&a)?;
    let scheme = if a.paired {
        Scheme::MatchedPairs
    } else {
        Scheme::Independent
    };
    let theta = if a.fsd {
        Some(FSD_THETA)
    } else {
        a.theta.filter(|&t| t != 1.0)
    };
    let outcome = if a.stat.trim().eq_ignore_ascii_case("ksb3") {
        let order = a.order.unwrap_or(if a.fsd { 1 } else { 2 });
        let cfg = Ksb3Config {
            order,
            grid_size: a.grid,
            alpha: a.alpha,
            replicates: a.boot,
            scheme,
            seed: a.seed,
        };
        with_pool(a.workers, || ksb3_test(&x, &y, &cfg))??
    } else {
        let stat: StatKind = a.stat.parse()?;
        let cfg = TestConfig {
            stat,
            alpha: a.alpha,
            replicates: a.boot,
            eps: a.eps,
            theta,
            scheme,
            seed: a.seed,
            ..Default::default()
        };
        with_pool(a.workers, || run_test(&x, &y, &cfg))??
    };
    println!("{}", outcome.to_json(a.trace));
    Ok(())
}

fn resolve_specs(a: &SimArgs) -> Result<Vec<ExperimentSpec>, CliError> {
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.display().to_string(),
            source: e,
        })?;
        let spec: ExperimentSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: invalid spec: {e}", path.display())))?;
        return Ok(vec![spec]);
    }
    let names = a.spec.as_deref().unwrap_or_default();
    if names == "all" {
        return Ok(standard_tables());
    }
    names
        .split(',')
        .map(|n| {
            builtin_spec(n.trim()).ok_or_else(|| {
                CliError::Config(format!("unknown spec '{}' (see --list)", n.trim()))
            })
        })
        .collect()
}

fn cmd_simulate(a: SimArgs) -> Result<(), CliError> {
    if a.list {
        for s in builtin_specs() {
            let mut line = format!("{}\t{} vs {}", s.name, s.f.label(), s.g.label());
            if let Sampling::Paired { rho } = s.sampling {
                line += &format!(", paired rho={rho}");
            }
            if let Some(t) = s.theta {
                line += &format!(", theta={t}");
            }
            println!("{line}");
        }
        return Ok(());
    }
    let from_config = a.config.is_some();
    let specs = resolve_specs(&a)?;
    fs::create_dir_all(&a.out).map_err(|e| CliError::Write {
        path: a.out.display().to_string(),
        source: e,
    })?;
    for spec in specs {
        let (runs, boot) = if a.full_scale || from_config {
            (a.runs, a.boot)
        } else {
            (
                Some(a.runs.unwrap_or(DESK_RUNS)),
                Some(a.boot.unwrap_or(DESK_BOOT)),
            )
        };
        let mut spec = spec.with_scale(runs, boot, a.n.clone());
        if let Some(seed) = a.seed {
            spec.master_seed = seed;
        }
        eprintln!(
            "running {} ({} runs, K = {}, n = {:?})",
            spec.name, spec.mc_runs, spec.replicates, spec.n_list
        );
        let table = with_pool(a.workers, || run_experiment(&spec))??;
        let stem = a.out.join(spec.file_stem());
        for (ext, body) in [("csv", table.to_csv()), ("json", table.to_json())] {
            let path = stem.with_extension(ext);
            fs::write(&path, body).map_err(|e| CliError::Write {
                path: path.display().to_string(),
                source: e,
            })?;
        }
        eprintln!(
            "{} done in {:.1}s -> {}",
            spec.name,
            table.runtime_secs,
            stem.with_extension("csv").display()
        );
        println!("# {}", spec.name);
        print!("{}", table.to_csv());
    }
    Ok(())
}

fn cmd_curves(a: CurveArgs) -> Result<(), CliError> {
    if a.grid == 0 {
        return Err(CliError::Config("--grid must be positive".into()));
    }
    let csv = match (&a.x, &a.y, &a.dist_f, &a.dist_g) {
        (Some(x), Some(y), _, _) => curves::sample_curves(
            &input::read_sample(x)?,
            &input::read_sample(y)?,
            &a.theta,
            a.grid,
        )?,
        (_, _, Some(f), Some(g)) => curves::dist_curves(
            &curves::parse_dist(f)?,
            &curves::parse_dist(g)?,
            &a.theta,
            a.grid,
            a.resolution.max(1),
        )?,
        _ => return Err(CliError::Config("give --x/--y or --dist-f/--dist-g".into())),
    };
    print!("{csv}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Curves(a) => cmd_curves(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
