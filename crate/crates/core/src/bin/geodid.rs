//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (arguments, manifest, data or
//! simulation config), 3 estimation failure. Errors are written to stderr
//! as a JSON object; stdout carries only the result document.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use geodid::io::{gatt_json, load_panel, staggered_json, LoadError, SCHEMA_VERSION};
use geodid::simulate::{run_monte_carlo, DgpParams, SimConfig, SimSpace};
use geodid::staggered::{default_form, estimate_all_cells, Comparison, EstimatorForm};
use geodid::{estimate_gatt, placebo_pretrend, Error};

const EXIT_INPUT: u8 = 2;
const EXIT_ESTIMATION: u8 = 3;

#[derive(Parser)]
#[command(name = "geodid", version, about = "Geodesic difference-in-differences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ComparisonArg {
    Never,
    Notyet,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Wasserstein,
    Network,
}

#[derive(Subcommand)]
enum Command {
    /// Two-period GATT estimate.
    Estimate {
        #[arg(long)]
        manifest: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pre-trend placebo between two untreated periods.
    Placebo {
        #[arg(long)]
        manifest: PathBuf,
        /// Two untreated periods, e.g. `0,1`.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        pre_periods: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Group-time effects for every admissible cell.
    Staggered {
        #[arg(long)]
        manifest: PathBuf,
        /// Anticipation horizon.
        #[arg(long, default_value_t = 0)]
        delta: usize,
        #[arg(long, value_enum, default_value = "never")]
        comparison: ComparisonArg,
        /// Use the step-by-step recursion even where a shortcut exists.
        #[arg(long)]
        force_recursive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo convergence study.
    Simulate(SimulateArgs),
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    space: SpaceArg,
    /// Sample sizes, e.g. `50,200,1000`.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Monte Carlo runs per sample size.
    #[arg(long, default_value_t = 500)]
    q: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    treat_prob: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha1: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha2: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha3: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Draws per outcome distribution (wasserstein).
    #[arg(long, default_value_t = 100)]
    samples_per_dist: usize,
    /// Quantile grid size (wasserstein).
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    #[arg(long, default_value_t = 5)]
    m1: usize,
    #[arg(long, default_value_t = 5)]
    m2: usize,
    #[arg(long, default_value_t = 0.5)]
    p11: f64,
    #[arg(long, default_value_t = 0.2)]
    p12: f64,
    #[arg(long, default_value_t = 0.2)]
    p21: f64,
    #[arg(long, default_value_t = 0.5)]
    p22: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `(n, run, seed, error)` rows as CSV.
    #[arg(long)]
    errors_csv: Option<PathBuf>,
}

struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn input(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            body: json!({ "error": kind, "message": message.into() }),
        }
    }

    fn estimation(err: Error) -> Self {
        let code = match err {
            Error::InvalidConfig(_) => EXIT_INPUT,
            _ => EXIT_ESTIMATION,
        };
        let kind = if code == EXIT_INPUT { "invalid_config" } else { "estimation" };
        Failure {
            code,
            body: json!({ "error": kind, "message": err.to_string() }),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(err: LoadError) -> Self {
        Failure {
            code: EXIT_INPUT,
            body: err.to_json(),
        }
    }
}

fn emit(doc: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(doc).expect("result serializes") + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input("io", format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let space = match args.space {
        SpaceArg::Wasserstein => SimSpace::Wasserstein,
        SpaceArg::Network => SimSpace::Network,
    };
    let base = SimConfig {
        space,
        n: 0,
        q: args.q,
        treat_prob: args.treat_prob,
        seed: args.seed,
        dgp: DgpParams {
            alpha1: args.alpha1,
            alpha2: args.alpha2,
            alpha3: args.alpha3,
            beta: args.beta,
            sample_size_per_dist: args.samples_per_dist,
            m1: args.m1,
            m2: args.m2,
            p11: args.p11,
            p12: args.p12,
            p21: args.p21,
            p22: args.p22,
        },
        grid_size: args.grid_size,
    };
    let report = run_monte_carlo(&base.for_sizes(&args.n)).map_err(Failure::estimation)?;
    if let Some(path) = &args.errors_csv {
        let file = fs::File::create(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
        report
            .write_errors_csv(file)
            .map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
    }
    let mut doc = json!({ "schema_version": SCHEMA_VERSION, "command": "simulate" });
    if let (Value::Object(d), Value::Object(r)) = (&mut doc, serde_json::to_value(&report).expect("report serializes")) {
        d.extend(r);
    }
    emit(&doc, args.out.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Estimate { manifest, out } => {
            let panel = load_panel(&manifest)?;
            let estimate = estimate_gatt(&panel).map_err(Failure::estimation)?;
            emit(&gatt_json("estimate", panel.space(), &estimate), out.as_deref())
        }
        Command::Placebo {
            manifest,
            pre_periods,
            out,
        } => {
            let [a, b] = pre_periods[..] else {
                return Err(Failure::input("usage", "--pre-periods takes exactly two periods, e.g. 0,1"));
            };
            let panel = load_panel(&manifest)?;
            let estimate = placebo_pretrend(&panel, a, b).map_err(Failure::estimation)?;
            let mut doc = gatt_json("placebo", panel.space(), &estimate);
            doc["pre_periods"] = json!([a, b]);
            emit(&doc, out.as_deref())
        }
        Command::Staggered {
            manifest,
            delta,
            comparison,
            force_recursive,
            out,
        } => {
            let panel = load_panel(&manifest)?;
            let comparison = match comparison {
                ComparisonArg::Never => Comparison::NeverTreated,
                ComparisonArg::Notyet => Comparison::NotYetTreated,
            };
            let form = if force_recursive {
                EstimatorForm::Recursive
            } else {
                default_form(&panel)
            };
            let results = estimate_all_cells(&panel, delta, comparison, form);
            emit(&staggered_json(panel.space(), delta, &results), out.as_deref())
        }
        Command::Simulate(args) => simulate(&args),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("GEODID_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::input("usage", format!("GEODID_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::input("usage", e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = Failure::input("usage", e.to_string().trim_end());
            eprintln!("{}", failure.body);
            return ExitCode::from(failure.code);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.body);
            ExitCode::from(failure.code)
        }
    }
}
