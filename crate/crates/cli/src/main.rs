use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rmf_lab::bounds::{self, BoundInputs};
use rmf_lab::distances::{kkw_check, SampleSet};
use rmf_lab::harness::{self, ExperimentConfig, Format};
use rmf_lab::quadruples;
use rmf_lab::{IntervalTable, LabError};

#[derive(Parser)]
#[command(name = "rmf-lab", version, about = "Random multiplicative functions on short intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample W over seeded trials and report moments, distances and bounds.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Directory for report.json, trials.csv and histogram.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of json, csv, histogram.
        #[arg(long, value_delimiter = ',', default_value = "json")]
        format: Vec<Format>,
        /// Also count square quadruples for the exact fourth moment.
        #[arg(long)]
        exact: bool,
        /// Leave timings out so reports are byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Exact fourth moment by counting square quadruples.
    Moments {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Count square quadruples, optionally cross-checked against the oracle.
    Quadruples {
        #[command(flatten)]
        interval: IntervalArgs,
        #[arg(long)]
        oracle: bool,
        /// Loop-iteration budget for the parametrized count.
        #[arg(long, default_value_t = quadruples::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Exact identity, conditional-moment and decomposition checks.
    Stein {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate the bound formulas.
    Bounds {
        #[command(flatten)]
        interval: IntervalArgs,
        /// Square-free count; sieved from the interval when omitted.
        #[arg(long)]
        s: Option<u64>,
        #[arg(long)]
        z: Option<f64>,
    },
    /// Kolmogorov and Wasserstein distances of a sample from N(0,1).
    Distances {
        /// One value per line, or a trials CSV; `-` reads stdin.
        #[arg(long, default_value = "-")]
        input: PathBuf,
    },
}

#[derive(Args, Clone)]
struct IntervalArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, conflicts_with = "delta", required_unless_present = "delta")]
    y: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    interval: IntervalArgs,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, env = "RMF_LAB_WORKERS", default_value_t = 1)]
    workers: usize,
}

impl RunArgs {
    fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.interval.x, 0);
        c.y = self.interval.y;
        c.delta = self.interval.delta;
        c.trials = self.trials;
        c.master_seed = self.seed;
        c.z_override = self.z;
        c.workers = self.workers;
        c
    }
}

fn interval_config(a: &IntervalArgs) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(a.x, 0);
    c.y = a.y;
    c.delta = a.delta;
    c
}

fn print_json<T: Serialize>(value: &T) -> rmf_lab::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn warn_if_outside(config: &ExperimentConfig) {
    if let Some(w) = config.range_warning() {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct QuadrupleCount {
    #[serde(flatten)]
    fourth: quadruples::FourthMoment,
    oracle_total: Option<u64>,
    prop31: f64,
}

#[derive(Serialize)]
struct BoundReport {
    x: u64,
    y: u64,
    s_count: u64,
    delta: f64,
    z: f64,
    theorem_terms: [f64; 3],
    theorem: f64,
    corollary_terms: [f64; 3],
    corollary: f64,
    prop31: f64,
    est3: f64,
    goal: f64,
}

fn read_sample(input: &PathBuf) -> rmf_lab::Result<Vec<f64>> {
    let mut text = String::new();
    if input.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(input)?;
    }
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if i == 0 => {}
            Err(_) => return Err(LabError::Domain(format!("line {}: not a number: {line:?}", i + 1))),
        }
    }
    Ok(values)
}

fn run(cli: Cli) -> rmf_lab::Result<()> {
    match cli.command {
        Command::Simulate { run, out, format, exact, no_timing } => {
            let mut config = run.config();
            config.formats = format;
            config.exact_fourth = exact;
            config.record_timing = !no_timing;
            config.output_path = out;
            warn_if_outside(&config);
            let sim = harness::run_simulate(&config)?;
            match &config.output_path {
                Some(dir) => {
                    for p in harness::emit(&sim, &config.formats, dir)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => print!("{}", sim.report.to_json()),
            }
            Ok(())
        }
        Command::Moments { run } => {
            let config = run.config();
            warn_if_outside(&config);
            print_json(&harness::run_moments(&config)?)
        }
        Command::Quadruples { interval, oracle, budget } => {
            let r = interval_config(&interval).resolved()?;
            let table = IntervalTable::segmented_factorize(r.x, r.y)?;
            let fourth = quadruples::fourth_moment_exact(&table, budget)?;
            let oracle_total = if oracle { Some(quadruples::oracle_count_square_quadruples(&table)?) } else { None };
            if oracle_total.is_some_and(|t| t != fourth.total) {
                return Err(LabError::Contract(format!(
                    "oracle total {} differs from parametrized total {}",
                    oracle_total.unwrap_or_default(),
                    fourth.total
                )));
            }
            print_json(&QuadrupleCount { fourth, oracle_total, prop31: bounds::prop31_bound(r.x, r.delta) })
        }
        Command::Stein { run } => {
            let config = run.config();
            warn_if_outside(&config);
            print_json(&harness::run_stein_checks(&config)?)
        }
        Command::Bounds { interval, s, z } => {
            let mut config = interval_config(&interval);
            config.z_override = z;
            warn_if_outside(&config);
            let r = config.resolved()?;
            let s_count = match s {
                Some(s) => s,
                None => IntervalTable::segmented_factorize(r.x, r.y)?.squarefree_count(),
            };
            let b = BoundInputs::<f64>::new(r.x, r.y, s_count)?.with_z(r.z);
            print_json(&BoundReport {
                x: r.x,
                y: r.y,
                s_count,
                delta: r.delta,
                z: r.z,
                theorem_terms: bounds::theorem_terms(&b),
                theorem: bounds::theorem_bound(&b),
                corollary_terms: bounds::corollary_terms(&b),
                corollary: bounds::corollary_bound(&b),
                prop31: bounds::prop31_bound(r.x, r.delta),
                est3: bounds::est3_bound(r.x, r.y, r.z),
                goal: bounds::goal_bound(r.x, r.delta, r.z),
            })
        }
        Command::Distances { input } => {
            let sample = SampleSet::new(read_sample(&input)?)?;
            print_json(&kkw_check(&sample))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
