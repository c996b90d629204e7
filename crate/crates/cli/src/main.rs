//! `ressize`: size renewable capacity for a scenario, sweep share targets
//! and tabulate generation mixes.
//!
//! Exit codes: 0 success, 2 infeasible, 3 invalid input, 4 solver failure.

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ressize_core::formulation::{build_lp, size_scenario, write_mps, SizingError};
use ressize_core::io::{
    read_dispatch_csv, read_scenario, read_sizing_json, resample_scenario, write_results,
    DISPATCH_FILE, SIZING_FILE,
};
use ressize_core::solver::{LpStatus, SolverOptions};
use ressize_core::sweep::{
    aggregate_dispatch, allocate_to_buses, alpha_grid, normalize_costs, sweep_alpha,
    write_bus_csv, write_mix_csv, write_sweep_csv, Granularity, PointStatus,
};
use ressize_core::{validate_scenario, ValidatedScenario};

#[derive(Parser)]
#[command(name = "ressize", version, about)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print its size.
    Validate { scenario: PathBuf },
    /// Size one scenario and write sizing.json, dispatch.csv and curtailment.csv.
    Solve {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Average every N steps before solving.
        #[arg(long)]
        resample: Option<NonZeroUsize>,
        /// Override the scenario's renewable share target.
        #[arg(long)]
        alpha: Option<f64>,
        /// Also export the LP in free MPS format.
        #[arg(long)]
        mps: Option<PathBuf>,
    },
    /// Solve over a grid of share targets and write sweep.csv.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        alpha_start: f64,
        #[arg(long)]
        alpha_end: f64,
        #[arg(long)]
        alpha_step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Scenario whose costs normalize this one, on the same grid.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        resample: Option<NonZeroUsize>,
    },
    /// Aggregate a solved dispatch into mix_<granularity>.csv.
    Report {
        results: PathBuf,
        #[arg(long, default_value = "daily")]
        granularity: Granularity,
    },
    /// Download hourly capacity factors into a local cache.
    #[cfg(feature = "fetch")]
    Fetch {
        #[arg(long, allow_hyphen_values = true)]
        lat: f64,
        #[arg(long, allow_hyphen_values = true)]
        lon: f64,
        #[arg(long)]
        year: i32,
        /// pv or wind
        #[arg(long)]
        technology: String,
        #[arg(long, default_value = "cache")]
        cache: PathBuf,
    },
}

/// Error with its exit code.
struct Failure(u8, String);

const INFEASIBLE: u8 = 2;
const CONFIG: u8 = 3;
const SOLVER: u8 = 4;

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure(CONFIG, e.to_string())
}

fn load(path: &Path, resample: Option<NonZeroUsize>) -> Result<ValidatedScenario, Failure> {
    let mut cfg = read_scenario(path).map_err(config)?;
    if let Some(f) = resample {
        cfg = resample_scenario(&cfg, f).map_err(config)?;
    }
    validate_scenario(cfg).map_err(config)
}

fn solver_failure(e: SizingError) -> Failure {
    Failure(SOLVER, e.to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let opts = SolverOptions::default();
    match cli.command {
        Command::Validate { scenario } => {
            let s = load(&scenario, None)?;
            let lp = build_lp(&s);
            println!(
                "{}: {} steps of {} h, {} plants, {} variables, {} rows",
                s.name,
                s.horizon(),
                s.step_hours(),
                s.plants().len(),
                lp.num_vars,
                lp.num_rows()
            );
            Ok(())
        }
        Command::Solve {
            scenario,
            out,
            resample,
            alpha,
            mps,
        } => {
            let mut s = load(&scenario, resample)?;
            if let Some(a) = alpha {
                s = s.with_alpha(a).map_err(config)?;
            }
            if let Some(p) = mps {
                let file = fs::File::create(&p).map_err(|e| config(format!("{}: {e}", p.display())))?;
                write_mps(&build_lp(&s), &s.name, std::io::BufWriter::new(file))
                    .map_err(|e| config(format!("{}: {e}", p.display())))?;
            }
            let r = size_scenario(&s, &opts).map_err(solver_failure)?;
            write_results(&r, &out).map_err(config)?;
            if let (Some(alloc), LpStatus::Optimal) = (&s.bus_allocation, r.status) {
                let table = allocate_to_buses(&r, alloc).map_err(config)?;
                write_bus_csv(&table, &out.join("buses.csv")).map_err(config)?;
            }
            match r.status {
                LpStatus::Optimal => {
                    let cost = r.cost.map(|c| c.total).unwrap_or(0.0);
                    println!("{}: optimal, total cost {cost:.6e}", s.name);
                    for c in r.capacities.iter().filter(|c| !c.fixed) {
                        println!("  {:<16} {:>12.3} MW", c.name, c.capacity_mw);
                    }
                    Ok(())
                }
                LpStatus::Infeasible => Err(Failure(
                    INFEASIBLE,
                    format!("{}: infeasible at alpha {}", s.name, s.alpha),
                )),
                LpStatus::Unbounded => Err(Failure(SOLVER, format!("{}: unbounded", s.name))),
            }
        }
        Command::Sweep {
            scenario,
            alpha_start,
            alpha_end,
            alpha_step,
            out,
            base,
            jobs,
            resample,
        } => {
            let s = load(&scenario, resample)?;
            let alphas = alpha_grid(alpha_start, alpha_end, alpha_step).map_err(config)?;
            let base = base.map(|b| load(&b, resample)).transpose()?;
            fs::create_dir_all(&out).map_err(|e| config(format!("{}: {e}", out.display())))?;
            let mut report = sweep_alpha(&s, &alphas, &opts, jobs).map_err(config)?;
            if let Some(b) = base {
                let base_report = sweep_alpha(&b, &alphas, &opts, jobs).map_err(config)?;
                write_sweep_csv(&base_report, &out.join("base_sweep.csv")).map_err(config)?;
                report = normalize_costs(&report, &base_report).map_err(config)?;
            }
            write_sweep_csv(&report, &out.join("sweep.csv")).map_err(config)?;
            for r in &report.rows {
                println!("alpha {:<8} {}", r.alpha, r.status.as_str());
            }
            if report.rows.iter().any(|r| r.status == PointStatus::Failed) {
                log::warn!("some sweep points failed; see sweep.csv");
            }
            Ok(())
        }
        Command::Report {
            results,
            granularity,
        } => {
            let summary = read_sizing_json(&results.join(SIZING_FILE)).map_err(config)?;
            if summary.status != LpStatus::Optimal {
                return Err(Failure(
                    INFEASIBLE,
                    format!("{}: no dispatch (status {:?})", results.display(), summary.status),
                ));
            }
            let d = read_dispatch_csv(&results.join(DISPATCH_FILE), &summary.capacities)
                .map_err(config)?;
            let table = aggregate_dispatch(&d, granularity);
            let name = match granularity {
                Granularity::Hourly => "mix_hourly.csv",
                Granularity::Daily => "mix_daily.csv",
                Granularity::Monthly => "mix_monthly.csv",
            };
            write_mix_csv(&table, &results.join(name)).map_err(config)?;
            println!("{}: {} periods", results.join(name).display(), table.rows.len());
            Ok(())
        }
        #[cfg(feature = "fetch")]
        Command::Fetch {
            lat,
            lon,
            year,
            technology,
            cache,
        } => {
            use ressize_core::io::{fetch_resource, FetchRequest, NinjaProvider};
            use ressize_core::scenario::RenewableTech;
            let technology = match technology.as_str() {
                "pv" => RenewableTech::Pv,
                "wind" => RenewableTech::Wind,
                t => return Err(config(format!("unknown technology {t:?} (pv, wind)"))),
            };
            let req = FetchRequest {
                lat,
                lon,
                year,
                technology,
            };
            let cached = cache.join(req.cache_name());
            let ts = if cached.exists() {
                fetch_resource(&req, &NoNetwork, &cache)
            } else {
                let provider = NinjaProvider::from_env().map_err(config)?;
                fetch_resource(&req, &provider, &cache)
            }
            .map_err(config)?;
            println!("{}: {} hourly values", cached.display(), ts.len());
            Ok(())
        }
    }
}

#[cfg(feature = "fetch")]
struct NoNetwork;

#[cfg(feature = "fetch")]
impl ressize_core::io::ResourceProvider for NoNetwork {
    fn hourly_capacity_factors(
        &self,
        _: &ressize_core::io::FetchRequest,
    ) -> Result<Vec<f64>, ressize_core::io::FetchError> {
        Err(ressize_core::io::FetchError::Network("cache miss".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
