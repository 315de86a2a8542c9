use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use migrant_ge::calibration::{calibrate_year, CalibrationInputs};
use migrant_ge::counterfactual::{run_scenario, Scenario};
use migrant_ge::estimation::{estimate, EstimationConfig};
use migrant_ge::io::{
    load_year_inputs, read_json_file, write_json_file, write_report, write_solution, RunManifest,
    YearReport, SCHEMA_VERSION,
};
use migrant_ge::pipeline::run_pipeline;
use migrant_ge::selftest::run_selftest;
use migrant_ge::{solve_equilibrium, Economy, SolverConfig, TasteConfig};

type Res<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "migrant-ge",
    version,
    about = "Search-and-matching immigration model"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// External calibration of one year of raw inputs (JSON in, JSON out).
    Calibrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the steady state of an economy JSON.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Estimate the free parameters for one year of a yearly input CSV.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        year: Option<i32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run scenarios on an economy JSON and write delta tables.
    Counterfactual {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "low_skilled_inflow")]
        scenario: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        year: i32,
    },
    /// Run the full pipeline described by a manifest.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        year: Vec<i32>,
        #[arg(long, value_delimiter = ',')]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        scenario: Vec<String>,
    },
    /// Run the invariant suite on random economies.
    Selftest {
        #[arg(long, default_value_t = 100)]
        draws: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn economy_at(path: &Path, epsilon: Option<f64>) -> Res<Economy> {
    let mut eco: Economy = read_json_file(path)?;
    if let Some(eps) = epsilon {
        eco.taste = eco.taste.at_epsilon(eps)?;
    }
    Ok(eco)
}

fn run(cmd: Cmd) -> Res<bool> {
    match cmd {
        Cmd::Calibrate { input, out } => {
            let inp: CalibrationInputs = read_json_file(&input)?;
            let ext = calibrate_year(&inp)?;
            write_json_file(&out, &ext)?;
            log::info!("calibration for {} written to {}", inp.year, out.display());
            Ok(true)
        }
        Cmd::Solve {
            input,
            out,
            epsilon,
        } => {
            let eco = economy_at(&input, epsilon)?;
            let sol = solve_equilibrium(&eco, &SolverConfig::default())?;
            write_solution(&out, &eco, &sol)?;
            println!(
                "residual {:.3e} after {} iterations",
                sol.residual_norm, sol.iterations
            );
            Ok(true)
        }
        Cmd::Estimate {
            input,
            out,
            year,
            seed,
            epsilon,
        } => {
            let bundles = load_year_inputs(&input)?;
            let bundle = match year {
                Some(y) => bundles
                    .into_iter()
                    .find(|b| b.year == y)
                    .ok_or(format!("year {y} not in input"))?,
                None => bundles.into_iter().next().ok_or("empty input")?,
            };
            let taste = match epsilon {
                Some(e) => TasteConfig::with_epsilon(e)?,
                None => TasteConfig::default(),
            };
            let mut cfg = EstimationConfig::default();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let r = estimate(&bundle.moments, &bundle.calibrated, &taste, &cfg)?;
            write_json_file(&out, &r)?;
            for m in &r.moment_errors {
                println!(
                    "{:<18} {:>12.6} {:>12.6} {:>8.3}%",
                    m.name,
                    m.target,
                    m.simulated,
                    100.0 * m.relative_error
                );
            }
            println!("objective {:.3e}", r.objective);
            if !r.on_boundary.is_empty() {
                log::warn!("estimates on the box boundary: {:?}", r.on_boundary);
            }
            Ok(true)
        }
        Cmd::Counterfactual {
            input,
            out,
            scenario,
            epsilon,
            year,
        } => {
            let eco: Economy = read_json_file(&input)?;
            let solver = SolverConfig::default();
            let eps = if epsilon.is_empty() {
                vec![eco.taste.epsilon()]
            } else {
                epsilon
            };
            let mut reports = Vec::new();
            let mut ok = true;
            for name in &scenario {
                let sc = Scenario::by_name(name)?;
                for &e in &eps {
                    let mut at = eco;
                    at.taste = at.taste.at_epsilon(e)?;
                    match run_scenario(&at, &sc, &solver) {
                        Ok(r) => reports.push(r),
                        Err(err) => {
                            log::error!("{name} at epsilon {e}: {err}");
                            ok = false;
                        }
                    }
                }
            }
            let sol = solve_equilibrium(&eco, &solver)?;
            let report = YearReport {
                schema_version: SCHEMA_VERSION.into(),
                year,
                seed: 0,
                economy: eco,
                equilibrium: sol,
                estimation: None,
                counterfactuals: reports,
            };
            for p in write_report(&report, &out)? {
                println!("{}", p.display());
            }
            Ok(ok)
        }
        Cmd::Report {
            input,
            out,
            seed,
            year,
            epsilon,
            scenario,
        } => {
            let mut m = RunManifest::load(&input)?;
            if let Some(o) = out {
                m.output_dir = o;
            }
            if let Some(s) = seed {
                m.seed = s;
            }
            if !year.is_empty() {
                m.years = Some(year);
            }
            if !epsilon.is_empty() {
                m.epsilons = epsilon;
            }
            if !scenario.is_empty() {
                m.scenarios = scenario
                    .into_iter()
                    .map(migrant_ge::io::ScenarioSpec::Named)
                    .collect();
            }
            let s = run_pipeline(&m)?;
            for y in &s.years {
                println!("{} {}", y.year, if y.ok { "ok" } else { "failed" });
            }
            for f in &s.failures {
                println!("failure: {}", serde_json::to_string(f)?);
            }
            Ok(s.success())
        }
        Cmd::Selftest { draws, seed, out } => {
            let r = run_selftest(draws, seed);
            for c in &r.checks {
                println!(
                    "{} {:<22} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if let Some(o) = out {
                write_json_file(&o, &r)?;
            }
            Ok(r.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(1)
        }
    }
}
