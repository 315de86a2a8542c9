//! Multi-year orchestration: smooth, estimate, solve, run scenarios, report.
//!
//! A failure in one year is recorded and the remaining years go ahead.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::hp_filter;
use crate::counterfactual::{run_scenario, CounterfactualReport};
use crate::equilibrium::{solve_equilibrium, EquilibriumSolution};
use crate::error::IoError;
use crate::estimation::{estimate, moments_from_solution, EstimateResult, MomentVector};
use crate::io::{
    load_year_inputs, write_json_file, write_report, RunManifest, YearInputBundle, YearReport,
    SCHEMA_VERSION,
};
use crate::params::Economy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Load,
    Smooth,
    Estimate,
    Solve,
    Counterfactual,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub year: Option<i32>,
    pub stage: Stage,
    pub kind: String,
    pub message: String,
}

impl StageFailure {
    fn model(year: i32, stage: Stage, e: &crate::ModelError) -> Self {
        StageFailure {
            year: Some(year),
            stage,
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }

    fn io(year: Option<i32>, stage: Stage, e: &IoError) -> Self {
        StageFailure {
            year,
            stage,
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSummary {
    pub year: i32,
    pub ok: bool,
    pub objective: Option<f64>,
    pub gdp: Option<f64>,
    pub gdp_per_worker: Option<f64>,
    pub labour_share: Option<f64>,
    pub max_residual: Option<f64>,
    pub scenarios_run: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub schema_version: String,
    pub seed: u64,
    pub smoothed: bool,
    pub years: Vec<YearSummary>,
    pub failures: Vec<StageFailure>,
}

impl PipelineSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

/// HP trend of every moment across years, in year order. Needs at least four
/// years; returns `false` and leaves the bundles alone otherwise.
pub fn smooth_moments(
    bundles: &mut [YearInputBundle],
    lambda_hp: f64,
) -> crate::error::Result<bool> {
    if bundles.len() < 4 {
        return Ok(false);
    }
    bundles.sort_by_key(|b| b.year);
    let cols: Vec<[f64; 17]> = bundles.iter().map(|b| b.moments.to_array()).collect();
    let mut smoothed = cols.clone();
    for k in 0..MomentVector::LEN {
        let series: Vec<f64> = cols.iter().map(|c| c[k]).collect();
        let trend = hp_filter(&series, lambda_hp)?;
        for (row, v) in smoothed.iter_mut().zip(trend) {
            row[k] = v;
        }
    }
    for (b, m) in bundles.iter_mut().zip(smoothed) {
        let mv = MomentVector::from_array(&m);
        mv.validate()?;
        b.moments = mv;
    }
    Ok(true)
}

struct YearOutcome {
    summary: YearSummary,
    failures: Vec<StageFailure>,
}

fn run_year(m: &RunManifest, bundle: &YearInputBundle) -> YearOutcome {
    let year = bundle.year;
    let mut failures = Vec::new();
    let mut summary = YearSummary {
        year,
        ok: false,
        objective: None,
        gdp: None,
        gdp_per_worker: None,
        labour_share: None,
        max_residual: None,
        scenarios_run: 0,
    };
    let done =
        |summary: YearSummary, failures: Vec<StageFailure>| YearOutcome { summary, failures };

    let (estimated, estimation): (_, Option<EstimateResult>) = match &m.estimated {
        Some(p) => (*p, None),
        None => {
            let mut cfg = m.estimation.clone();
            cfg.seed = m.seed.wrapping_add(year as u64);
            cfg.solver = m.solver.clone();
            match estimate(&bundle.moments, &bundle.calibrated, &m.taste, &cfg) {
                Ok(r) => (r.estimated, Some(r)),
                Err(e) => {
                    failures.push(StageFailure::model(year, Stage::Estimate, &e));
                    return done(summary, failures);
                }
            }
        }
    };
    summary.objective = estimation.as_ref().map(|e| e.objective);
    let eco = Economy {
        calibrated: bundle.calibrated,
        estimated,
        taste: m.taste,
    };
    let sol: EquilibriumSolution = match solve_equilibrium(&eco, &m.solver) {
        Ok(s) => s,
        Err(e) => {
            failures.push(StageFailure::model(year, Stage::Solve, &e));
            return done(summary, failures);
        }
    };
    let moments = moments_from_solution(&eco, &sol);
    summary.gdp = Some(moments.gdp);
    summary.gdp_per_worker = Some(moments.gdp_per_worker);
    summary.labour_share = Some(moments.labour_share);
    summary.max_residual = Some(sol.residual_norm);

    let epsilons: Vec<f64> = if m.epsilons.is_empty() {
        vec![m.taste.epsilon()]
    } else {
        m.epsilons.clone()
    };
    let mut counterfactuals: Vec<CounterfactualReport> = Vec::new();
    for spec in &m.scenarios {
        let scenario = match spec.resolve() {
            Ok(s) => s,
            Err(e) => {
                failures.push(StageFailure::model(year, Stage::Counterfactual, &e));
                continue;
            }
        };
        let legs: Vec<_> = epsilons
            .par_iter()
            .map(|&eps| {
                let mut e = eco;
                e.taste = e.taste.at_epsilon(eps)?;
                run_scenario(&e, &scenario, &m.solver)
            })
            .collect();
        for r in legs {
            match r {
                Ok(r) => counterfactuals.push(r),
                Err(e) => failures.push(StageFailure::model(year, Stage::Counterfactual, &e)),
            }
        }
    }
    summary.scenarios_run = counterfactuals.len();

    let report = YearReport {
        schema_version: SCHEMA_VERSION.into(),
        year,
        seed: m.seed,
        economy: eco,
        equilibrium: sol,
        estimation,
        counterfactuals,
    };
    if let Err(e) = write_report(&report, &m.output_dir.join(year.to_string())) {
        failures.push(StageFailure::io(Some(year), Stage::Report, &e));
    }
    summary.ok = failures.is_empty();
    done(summary, failures)
}

/// Runs every stage for every year in the manifest and writes `summary.json`
/// and `summary.csv` into the output directory.
pub fn run_pipeline(m: &RunManifest) -> Result<PipelineSummary, IoError> {
    let mut failures = Vec::new();
    let mut bundles: Vec<YearInputBundle> = Vec::new();
    for p in &m.inputs {
        match load_year_inputs(p) {
            Ok(b) => bundles.extend(b),
            Err(e) => failures.push(StageFailure::io(None, Stage::Load, &e)),
        }
    }
    bundles.sort_by_key(|b| b.year);

    let mut smoothed = false;
    if let Some(lambda) = m.hp_lambda {
        match smooth_moments(&mut bundles, lambda) {
            Ok(s) => {
                smoothed = s;
                if !s {
                    log::info!("fewer than four years, moments left unsmoothed");
                }
            }
            Err(e) => failures.push(StageFailure {
                year: None,
                stage: Stage::Smooth,
                kind: e.kind().into(),
                message: e.to_string(),
            }),
        }
    }

    // Trends use every year on file; the filter only picks which years run.
    if let Some(years) = &m.years {
        bundles.retain(|b| years.contains(&b.year));
    }
    let outcomes: Vec<YearOutcome> = bundles.par_iter().map(|b| run_year(m, b)).collect();
    let mut years = Vec::new();
    for o in outcomes {
        years.push(o.summary);
        failures.extend(o.failures);
    }
    for f in &failures {
        log::error!(
            "{} failed{}: {}",
            serde_json::to_string(&f.stage).unwrap_or_default(),
            f.year.map(|y| format!(" for {y}")).unwrap_or_default(),
            f.message
        );
    }
    let summary = PipelineSummary {
        schema_version: SCHEMA_VERSION.into(),
        seed: m.seed,
        smoothed,
        years,
        failures,
    };
    write_json_file(&m.output_dir.join("summary.json"), &summary)?;
    write_summary_csv(&m.output_dir.join("summary.csv"), &summary)?;
    Ok(summary)
}

fn write_summary_csv(path: &Path, s: &PipelineSummary) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    for y in &s.years {
        w.serialize(y)?;
    }
    w.flush()?;
    Ok(())
}
