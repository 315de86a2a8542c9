//! Simulated-moments estimation of the eleven free parameters.
//!
//! The search runs in the unit box: each parameter is mapped linearly, or
//! logarithmically for the scale parameters, onto `[0,1]`. Every start runs a
//! projected Nelder-Mead followed by a coordinate pattern search; starts are
//! scrambled Halton points and run in parallel.

use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, BySkill};
use crate::equilibrium::{solve_equilibrium, EquilibriumSolution, SolverConfig};
use crate::error::{ModelError, Result};
use crate::optim::{coordinate_refine, nelder_mead, scrambled_halton, OptimizerConfig};
use crate::params::{CalibratedParameters, Economy, EstimatedParameters, TasteConfig};

/// The seventeen matched moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub net_wage: ByClass<f64>,
    pub job_finding: ByClass<f64>,
    pub unemployment: ByClass<f64>,
    pub labour_share: f64,
    pub gdp: f64,
    pub gdp_per_worker: f64,
    /// Native share of the unemployed by market.
    pub pi_n: BySkill<f64>,
}

/// Accuracy band a moment is judged against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentBand {
    /// Wages, output and shares.
    Level,
    Unemployment,
    JobFinding,
}

impl MomentBand {
    pub fn tolerance(self) -> f64 {
        match self {
            MomentBand::Level => 0.05,
            MomentBand::Unemployment => 0.10,
            MomentBand::JobFinding => 0.25,
        }
    }
}

impl MomentVector {
    pub const LEN: usize = 17;

    pub const NAMES: [&'static str; 17] = [
        "net_wage_h_N",
        "net_wage_l_N",
        "net_wage_h_I",
        "net_wage_l_I",
        "job_finding_h_N",
        "job_finding_l_N",
        "job_finding_h_I",
        "job_finding_l_I",
        "unemployment_h_N",
        "unemployment_l_N",
        "unemployment_h_I",
        "unemployment_l_I",
        "labour_share",
        "gdp",
        "gdp_per_worker",
        "pi_h_N",
        "pi_l_N",
    ];

    pub fn to_array(&self) -> [f64; 17] {
        let mut a = [0.0; 17];
        a[0..4].copy_from_slice(&self.net_wage.to_array());
        a[4..8].copy_from_slice(&self.job_finding.to_array());
        a[8..12].copy_from_slice(&self.unemployment.to_array());
        a[12] = self.labour_share;
        a[13] = self.gdp;
        a[14] = self.gdp_per_worker;
        a[15] = self.pi_n.h;
        a[16] = self.pi_n.l;
        a
    }

    pub fn from_array(a: &[f64; 17]) -> Self {
        MomentVector {
            net_wage: ByClass::from_array([a[0], a[1], a[2], a[3]]),
            job_finding: ByClass::from_array([a[4], a[5], a[6], a[7]]),
            unemployment: ByClass::from_array([a[8], a[9], a[10], a[11]]),
            labour_share: a[12],
            gdp: a[13],
            gdp_per_worker: a[14],
            pi_n: BySkill { h: a[15], l: a[16] },
        }
    }

    pub fn band(index: usize) -> MomentBand {
        match index {
            4..=7 => MomentBand::JobFinding,
            8..=11 => MomentBand::Unemployment,
            _ => MomentBand::Level,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        for (i, (&v, name)) in a.iter().zip(Self::NAMES).enumerate() {
            let ok = match i {
                0..=3 | 13 | 14 => v > 0.0 && v.is_finite(),
                4..=11 => v > 0.0 && v < 1.0,
                // A market without non-native unemployed has a native share of one.
                15 | 16 => v > 0.0 && v <= 1.0,
                _ => v > 0.0 && v < 1.0,
            };
            if !ok {
                return Err(ModelError::Data {
                    op: "moments",
                    detail: format!("{name} = {v} out of range"),
                });
            }
        }
        Ok(())
    }
}

/// Maps a solved equilibrium to the matched moments.
pub fn moments_from_solution(eco: &Economy, sol: &EquilibriumSolution) -> MomentVector {
    let gdp = sol.gdp(eco);
    MomentVector {
        net_wage: ByClass::from_fn(|c| sol.net_wage(eco, c)),
        job_finding: ByClass::from_fn(|c| sol.job_finding_rate(eco, c)),
        unemployment: ByClass::from_fn(|c| sol.unemployment_rate(c)),
        labour_share: sol.labour_share(),
        gdp,
        gdp_per_worker: gdp / sol.employment(),
        pi_n: sol.pi_n,
    }
}

/// Solves the equilibrium and returns its moments.
pub fn simulated_moments(eco: &Economy, solver: &SolverConfig) -> Result<MomentVector> {
    let sol = solve_equilibrium(eco, solver)?;
    Ok(moments_from_solution(eco, &sol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "values")]
pub enum Weighting {
    Identity,
    /// Diagonal with `1 / M_i^2`, so every moment counts in relative terms.
    Relative,
    Diagonal(Vec<f64>),
    /// Full symmetric matrix, row-major.
    Matrix(Vec<Vec<f64>>),
}

impl Weighting {
    /// The weighting matrix for a given target, checked for positive definiteness.
    pub fn matrix(&self, target: &MomentVector) -> Result<DMatrix<f64>> {
        let n = MomentVector::LEN;
        let m = match self {
            Weighting::Identity => DMatrix::identity(n, n),
            Weighting::Relative => {
                let t = target.to_array();
                DMatrix::from_diagonal(&DVector::from_iterator(n, t.iter().map(|v| 1.0 / (v * v))))
            }
            Weighting::Diagonal(d) => {
                if d.len() != n {
                    return Err(ModelError::param("weighting", format!("need {n} weights")));
                }
                DMatrix::from_diagonal(&DVector::from_column_slice(d))
            }
            Weighting::Matrix(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ModelError::param(
                        "weighting",
                        format!("need a {n}x{n} matrix"),
                    ));
                }
                DMatrix::from_fn(n, n, |i, j| rows[i][j])
            }
        };
        if (&m - m.transpose()).amax() > 1e-12 * m.amax().max(1.0) {
            return Err(ModelError::param("weighting", "matrix is not symmetric"));
        }
        if m.iter().any(|v| !v.is_finite()) || m.clone().cholesky().is_none() {
            return Err(ModelError::param(
                "weighting",
                "matrix is not positive definite",
            ));
        }
        Ok(m)
    }
}

/// Quadratic form `(M - M^s)' W (M - M^s)`.
pub fn msm_objective(simulated: &MomentVector, target: &MomentVector, w: &DMatrix<f64>) -> f64 {
    let d = DVector::from_iterator(
        MomentVector::LEN,
        target
            .to_array()
            .iter()
            .zip(simulated.to_array())
            .map(|(m, s)| m - s),
    );
    (d.transpose() * w * &d)[(0, 0)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    /// Search in `ln` of the parameter.
    pub log: bool,
}

impl Bound {
    pub const fn linear(lo: f64, hi: f64) -> Self {
        Bound { lo, hi, log: false }
    }

    pub const fn log(lo: f64, hi: f64) -> Self {
        Bound { lo, hi, log: true }
    }

    pub fn to_unit(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if self.log {
            (self.lo.ln() + u * (self.hi.ln() - self.lo.ln())).exp()
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }
}

/// Search box for the eleven parameters, in [`EstimatedParameters::NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterBox(pub [Bound; 11]);

impl Default for ParameterBox {
    fn default() -> Self {
        let kappa = Bound::linear(0.02, 1.0);
        ParameterBox([
            Bound::linear(0.05, 0.3),
            Bound::linear(0.2, 0.5),
            Bound::log(1.0, 60.0),
            Bound::log(0.5, 30.0),
            Bound::linear(0.3, 0.7),
            kappa,
            kappa,
            kappa,
            kappa,
            Bound::log(1.0, 1000.0),
            Bound::log(1.0, 1000.0),
        ])
    }
}

impl ParameterBox {
    pub fn validate(&self) -> Result<()> {
        for (b, name) in self.0.iter().zip(EstimatedParameters::NAMES) {
            let ok = b.lo.is_finite() && b.hi.is_finite() && b.lo < b.hi && (!b.log || b.lo > 0.0);
            if !ok {
                return Err(ModelError::param(
                    format!("bounds.{name}"),
                    format!("invalid interval [{}, {}]", b.lo, b.hi),
                ));
            }
        }
        Ok(())
    }

    pub fn to_unit(&self, p: &EstimatedParameters) -> Vec<f64> {
        p.to_array()
            .iter()
            .zip(&self.0)
            .map(|(v, b)| b.to_unit(*v))
            .collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> EstimatedParameters {
        let mut a = [0.0; 11];
        for (i, b) in self.0.iter().enumerate() {
            a[i] = b.from_unit(u[i]);
        }
        EstimatedParameters::from_array(&a)
    }

    pub fn contains(&self, p: &EstimatedParameters) -> bool {
        p.to_array()
            .iter()
            .zip(&self.0)
            .all(|(v, b)| *v >= b.lo && *v <= b.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub weighting: Weighting,
    pub starts: usize,
    pub seed: u64,
    pub bounds: ParameterBox,
    pub optimizer: OptimizerConfig,
    /// Smallest coordinate step of the polishing pass, in box units.
    pub refine_min_step: f64,
    pub refine_max_evaluations: usize,
    /// Objective value assigned where the equilibrium cannot be solved.
    pub penalty: f64,
    /// Optional extra start, typically a previous estimate.
    #[serde(default)]
    pub initial_guess: Option<EstimatedParameters>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            weighting: Weighting::Relative,
            starts: 16,
            seed: 20_240_601,
            bounds: ParameterBox::default(),
            optimizer: OptimizerConfig {
                max_evaluations: 6_000,
                ..OptimizerConfig::default()
            },
            refine_min_step: 1e-9,
            refine_max_evaluations: 3_000,
            penalty: 1e10,
            initial_guess: None,
            solver: SolverConfig::default(),
        }
    }
}

/// One evaluation of the estimation criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub value: f64,
    /// The equilibrium could not be solved and the penalty was used.
    pub penalized: bool,
}

/// Target, fixed parameters and weights bundled for repeated evaluation.
pub struct MsmProblem {
    pub target: MomentVector,
    pub calibrated: CalibratedParameters,
    pub taste: TasteConfig,
    pub weights: DMatrix<f64>,
    pub solver: SolverConfig,
    pub penalty: f64,
}

impl MsmProblem {
    pub fn new(
        target: MomentVector,
        calibrated: CalibratedParameters,
        taste: TasteConfig,
        weighting: &Weighting,
        solver: SolverConfig,
        penalty: f64,
    ) -> Result<Self> {
        target.validate()?;
        Ok(MsmProblem {
            weights: weighting.matrix(&target)?,
            target,
            calibrated,
            taste,
            solver,
            penalty,
        })
    }

    pub fn economy(&self, estimated: EstimatedParameters) -> Economy {
        Economy {
            calibrated: self.calibrated,
            estimated,
            taste: self.taste,
        }
    }

    pub fn evaluate(&self, estimated: &EstimatedParameters) -> ObjectiveValue {
        let eco = self.economy(*estimated);
        match simulated_moments(&eco, &self.solver) {
            Ok(m) => {
                let value = msm_objective(&m, &self.target, &self.weights);
                if value.is_finite() {
                    ObjectiveValue {
                        value,
                        penalized: false,
                    }
                } else {
                    self.penalized()
                }
            }
            Err(_) => self.penalized(),
        }
    }

    fn penalized(&self) -> ObjectiveValue {
        ObjectiveValue {
            value: self.penalty,
            penalized: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentError {
    pub name: String,
    pub target: f64,
    pub simulated: f64,
    pub relative_error: f64,
    pub band: MomentBand,
    pub within_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartOutcome {
    pub index: usize,
    pub estimated: EstimatedParameters,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimated: EstimatedParameters,
    pub objective: f64,
    pub simulated: MomentVector,
    pub moment_errors: Vec<MomentError>,
    /// Parameters within `1e-6` (box units) of a bound.
    pub on_boundary: Vec<String>,
    pub best_start: usize,
    pub starts: Vec<StartOutcome>,
}

impl EstimateResult {
    pub fn all_within_bands(&self) -> bool {
        self.moment_errors.iter().all(|m| m.within_band)
    }
}

/// Per-moment relative errors of `simulated` against `target`.
pub fn moment_errors(simulated: &MomentVector, target: &MomentVector) -> Vec<MomentError> {
    target
        .to_array()
        .iter()
        .zip(simulated.to_array())
        .enumerate()
        .map(|(i, (&t, s))| {
            let band = MomentVector::band(i);
            let relative_error = (s - t) / t.abs();
            MomentError {
                name: MomentVector::NAMES[i].to_string(),
                target: t,
                simulated: s,
                relative_error,
                band,
                within_band: relative_error.abs() <= band.tolerance(),
            }
        })
        .collect()
}

/// Multi-start simulated-moments estimate.
pub fn estimate(
    target: &MomentVector,
    calibrated: &CalibratedParameters,
    taste: &TasteConfig,
    cfg: &EstimationConfig,
) -> Result<EstimateResult> {
    cfg.bounds.validate()?;
    if cfg.starts == 0 && cfg.initial_guess.is_none() {
        return Err(ModelError::param("starts", "need at least one start"));
    }
    let problem = MsmProblem::new(
        *target,
        *calibrated,
        *taste,
        &cfg.weighting,
        cfg.solver.clone(),
        cfg.penalty,
    )?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    if let Some(g) = &cfg.initial_guess {
        points.push(
            cfg.bounds
                .to_unit(g)
                .iter()
                .map(|v| v.clamp(0.0, 1.0))
                .collect(),
        );
    }
    points.extend(scrambled_halton(
        cfg.starts,
        EstimatedParameters::LEN,
        cfg.seed,
    ));

    let best: Mutex<Option<(f64, usize)>> = Mutex::new(None);
    let f = |u: &[f64]| problem.evaluate(&cfg.bounds.from_unit(u)).value;
    let outcomes: Vec<StartOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(index, x0)| {
            let m = nelder_mead(&f, x0, &cfg.optimizer);
            let m = coordinate_refine(
                &f,
                &m,
                1e-3,
                cfg.refine_min_step,
                cfg.refine_max_evaluations,
            );
            {
                let mut guard = best.lock().unwrap_or_else(|p| p.into_inner());
                if guard.is_none_or(|(v, _)| m.value < v) {
                    *guard = Some((m.value, index));
                    log::info!("start {index}: new best objective {:.3e}", m.value);
                }
            }
            StartOutcome {
                index,
                estimated: cfg.bounds.from_unit(&m.x),
                objective: m.value,
                evaluations: m.evaluations,
                converged: m.converged,
            }
        })
        .collect();

    let winner = outcomes
        .iter()
        .filter(|o| o.objective < cfg.penalty)
        .min_by(|a, b| {
            a.objective
                .total_cmp(&b.objective)
                .then(a.index.cmp(&b.index))
        })
        .ok_or(ModelError::AllStartsFailed {
            starts: outcomes.len(),
        })?;
    let eco = problem.economy(winner.estimated);
    let simulated = simulated_moments(&eco, &cfg.solver)?;
    let unit = cfg.bounds.to_unit(&winner.estimated);
    let on_boundary = unit
        .iter()
        .zip(EstimatedParameters::NAMES)
        .filter(|(u, _)| **u <= 1e-6 || **u >= 1.0 - 1e-6)
        .map(|(_, n)| n.to_string())
        .collect::<Vec<_>>();
    if !on_boundary.is_empty() {
        log::warn!("estimate on the box boundary: {}", on_boundary.join(", "));
    }
    Ok(EstimateResult {
        estimated: winner.estimated,
        objective: winner.objective,
        moment_errors: moment_errors(&simulated, target),
        simulated,
        on_boundary,
        best_start: winner.index,
        starts: outcomes,
    })
}

/// Largest relative gap between two parameter vectors, by name.
pub fn parameter_errors(
    estimated: &EstimatedParameters,
    truth: &EstimatedParameters,
) -> Vec<(&'static str, f64)> {
    estimated
        .to_array()
        .iter()
        .zip(truth.to_array())
        .zip(EstimatedParameters::NAMES)
        .map(|((e, t), n)| (n, (e - t).abs() / t.abs()))
        .collect()
}
