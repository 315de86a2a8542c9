//! Steady-state equilibrium: the 17 unknowns, the solvers and the post-hoc
//! verification every accepted solution goes through.

pub mod nested;
pub mod newton;
pub mod system;

use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, BySkill, Origin, Skill, WorkerClass};
use crate::error::{ModelError, Result};
use crate::fiscal::{
    government_accounts, market_clearing_residuals, Aggregates, GovernmentAccounts,
};
use crate::labor::{firm_value, worker_values, WorkerValueInputs};
use crate::model::{RealPrices, THETA_MAX, THETA_MIN};
use crate::params::Economy;

pub use system::{evaluate_at_theta, initial_guess, residual_norm, residual_vector};

/// The endogenous variables, in the canonical order
/// `e(4), u(4), w(4), theta_h, theta_l, p_h, p_l, nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnknownVector {
    pub e: ByClass<f64>,
    pub u: ByClass<f64>,
    pub w: ByClass<f64>,
    pub theta: BySkill<f64>,
    pub prices: RealPrices,
    pub nu: f64,
}

impl UnknownVector {
    pub const LEN: usize = 17;

    pub const NAMES: [&'static str; 17] = [
        "e_h_N", "e_l_N", "e_h_I", "e_l_I", "u_h_N", "u_l_N", "u_h_I", "u_l_I", "w_h_N", "w_l_N",
        "w_h_I", "w_l_I", "theta_h", "theta_l", "p_h", "p_l", "nu",
    ];

    pub fn to_array(&self) -> [f64; 17] {
        let mut a = [0.0; 17];
        a[0..4].copy_from_slice(&self.e.to_array());
        a[4..8].copy_from_slice(&self.u.to_array());
        a[8..12].copy_from_slice(&self.w.to_array());
        a[12] = self.theta.h;
        a[13] = self.theta.l;
        a[14] = self.prices.p_h;
        a[15] = self.prices.p_l;
        a[16] = self.nu;
        a
    }

    pub fn from_array(a: &[f64; 17]) -> Self {
        UnknownVector {
            e: ByClass::from_array([a[0], a[1], a[2], a[3]]),
            u: ByClass::from_array([a[4], a[5], a[6], a[7]]),
            w: ByClass::from_array([a[8], a[9], a[10], a[11]]),
            theta: BySkill { h: a[12], l: a[13] },
            prices: RealPrices {
                p_h: a[14],
                p_l: a[15],
            },
            nu: a[16],
        }
    }

    pub fn price(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.prices.p_h,
            Skill::Low => self.prices.p_l,
        }
    }

    /// Real value added per worker, `p_tilde * x`.
    pub fn value_added(&self, eco: &Economy, skill: Skill) -> f64 {
        self.price(skill) * eco.estimated.x(skill)
    }

    pub fn aggregates(&self, eco: &Economy) -> Aggregates {
        Aggregates {
            e: self.e,
            u: self.u,
            w: self.w,
            prices: self.prices,
            x_h: eco.estimated.x_h,
            x_l: eco.estimated.x_l,
        }
    }

    /// Largest relative difference over the 17 entries.
    pub fn max_relative_gap(&self, other: &UnknownVector) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Newton,
    FixedPoint,
    /// Newton first, nested bisection if Newton fails.
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Bound on the largest scaled residual.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step halvings allowed in the Newton line search.
    pub max_halvings: usize,
    pub strategy: Strategy,
    /// Extra starting tightness pairs used to look for other equilibria.
    #[serde(default)]
    pub extra_starts: Vec<BySkill<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-10,
            max_iterations: 100,
            max_halvings: 30,
            strategy: Strategy::Hybrid,
            extra_starts: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        SolverConfig {
            strategy,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Newton,
    FixedPoint,
    NewtonThenFixedPoint,
}

/// Lifetime values of workers and employers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSet {
    pub w_u: ByClass<f64>,
    pub w_e: ByClass<f64>,
    /// Filled-job values by market and hire origin.
    pub j: ByClass<f64>,
    /// Vacancy values.
    pub v: BySkill<f64>,
    pub w_fc: BySkill<f64>,
}

/// Identities recomputed from scratch for an accepted solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub max_residual: f64,
    /// Largest relative gap between `e/u` and `kappa theta^(1-alpha) / delta`.
    pub flow_balance: f64,
    /// Largest `|V_i| / (p_i x_i)`.
    pub free_entry: f64,
    pub budget: f64,
    pub clearing_h: f64,
    pub clearing_l: f64,
    /// Largest gap `|e + u + fc - sigma| / max(sigma, 1)` over non-native classes.
    pub nonnative_mass: f64,
}

impl Verification {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_residual < tolerance
            && self.flow_balance < 1e-9
            && self.free_entry < 1e-8
            && self.budget.abs() < 1e-8
            && self.clearing_h.abs() < 1e-8
            && self.clearing_l.abs() < 1e-8
            && self.nonnative_mass < 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    pub unknowns: UnknownVector,
    /// Native share of the unemployed per market.
    pub pi_n: BySkill<f64>,
    pub values: ValueSet,
    pub accounts: GovernmentAccounts,
    pub residual_norm: f64,
    pub iterations: usize,
    pub path: SolverPath,
    pub verification: Verification,
    /// Other equilibria found from the extra starts, if any.
    pub alternatives: Vec<UnknownVector>,
    pub multiple_equilibria: bool,
}

impl EquilibriumSolution {
    pub fn job_finding_rate(&self, eco: &Economy, class: WorkerClass) -> f64 {
        system::job_finding_rate(eco, class, self.unknowns.theta.get(class.skill))
            .unwrap_or(f64::NAN)
    }

    pub fn unemployment_rate(&self, class: WorkerClass) -> f64 {
        let (e, u) = (self.unknowns.e.get(class), self.unknowns.u.get(class));
        if e + u > 0.0 {
            u / (e + u)
        } else {
            0.0
        }
    }

    /// GDP at market prices.
    pub fn gdp(&self, eco: &Economy) -> f64 {
        self.accounts.gva / (1.0 - eco.calibrated.t_p)
    }

    pub fn employment(&self) -> f64 {
        self.unknowns.e.sum()
    }

    /// Net wage `(1 - t)(w + tau)`.
    pub fn net_wage(&self, eco: &Economy, class: WorkerClass) -> f64 {
        (1.0 - eco.estimated.t) * (self.unknowns.w.get(class) + eco.calibrated.tau)
    }

    /// Share of the gross wage bill in value added.
    pub fn labour_share(&self) -> f64 {
        let bill: f64 = ByClass::from_fn(|c| self.unknowns.w.get(c) * self.unknowns.e.get(c)).sum();
        bill / self.accounts.gva
    }

    /// Social-security contributions implied by the calibrated wedge.
    pub fn ssc(&self, eco: &Economy) -> f64 {
        let bill: f64 = ByClass::from_fn(|c| self.unknowns.w.get(c) * self.unknowns.e.get(c)).sum();
        eco.calibrated.ssc_wedge * bill
    }
}

/// Lifetime values at a given state of the economy.
pub fn value_set(eco: &Economy, x: &UnknownVector) -> Result<ValueSet> {
    let cal = &eco.calibrated;
    let fiscal = eco.fiscal();
    let blocks = system::Blocks::new(eco);
    let mut w_u = ByClass::splat(0.0);
    let mut w_e = ByClass::splat(0.0);
    let mut j = ByClass::splat(0.0);
    for class in WorkerClass::ALL {
        let s = system::job_finding_rate(eco, class, x.theta.get(class.skill))?;
        let px = x.value_added(eco, class.skill);
        let delta = cal.delta.get(class);
        let inputs = WorkerValueInputs {
            r: cal.r,
            beta: eco.estimated.beta,
            phi: cal.phi,
            b: fiscal.b,
            t: fiscal.t,
            tau_tilde: fiscal.tau_tilde,
            delta,
            s,
            p_tilde_x: px,
            wage: x.w.get(class),
            firing_cost: cal.firing_cost,
            iota_nu: eco.taste.iota * x.nu,
            abroad: match class.origin {
                Origin::Native => None,
                Origin::NonNative => Some((cal.lambda, eco.estimated.w_fc.get(class.skill))),
            },
        };
        let (wu, we) = worker_values(&inputs);
        *w_u.get_mut(class) = wu;
        *w_e.get_mut(class) = we;
        *j.get_mut(class) = firm_value(cal.r, fiscal.t, delta, px, x.w.get(class), cal.firing_cost);
    }
    let mut v = BySkill::splat(0.0);
    for skill in Skill::ALL {
        let m = system::vacancy_market(
            eco,
            skill,
            x.theta.get(skill),
            &x.u,
            &x.w,
            x.value_added(eco, skill),
        )?;
        *v.get_mut(skill) = m.vacancy_value(&blocks.costs);
    }
    Ok(ValueSet {
        w_u,
        w_e,
        j,
        v,
        w_fc: eco.estimated.w_fc,
    })
}

fn population(eco: &Economy, x: &UnknownVector) -> f64 {
    eco.calibrated
        .population(x.e.h_i + x.e.l_i + x.u.h_i + x.u.l_i)
}

/// Recomputes every equilibrium identity at `x`.
pub fn verify(eco: &Economy, x: &UnknownVector) -> Result<Verification> {
    let cal = &eco.calibrated;
    let fiscal = eco.fiscal();
    let prefs = eco.prefs();
    let mut flow: f64 = 0.0;
    let mut mass: f64 = 0.0;
    for class in WorkerClass::ALL {
        let (e, u) = (x.e.get(class), x.u.get(class));
        let s = system::job_finding_rate(eco, class, x.theta.get(class.skill))?;
        let delta = cal.delta.get(class);
        if u > 0.0 {
            let target = s / delta;
            flow = flow.max(((e / u) - target).abs() / target.max(1.0));
        }
        if !class.is_native() {
            let den = cal.lambda * delta + cal.eta * (s + delta);
            let fc = cal.sigma.get(class) * cal.lambda * delta / den;
            let sigma = cal.sigma.get(class);
            mass = mass.max((e + u + fc - sigma).abs() / sigma.max(1.0));
        }
    }
    let values = value_set(eco, x)?;
    let free_entry = Skill::ALL
        .iter()
        .map(|&s| values.v.get(s).abs() / x.value_added(eco, s))
        .fold(0.0, f64::max);
    let agg = x.aggregates(eco);
    let acc = government_accounts(&agg, &fiscal, population(eco, x), eco.taste.zeta)?;
    let clearing = market_clearing_residuals(&agg, &fiscal, &prefs, acc.balancing_transfer);
    Ok(Verification {
        max_residual: residual_norm(x, eco),
        flow_balance: flow,
        free_entry,
        budget: acc.relative_surplus(),
        clearing_h: clearing.rel_h,
        clearing_l: clearing.rel_l,
        nonnative_mass: mass,
    })
}

fn check_market_mass(eco: &Economy) -> Result<()> {
    for skill in Skill::ALL {
        if !(eco.calibrated.sigma.skill_total(skill) > 0.0) {
            return Err(ModelError::DegenerateEconomy(format!(
                "no workers in the {}-skill market",
                skill.tag()
            )));
        }
    }
    Ok(())
}

fn boundary_check(x: &UnknownVector) -> Result<()> {
    for (skill, name) in [(Skill::High, "high-skilled"), (Skill::Low, "low-skilled")] {
        let th = x.theta.get(skill);
        if th <= THETA_MIN * (1.0 + 1e-9) || th >= THETA_MAX * (1.0 - 1e-9) {
            return Err(ModelError::BoundaryHit {
                market: name,
                theta: th,
            });
        }
    }
    Ok(())
}

/// Solves from a given starting point with the configured strategy.
pub fn solve_from(
    eco: &Economy,
    cfg: &SolverConfig,
    start: &UnknownVector,
) -> Result<(UnknownVector, usize, SolverPath)> {
    let newton = || newton::solve(eco, start, cfg).map(|o| (o.unknowns, o.iterations));
    let nested = || nested::solve(eco, start.theta).map(|o| (o.state.unknowns, o.evaluations));
    match cfg.strategy {
        Strategy::Newton => newton().map(|(x, n)| (x, n, SolverPath::Newton)),
        Strategy::FixedPoint => nested().map(|(x, n)| (x, n, SolverPath::FixedPoint)),
        Strategy::Hybrid => match newton() {
            Ok((x, n)) if boundary_check(&x).is_ok() => Ok((x, n, SolverPath::Newton)),
            first => {
                if let Err(e) = &first {
                    log::debug!("newton failed ({e}); falling back to nested bisection");
                }
                nested().map(|(x, n)| (x, n, SolverPath::NewtonThenFixedPoint))
            }
        },
    }
}

/// Assembles the full solution record and runs the verification suite.
pub fn finalize(
    eco: &Economy,
    cfg: &SolverConfig,
    x: UnknownVector,
    iterations: usize,
    path: SolverPath,
) -> Result<EquilibriumSolution> {
    boundary_check(&x)?;
    let verification = verify(eco, &x)?;
    if !verification.passes(cfg.tolerance) {
        log::warn!("candidate equilibrium failed verification: {verification:?}");
        return Err(ModelError::NoConvergence {
            iterations,
            best_residual: verification.max_residual,
            best_iterate: Some(Box::new(x)),
        });
    }
    let agg = x.aggregates(eco);
    let accounts = government_accounts(&agg, &eco.fiscal(), population(eco, &x), eco.taste.zeta)?;
    Ok(EquilibriumSolution {
        unknowns: x,
        pi_n: BySkill::from_fn(|s| system::native_share(&x.u, s)),
        values: value_set(eco, &x)?,
        accounts,
        residual_norm: verification.max_residual,
        iterations,
        path,
        verification,
        alternatives: Vec::new(),
        multiple_equilibria: false,
    })
}

/// Solves the steady state and verifies it.
pub fn solve_equilibrium(eco: &Economy, cfg: &SolverConfig) -> Result<EquilibriumSolution> {
    eco.validate()?;
    check_market_mass(eco)?;
    let start = initial_guess(eco, BySkill::splat(1.0))?;
    let (x, iterations, path) = solve_from(eco, cfg, &start)?;
    let mut sol = finalize(eco, cfg, x, iterations, path)?;
    for theta in &cfg.extra_starts {
        let start = initial_guess(eco, *theta)?;
        match solve_from(eco, cfg, &start).and_then(|(y, n, p)| finalize(eco, cfg, y, n, p)) {
            Ok(other) => {
                let known = std::iter::once(&sol.unknowns)
                    .chain(sol.alternatives.iter())
                    .any(|k| k.max_relative_gap(&other.unknowns) <= 1e-6);
                if !known {
                    sol.alternatives.push(other.unknowns);
                }
            }
            Err(e) => log::debug!("extra start {theta:?} failed: {e}"),
        }
    }
    sol.multiple_equilibria = !sol.alternatives.is_empty();
    if sol.multiple_equilibria {
        log::warn!("{} additional equilibria found", sol.alternatives.len());
    }
    Ok(sol)
}
