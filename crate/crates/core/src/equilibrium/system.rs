//! The 17-equation steady-state system and its closed-form inner evaluation.

use crate::classes::{ByClass, BySkill, Origin, Skill, WorkerClass};
use crate::error::{ModelError, Result};
use crate::fiscal::{equilibrium_prices, public_goods, FiscalConfig};
use crate::labor::{
    native_stocks_from_rate, nonnative_stocks_from_rate, wage_native, wage_nonnative, Bargaining,
    EmployerCosts, MigrationRates, VacancyMarket,
};
use crate::model::{matching_rates, RealPrices};
use crate::params::Economy;

use super::UnknownVector;

/// Penalty used in place of non-finite residual components.
pub const NONFINITE_PENALTY: f64 = 1e6;

pub(crate) struct Blocks {
    pub bargain: Bargaining,
    pub fiscal: FiscalConfig,
    pub costs: EmployerCosts,
}

impl Blocks {
    pub fn new(eco: &Economy) -> Self {
        let fiscal = eco.fiscal();
        Blocks {
            bargain: Bargaining {
                r: eco.calibrated.r,
                beta: eco.estimated.beta,
                phi: eco.calibrated.phi,
            },
            fiscal,
            costs: EmployerCosts {
                r: eco.calibrated.r,
                t: fiscal.t,
                c: eco.calibrated.c,
                firing_cost: eco.calibrated.firing_cost,
            },
        }
    }
}

/// Job-finding rate of `class` at tightness `theta`.
pub fn job_finding_rate(eco: &Economy, class: WorkerClass, theta: f64) -> Result<f64> {
    Ok(eco.estimated.kappa.get(class) * matching_rates(theta, eco.calibrated.alpha)?.theta_q)
}

/// Share of natives among the unemployed of one market.
pub fn native_share(u: &ByClass<f64>, skill: Skill) -> f64 {
    let (n, i) = match skill {
        Skill::High => (u.h_n, u.h_i),
        Skill::Low => (u.l_n, u.l_i),
    };
    if n + i > 0.0 {
        n / (n + i)
    } else {
        1.0
    }
}

pub(crate) fn stocks(eco: &Economy, class: WorkerClass, s: f64) -> Result<(f64, f64)> {
    let cal = &eco.calibrated;
    let sigma = cal.sigma.get(class);
    let delta = cal.delta.get(class);
    match class.origin {
        Origin::Native => native_stocks_from_rate(sigma, s, delta),
        Origin::NonNative => {
            let m = MigrationRates {
                eta: cal.eta,
                lambda: cal.lambda,
            };
            let st = nonnative_stocks_from_rate(sigma, s, delta, &m)?;
            Ok((st.e, st.u))
        }
    }
}

pub(crate) fn wage(
    eco: &Economy,
    blocks: &Blocks,
    class: WorkerClass,
    s: f64,
    p_tilde_x: f64,
    nu: f64,
) -> Result<f64> {
    let cal = &eco.calibrated;
    let delta = cal.delta.get(class);
    match class.origin {
        Origin::Native => wage_native(
            &blocks.bargain,
            &blocks.fiscal,
            delta,
            s,
            p_tilde_x,
            cal.firing_cost,
        ),
        Origin::NonNative => wage_nonnative(
            &blocks.bargain,
            &blocks.fiscal,
            delta,
            s,
            cal.lambda,
            p_tilde_x,
            cal.firing_cost,
            eco.estimated.w_fc.get(class.skill),
            eco.taste.iota * nu,
        ),
    }
}

pub(crate) fn vacancy_market(
    eco: &Economy,
    skill: Skill,
    theta: f64,
    u: &ByClass<f64>,
    w: &ByClass<f64>,
    p_tilde_x: f64,
) -> Result<VacancyMarket> {
    let n = WorkerClass::new(skill, Origin::Native);
    let i = WorkerClass::new(skill, Origin::NonNative);
    Ok(VacancyMarket {
        q: matching_rates(theta, eco.calibrated.alpha)?.q,
        pi_n: native_share(u, skill),
        p_tilde_x,
        w_n: w.get(n),
        w_i: w.get(i),
        kappa_n: eco.estimated.kappa.get(n),
        kappa_i: eco.estimated.kappa.get(i),
        delta_n: eco.calibrated.delta.get(n),
        delta_i: eco.calibrated.delta.get(i),
    })
}

fn scaled(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(1.0)
}

fn resident_nonnatives(e: &ByClass<f64>, u: &ByClass<f64>) -> f64 {
    e.h_i + e.l_i + u.h_i + u.l_i
}

/// Scaled residuals of the 17 steady-state equations, ordered like the unknowns:
/// four employment stocks, four unemployment stocks, four wages, the two
/// job-creation prices, the two goods-market prices and public goods.
///
/// Components that cannot be evaluated are set to [`NONFINITE_PENALTY`].
pub fn residual_vector(x: &UnknownVector, eco: &Economy) -> [f64; 17] {
    let mut out = [NONFINITE_PENALTY; 17];
    let blocks = Blocks::new(eco);
    let est = &eco.estimated;
    let cal = &eco.calibrated;
    let prefs = eco.prefs();

    for class in WorkerClass::ALL {
        let k = class.index();
        if let Ok(s) = job_finding_rate(eco, class, x.theta.get(class.skill)) {
            if let Ok((e, u)) = stocks(eco, class, s) {
                out[k] = scaled(x.e.get(class), e);
                out[4 + k] = scaled(x.u.get(class), u);
            }
            let px = x.value_added(eco, class.skill);
            if let Ok(w) = wage(eco, &blocks, class, s, px, x.nu) {
                out[8 + k] = scaled(x.w.get(class), w);
            }
        }
    }
    for (j, skill) in Skill::ALL.into_iter().enumerate() {
        let px = x.value_added(eco, skill);
        if let Ok(m) = vacancy_market(eco, skill, x.theta.get(skill), &x.u, &x.w, px) {
            let p = m.price_from_job_creation(&blocks.costs, est.x(skill));
            out[12 + j] = scaled(x.price(skill), p);
        }
    }
    if let Ok(p) = equilibrium_prices(
        est.x_h,
        est.x_l,
        x.e.skill_total(Skill::High),
        x.e.skill_total(Skill::Low),
        &prefs,
        blocks.fiscal.g_h,
        blocks.fiscal.g_l,
    ) {
        out[14] = scaled(x.prices.p_h, p.p_h);
        out[15] = scaled(x.prices.p_l, p.p_l);
    }
    let pop = cal.population(resident_nonnatives(&x.e, &x.u));
    if let Ok(nu) = public_goods(
        blocks.fiscal.g_h,
        blocks.fiscal.g_l,
        x.value_added(eco, Skill::High),
        x.value_added(eco, Skill::Low),
        x.e.skill_total(Skill::High),
        x.e.skill_total(Skill::Low),
        pop,
        eco.taste.zeta,
    ) {
        out[16] = scaled(x.nu, nu);
    }
    let mut flagged = false;
    for r in out.iter_mut() {
        if !r.is_finite() {
            *r = NONFINITE_PENALTY;
            flagged = true;
        }
    }
    if flagged {
        log::debug!("non-finite residual components replaced by penalty");
    }
    out
}

pub fn residual_norm(x: &UnknownVector, eco: &Economy) -> f64 {
    residual_vector(x, eco)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()))
}

/// Everything implied by a pair of tightnesses once the job-creation
/// conditions are left aside.
#[derive(Debug, Clone, Copy)]
pub struct InnerState {
    pub unknowns: UnknownVector,
    /// Job-creation residual divided by value added, per market.
    pub jcc: BySkill<f64>,
}

/// Closed-form evaluation of stocks, prices, public goods and wages at the
/// given tightnesses. The price entries come from goods-market clearing.
pub fn evaluate_at_theta(eco: &Economy, theta: BySkill<f64>) -> Result<InnerState> {
    let blocks = Blocks::new(eco);
    let est = &eco.estimated;
    let cal = &eco.calibrated;
    let s = ByClass::try_from_fn(|c| job_finding_rate(eco, c, theta.get(c.skill)))?;
    let mut e = ByClass::splat(0.0);
    let mut u = ByClass::splat(0.0);
    for class in WorkerClass::ALL {
        let (ec, uc) = stocks(eco, class, s.get(class))?;
        *e.get_mut(class) = ec;
        *u.get_mut(class) = uc;
    }
    let (e_h, e_l) = (e.skill_total(Skill::High), e.skill_total(Skill::Low));
    if !(e_h > 0.0 && e_l > 0.0) {
        return Err(ModelError::DegenerateEconomy(format!(
            "zero employment in a skill market (E_h = {e_h}, E_l = {e_l})"
        )));
    }
    let prices = equilibrium_prices(
        est.x_h,
        est.x_l,
        e_h,
        e_l,
        &eco.prefs(),
        blocks.fiscal.g_h,
        blocks.fiscal.g_l,
    )?;
    let px = BySkill {
        h: prices.p_h * est.x_h,
        l: prices.p_l * est.x_l,
    };
    let pop = cal.population(resident_nonnatives(&e, &u));
    let nu = public_goods(
        blocks.fiscal.g_h,
        blocks.fiscal.g_l,
        px.h,
        px.l,
        e_h,
        e_l,
        pop,
        eco.taste.zeta,
    )?;
    let w = ByClass::try_from_fn(|c| wage(eco, &blocks, c, s.get(c), px.get(c.skill), nu))?;
    let mut jcc = BySkill::splat(0.0);
    for skill in Skill::ALL {
        let m = vacancy_market(eco, skill, theta.get(skill), &u, &w, px.get(skill))?;
        *jcc.get_mut(skill) = m.job_creation_residual(&blocks.costs) / px.get(skill);
    }
    Ok(InnerState {
        unknowns: UnknownVector {
            e,
            u,
            w,
            theta,
            prices,
            nu,
        },
        jcc,
    })
}

/// Starting point: unit tightness, prices at full employment and wages at
/// 70% of value added.
pub fn initial_guess(eco: &Economy, theta: BySkill<f64>) -> Result<UnknownVector> {
    let est = &eco.estimated;
    let cal = &eco.calibrated;
    let fiscal = eco.fiscal();
    let s = ByClass::try_from_fn(|c| job_finding_rate(eco, c, theta.get(c.skill)))?;
    let mut e = ByClass::splat(0.0);
    let mut u = ByClass::splat(0.0);
    for class in WorkerClass::ALL {
        let (ec, uc) = stocks(eco, class, s.get(class))?;
        *e.get_mut(class) = ec;
        *u.get_mut(class) = uc;
    }
    let prices: RealPrices = equilibrium_prices(
        est.x_h,
        est.x_l,
        cal.sigma.skill_total(Skill::High),
        cal.sigma.skill_total(Skill::Low),
        &eco.prefs(),
        fiscal.g_h,
        fiscal.g_l,
    )?;
    let px = BySkill {
        h: prices.p_h * est.x_h,
        l: prices.p_l * est.x_l,
    };
    let w = ByClass::from_fn(|c| 0.7 * px.get(c.skill));
    let pop = cal.population(resident_nonnatives(&e, &u));
    let nu = public_goods(
        fiscal.g_h,
        fiscal.g_l,
        px.h,
        px.l,
        e.skill_total(Skill::High),
        e.skill_total(Skill::Low),
        pop,
        eco.taste.zeta,
    )?;
    Ok(UnknownVector {
        e,
        u,
        w,
        theta,
        prices,
        nu,
    })
}
