//! Immigration counterfactuals: re-solve with perturbed stocks, everything
//! else held fixed, and compare the two steady states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, BySkill, Origin, Skill, WorkerClass};
use crate::equilibrium::{solve_equilibrium, EquilibriumSolution, SolverConfig};
use crate::error::{ModelError, Result};
use crate::params::Economy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    RemoveAllNonnatives,
    StockShock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    /// Change in working-age stocks, millions.
    pub delta_sigma: ByClass<f64>,
    /// Change in the non-working population, millions.
    pub delta_ip: f64,
}

impl Scenario {
    pub fn remove_all_nonnatives() -> Self {
        Scenario {
            name: "remove_all_nonnatives".into(),
            kind: ScenarioKind::RemoveAllNonnatives,
            delta_sigma: ByClass::splat(0.0),
            delta_ip: 0.0,
        }
    }

    pub fn stock_shock(name: &str, delta_sigma: ByClass<f64>, delta_ip: f64) -> Self {
        Scenario {
            name: name.into(),
            kind: ScenarioKind::StockShock,
            delta_sigma,
            delta_ip,
        }
    }

    /// 135 thousand low-skilled non-natives of working age and 26 thousand
    /// outside the workforce.
    pub fn low_skilled_inflow() -> Self {
        let mut d = ByClass::splat(0.0);
        d.l_i = 0.135;
        Self::stock_shock("low_skilled_inflow", d, 0.026)
    }

    pub fn null() -> Self {
        Self::stock_shock("null", ByClass::splat(0.0), 0.0)
    }

    /// Looks up a scenario by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "remove_all_nonnatives" | "remove" => Ok(Self::remove_all_nonnatives()),
            "low_skilled_inflow" | "shock" => Ok(Self::low_skilled_inflow()),
            "null" => Ok(Self::null()),
            other => Err(ModelError::param(
                "scenario",
                format!(
                    "unknown scenario '{other}' (remove_all_nonnatives, low_skilled_inflow, null)"
                ),
            )),
        }
    }

    /// The economy with the scenario's stocks.
    pub fn apply(&self, eco: &Economy) -> Result<Economy> {
        let mut out = *eco;
        let cal = &mut out.calibrated;
        if self.kind == ScenarioKind::RemoveAllNonnatives {
            cal.sigma.h_i = 0.0;
            cal.sigma.l_i = 0.0;
        }
        for class in WorkerClass::ALL {
            let v = cal.sigma.get(class) + self.delta_sigma.get(class);
            if v < 0.0 {
                return Err(ModelError::param(
                    format!("sigma_{}", class.tag()),
                    format!("scenario leaves a negative stock ({v})"),
                ));
            }
            *cal.sigma.get_mut(class) = v;
        }
        cal.ip += self.delta_ip;
        if cal.ip < 0.0 {
            return Err(ModelError::param(
                "ip",
                "scenario leaves a negative population",
            ));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaKind {
    Percent,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub key: String,
    pub label: String,
    pub kind: DeltaKind,
    pub baseline: f64,
    pub scenario: f64,
    /// Percentage change, or plain difference for [`DeltaKind::Absolute`].
    pub change: f64,
}

impl DeltaRow {
    fn new(
        key: impl Into<String>,
        label: impl Into<String>,
        kind: DeltaKind,
        b: f64,
        s: f64,
    ) -> Self {
        DeltaRow {
            key: key.into(),
            label: label.into(),
            kind,
            baseline: b,
            scenario: s,
            change: change(kind, b, s),
        }
    }

    /// Scenario minus baseline, in levels.
    pub fn level_change(&self) -> f64 {
        self.scenario - self.baseline
    }
}

fn change(kind: DeltaKind, b: f64, s: f64) -> f64 {
    match kind {
        DeltaKind::Absolute => s - b,
        DeltaKind::Percent => {
            if s == b {
                0.0
            } else {
                100.0 * (s - b) / b.abs()
            }
        }
    }
}

/// Headline aggregates of one equilibrium, billions per month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub gdp: f64,
    pub gdp_per_worker: f64,
    pub direct_taxes: f64,
    pub indirect_taxes: f64,
    pub social_security: f64,
    pub public_goods: f64,
}

impl Aggregates {
    pub fn of(eco: &Economy, sol: &EquilibriumSolution) -> Self {
        let gdp = sol.gdp(eco);
        Aggregates {
            gdp,
            gdp_per_worker: gdp / sol.employment(),
            direct_taxes: sol.accounts.dt,
            indirect_taxes: sol.accounts.it,
            social_security: sol.ssc(eco),
            public_goods: sol.unknowns.nu,
        }
    }
}

fn class_label(class: WorkerClass) -> String {
    let skill = match class.skill {
        Skill::High => "high-skilled",
        Skill::Low => "low-skilled",
    };
    let origin = match class.origin {
        Origin::Native => "natives",
        Origin::NonNative => "non-natives",
    };
    format!("{skill} {origin}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualReport {
    pub scenario: Scenario,
    pub epsilon: f64,
    pub baseline_economy: Economy,
    pub scenario_economy: Economy,
    pub baseline: EquilibriumSolution,
    pub counterfactual: EquilibriumSolution,
    /// GDP, direct and indirect taxes and contributions.
    pub aggregate_deltas: Vec<DeltaRow>,
    /// The 24 per-variable rows.
    pub main_deltas: Vec<DeltaRow>,
}

impl CounterfactualReport {
    pub fn delta(&self, key: &str) -> Option<&DeltaRow> {
        self.aggregate_deltas
            .iter()
            .chain(&self.main_deltas)
            .find(|r| r.key == key)
    }

    /// Percentage or absolute change for `key`; panics on unknown keys.
    pub fn change(&self, key: &str) -> f64 {
        self.delta(key)
            .unwrap_or_else(|| panic!("no delta row '{key}'"))
            .change
    }

    /// Recomputes every delta from the two embedded solutions.
    pub fn recompute(&self) -> (Vec<DeltaRow>, Vec<DeltaRow>) {
        build_deltas(
            &self.baseline_economy,
            &self.baseline,
            &self.scenario_economy,
            &self.counterfactual,
        )
    }

    /// Aggregate elasticity of substitution between the two legs, measured
    /// from the leg with fewer workers: native wages against skill totals.
    pub fn aggregate_elasticity(&self) -> Result<f64> {
        let (few, many, few_eco, many_eco) = if self.scenario_economy.calibrated.sigma.sum()
            < self.baseline_economy.calibrated.sigma.sum()
        {
            (
                &self.counterfactual,
                &self.baseline,
                &self.scenario_economy,
                &self.baseline_economy,
            )
        } else {
            (
                &self.baseline,
                &self.counterfactual,
                &self.baseline_economy,
                &self.scenario_economy,
            )
        };
        let pct = |a: f64, b: f64| 100.0 * (b - a) / a;
        let sig = |e: &Economy, s| e.calibrated.sigma.skill_total(s);
        aggregate_elasticity(
            pct(few.unknowns.w.h_n, many.unknowns.w.h_n),
            pct(few.unknowns.w.l_n, many.unknowns.w.l_n),
            pct(sig(few_eco, Skill::High), sig(many_eco, Skill::High)),
            pct(sig(few_eco, Skill::Low), sig(many_eco, Skill::Low)),
        )
    }
}

fn build_deltas(
    be: &Economy,
    b: &EquilibriumSolution,
    se: &Economy,
    s: &EquilibriumSolution,
) -> (Vec<DeltaRow>, Vec<DeltaRow>) {
    use DeltaKind::*;
    let (ab, as_) = (Aggregates::of(be, b), Aggregates::of(se, s));
    let aggregate = vec![
        DeltaRow::new("gdp", "Monthly GDP", Percent, ab.gdp, as_.gdp),
        DeltaRow::new(
            "direct_taxes",
            "Direct taxes",
            Percent,
            ab.direct_taxes,
            as_.direct_taxes,
        ),
        DeltaRow::new(
            "indirect_taxes",
            "Indirect taxes",
            Percent,
            ab.indirect_taxes,
            as_.indirect_taxes,
        ),
        DeltaRow::new(
            "social_security",
            "Social security contributions",
            Percent,
            ab.social_security,
            as_.social_security,
        ),
    ];
    let mut main = vec![
        DeltaRow::new(
            "gdp_per_worker",
            "Real GDP per worker",
            Percent,
            ab.gdp_per_worker,
            as_.gdp_per_worker,
        ),
        DeltaRow::new(
            "public_goods",
            "Public goods",
            Percent,
            ab.public_goods,
            as_.public_goods,
        ),
    ];
    let order = [
        WorkerClass::H_N,
        WorkerClass::H_I,
        WorkerClass::L_N,
        WorkerClass::L_I,
    ];
    for c in order {
        main.push(DeltaRow::new(
            format!("wage_{}", c.tag()),
            format!("Wages of {}", class_label(c)),
            Percent,
            b.unknowns.w.get(c),
            s.unknowns.w.get(c),
        ));
    }
    for c in order {
        main.push(DeltaRow::new(
            format!("unemployment_{}", c.tag()),
            format!("Unemployment rate of {} (absolute change)", class_label(c)),
            Absolute,
            b.unemployment_rate(c),
            s.unemployment_rate(c),
        ));
    }
    for c in order {
        main.push(DeltaRow::new(
            format!("W_e_{}", c.tag()),
            format!("Lifetime utility of employed {}", class_label(c)),
            Percent,
            b.values.w_e.get(c),
            s.values.w_e.get(c),
        ));
    }
    for c in order {
        main.push(DeltaRow::new(
            format!("W_u_{}", c.tag()),
            format!("Lifetime utility of unemployed {}", class_label(c)),
            Percent,
            b.values.w_u.get(c),
            s.values.w_u.get(c),
        ));
    }
    for c in order {
        main.push(DeltaRow::new(
            format!("J_{}", c.tag()),
            format!("Lifetime utility of employers hiring {}", class_label(c)),
            Percent,
            b.values.j.get(c),
            s.values.j.get(c),
        ));
    }
    main.push(DeltaRow::new(
        "p_h",
        "Price of high-skilled good",
        Percent,
        b.unknowns.prices.p_h,
        s.unknowns.prices.p_h,
    ));
    main.push(DeltaRow::new(
        "p_l",
        "Price of low-skilled good",
        Percent,
        b.unknowns.prices.p_l,
        s.unknowns.prices.p_l,
    ));
    (aggregate, main)
}

/// Solves both legs and assembles the report.
pub fn run_scenario(
    baseline: &Economy,
    scenario: &Scenario,
    solver: &SolverConfig,
) -> Result<CounterfactualReport> {
    let scenario_eco = scenario.apply(baseline)?;
    let (b, s) = rayon::join(
        || solve_equilibrium(baseline, solver),
        || solve_equilibrium(&scenario_eco, solver),
    );
    let (b, s) = (b?, s?);
    let (aggregate_deltas, main_deltas) = build_deltas(baseline, &b, &scenario_eco, &s);
    Ok(CounterfactualReport {
        scenario: scenario.clone(),
        epsilon: baseline.taste.epsilon(),
        baseline_economy: *baseline,
        scenario_economy: scenario_eco,
        baseline: b,
        counterfactual: s,
        aggregate_deltas,
        main_deltas,
    })
}

/// The same scenario at several elasticities of substitution.
pub fn epsilon_sweep(
    baseline: &Economy,
    scenario: &Scenario,
    epsilons: &[f64],
    solver: &SolverConfig,
) -> Vec<Result<CounterfactualReport>> {
    epsilons
        .par_iter()
        .map(|&eps| {
            let mut eco = *baseline;
            eco.taste = eco.taste.at_epsilon(eps)?;
            run_scenario(&eco, scenario, solver)
        })
        .collect()
}

pub const DEFAULT_EPSILONS: [f64; 5] = [0.5, 0.9, 1.0, 1.1, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agent {
    Employed,
    Unemployed,
    Employer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelfareRow {
    pub agent: Agent,
    pub class: WorkerClass,
    pub baseline: f64,
    pub scenario: f64,
    pub pct_change: f64,
}

/// Percentage changes in lifetime values for every worker class and for
/// employers by market and hire origin.
pub fn winners_losers(report: &CounterfactualReport) -> Vec<WelfareRow> {
    let (b, s) = (&report.baseline.values, &report.counterfactual.values);
    let mut rows = Vec::with_capacity(12);
    for (agent, pick) in [
        (Agent::Employed, (&b.w_e, &s.w_e)),
        (Agent::Unemployed, (&b.w_u, &s.w_u)),
        (Agent::Employer, (&b.j, &s.j)),
    ] {
        for class in WorkerClass::ALL {
            let (vb, vs) = (pick.0.get(class), pick.1.get(class));
            rows.push(WelfareRow {
                agent,
                class,
                baseline: vb,
                scenario: vs,
                pct_change: change(DeltaKind::Percent, vb, vs),
            });
        }
    }
    rows
}

/// `-(dsigma_h - dsigma_l) / (dw_h - dw_l)`, all in percent.
pub fn aggregate_elasticity(
    dw_h_pct: f64,
    dw_l_pct: f64,
    dsigma_h_pct: f64,
    dsigma_l_pct: f64,
) -> Result<f64> {
    let den = dw_h_pct - dw_l_pct;
    if den == 0.0 || !den.is_finite() {
        return Err(ModelError::domain(
            "aggregate_elasticity",
            "wage changes are equal, the elasticity is undefined",
        ));
    }
    Ok(-(dsigma_h_pct - dsigma_l_pct) / den)
}

/// Finite-difference responses to a small change in one class's stock and
/// the firm-value inequality tests built from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticityDiagnostics {
    pub perturbed: WorkerClass,
    pub relative_step: f64,
    /// Elasticities of the wages with respect to the perturbed stock.
    pub wage: ByClass<f64>,
    /// Elasticities of the real prices.
    pub price: BySkill<f64>,
    /// Inequality test: filled-job value rises with the stock.
    pub predicted_rise: ByClass<bool>,
    /// `J(+h) - J(-h)` from full re-solves.
    pub direct_change: ByClass<f64>,
    /// Aggregate elasticity of substitution implied by the two legs.
    pub aggregate: Option<f64>,
}

impl ElasticityDiagnostics {
    /// Classes where the inequality and the re-solved sign disagree, ignoring
    /// changes inside finite-difference noise.
    pub fn disagreements(&self, noise: f64) -> Vec<WorkerClass> {
        WorkerClass::ALL
            .into_iter()
            .filter(|&c| {
                let d = self.direct_change.get(c);
                d.abs() > noise && (d > 0.0) != self.predicted_rise.get(c)
            })
            .collect()
    }
}

/// Central-difference elasticities around `eco` for a relative change of
/// `relative_step` in the stock of `perturbed`.
pub fn firm_value_elasticity_test(
    eco: &Economy,
    perturbed: WorkerClass,
    relative_step: f64,
    solver: &SolverConfig,
) -> Result<ElasticityDiagnostics> {
    if !(relative_step > 0.0 && relative_step < 0.5) {
        return Err(ModelError::domain(
            "firm_value_elasticity_test",
            format!("perturbation must lie in (0, 0.5), got {relative_step}"),
        ));
    }
    let sigma0 = eco.calibrated.sigma.get(perturbed);
    if !(sigma0 > 0.0) {
        return Err(ModelError::domain(
            "firm_value_elasticity_test",
            format!("stock of {} is zero", perturbed.tag()),
        ));
    }
    let leg = |sign: f64| {
        let mut e = *eco;
        *e.calibrated.sigma.get_mut(perturbed) = sigma0 * (1.0 + sign * relative_step);
        solve_equilibrium(&e, solver).map(|s| (e, s))
    };
    let ((up_eco, up), (dn_eco, dn)) = {
        let (a, b) = rayon::join(|| leg(1.0), || leg(-1.0));
        (a?, b?)
    };
    let dlnsig = (1.0 + relative_step).ln() - (1.0 - relative_step).ln();
    let el = |a: f64, b: f64| (a.ln() - b.ln()) / dlnsig;
    let wage = ByClass::from_fn(|c| el(up.unknowns.w.get(c), dn.unknowns.w.get(c)));
    let price = BySkill::from_fn(|s| el(up.unknowns.price(s), dn.unknowns.price(s)));
    let cal = &eco.calibrated;
    let t = eco.estimated.t;
    let mid = solve_equilibrium(eco, solver)?;
    let predicted_rise = ByClass::from_fn(|c| {
        let x = mid.unknowns.value_added(eco, c.skill);
        let w = mid.unknowns.w.get(c);
        let delta = cal.delta.get(c);
        price.get(c.skill) * (1.0 - t - delta * cal.firing_cost) * x > wage.get(c) * (1.0 - t) * w
    });
    let direct_change = ByClass::from_fn(|c| up.values.j.get(c) - dn.values.j.get(c));
    let pct = |a: f64, b: f64| 100.0 * (a - b) / b;
    let aggregate = aggregate_elasticity(
        pct(up.unknowns.w.h_n, dn.unknowns.w.h_n),
        pct(up.unknowns.w.l_n, dn.unknowns.w.l_n),
        pct(
            up_eco.calibrated.sigma.skill_total(Skill::High),
            dn_eco.calibrated.sigma.skill_total(Skill::High),
        ),
        pct(
            up_eco.calibrated.sigma.skill_total(Skill::Low),
            dn_eco.calibrated.sigma.skill_total(Skill::Low),
        ),
    )
    .ok();
    Ok(ElasticityDiagnostics {
        perturbed,
        relative_step,
        wage,
        price,
        predicted_rise,
        direct_change,
        aggregate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn table_22_rows() {
        let rows = [
            (8.11, -3.50, 1.38),
            (16.67, -8.07, 0.64),
            (9.07, -4.02, 1.22),
            (7.33, -3.10, 1.53),
            (3.66, -1.13, 3.34),
        ];
        for (wh, wl, xi) in rows {
            let v = aggregate_elasticity(wh, wl, 5.0, 21.0).unwrap();
            assert!((v - xi).abs() <= 0.01, "{wh} {wl}: {v} vs {xi}");
        }
        assert!(aggregate_elasticity(2.0, 2.0, 5.0, 21.0).is_err());
    }

    #[test]
    fn null_scenario_is_exactly_zero() {
        let eco = synthetic::italy_like();
        let r = run_scenario(&eco, &Scenario::null(), &SolverConfig::default()).unwrap();
        assert_eq!(r.main_deltas.len(), 24);
        assert_eq!(r.aggregate_deltas.len(), 4);
        assert!(r
            .aggregate_deltas
            .iter()
            .chain(&r.main_deltas)
            .all(|d| d.change == 0.0));
        assert!(winners_losers(&r).iter().all(|w| w.pct_change == 0.0));
    }

    #[test]
    fn removal_sign_pattern() {
        let eco = synthetic::italy_like();
        let r = run_scenario(
            &eco,
            &Scenario::remove_all_nonnatives(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.change("wage_l_N") > 0.0);
        assert!(r.change("p_l") > 0.0);
        assert!(r.change("wage_h_N") < 0.0);
        assert!(r.change("p_h") < 0.0);
        assert!(r.change("gdp") < 0.0);
        assert!(r.change("direct_taxes") < 0.0);
        assert!(r.change("indirect_taxes") < 0.0);
        let (a, m) = r.recompute();
        assert_eq!(a, r.aggregate_deltas);
        assert_eq!(m, r.main_deltas);
    }

    #[test]
    fn inflow_winners_and_losers() {
        let eco = synthetic::italy_like();
        let r = run_scenario(
            &eco,
            &Scenario::low_skilled_inflow(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.change("gdp") > 0.0);
        assert!((r.change("direct_taxes") - r.change("gdp")).abs() < 0.05);
        let rows = winners_losers(&r);
        let employed = |c: WorkerClass| {
            rows.iter()
                .find(|w| w.agent == Agent::Employed && w.class == c)
                .unwrap()
                .pct_change
        };
        assert!(employed(WorkerClass::H_N) > 0.0);
        assert!(employed(WorkerClass::L_N) < 0.0);
        assert!(employed(WorkerClass::H_N).abs() > employed(WorkerClass::L_N).abs());
    }

    #[test]
    fn inequality_matches_resolved_sign() {
        let eco = synthetic::italy_like();
        let d = firm_value_elasticity_test(&eco, WorkerClass::L_I, 1e-3, &SolverConfig::default())
            .unwrap();
        assert!(d.disagreements(1e-8).is_empty(), "{d:?}");
        assert!(d.direct_change.l_n < 0.0 && d.direct_change.h_n > 0.0);
        assert!(
            firm_value_elasticity_test(&eco, WorkerClass::L_I, 0.0, &SolverConfig::default())
                .is_err()
        );
    }

    #[test]
    fn symmetric_perturbations_mirror() {
        let eco = synthetic::symmetric(0.0);
        let cfg = SolverConfig::default();
        let h = firm_value_elasticity_test(&eco, WorkerClass::H_N, 1e-3, &cfg).unwrap();
        let l = firm_value_elasticity_test(&eco, WorkerClass::L_N, 1e-3, &cfg).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-7 * a.abs().max(1e-3);
        assert!(close(h.wage.h_n, l.wage.l_n) && close(h.wage.l_n, l.wage.h_n));
        assert!(close(h.wage.h_i, l.wage.l_i) && close(h.wage.l_i, l.wage.h_i));
        assert!(close(h.price.h, l.price.l) && close(h.price.l, l.price.h));
        assert_eq!(h.predicted_rise.h_n, l.predicted_rise.l_n);
        assert_eq!(h.predicted_rise.l_i, l.predicted_rise.h_i);
    }

    #[test]
    fn negative_stocks_rejected() {
        let eco = synthetic::italy_like();
        let mut d = ByClass::splat(0.0);
        d.h_i = -10.0;
        let s = Scenario::stock_shock("bad", d, 0.0);
        assert!(s.apply(&eco).is_err());
        assert!(Scenario::by_name("nope").is_err());
    }
}
