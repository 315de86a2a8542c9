//! Invariant suite run by `migrant-ge selftest`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    average_tax_rate, shimer_rates, simulate_flow_observation, tax_subsidy, LOW_WAGE_SHARE,
};
use crate::counterfactual::{aggregate_elasticity, run_scenario, Scenario};
use crate::equilibrium::{solve_equilibrium, SolverConfig, Strategy};
use crate::fiscal::equilibrium_prices;
use crate::model::{demand, price_index, PreferenceConfig, RealPrices};
use crate::synthetic;
use crate::WorkerClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub draws: usize,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Runs every identity check on `draws` random economies plus the fixed
/// arithmetic checks.
pub fn run_selftest(draws: usize, seed: u64) -> SelftestReport {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let newton = SolverConfig::with_strategy(Strategy::Newton);
    let nested = SolverConfig::with_strategy(Strategy::FixedPoint);
    let (mut solved, mut budget, mut clearing, mut flow, mut gap, mut slowest) =
        (0, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..draws {
        let eco = synthetic::random_draw(&mut rng);
        let t0 = std::time::Instant::now();
        let Ok(a) = solve_equilibrium(&eco, &newton) else {
            continue;
        };
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        solved += 1;
        let v = a.verification;
        budget = budget.max(v.budget.abs());
        clearing = clearing.max(v.clearing_h.abs()).max(v.clearing_l.abs());
        flow = flow.max(v.flow_balance);
        if let Ok(b) = solve_equilibrium(&eco, &nested) {
            gap = gap.max(a.unknowns.max_relative_gap(&b.unknowns));
        } else {
            gap = f64::INFINITY;
        }
    }
    let enough = solved * 10 >= draws * 9;
    checks.push(check(
        "solvable draws",
        enough,
        format!("{solved} of {draws}"),
    ));
    checks.push(check(
        "budget balance",
        enough && budget < 1e-8,
        format!("max {budget:.3e}"),
    ));
    checks.push(check(
        "goods clearing",
        enough && clearing < 1e-8,
        format!("max {clearing:.3e}"),
    ));
    checks.push(check(
        "flow balance",
        enough && flow < 1e-9,
        format!("max {flow:.3e}"),
    ));
    checks.push(check(
        "newton vs nested",
        enough && gap < 1e-8 && slowest < 1.0,
        format!("max gap {gap:.3e}, slowest solve {slowest:.3}s"),
    ));

    let xi = [
        aggregate_elasticity(8.11, -3.50, 5.0, 21.0),
        aggregate_elasticity(16.67, -8.07, 5.0, 21.0),
        aggregate_elasticity(3.66, -1.13, 5.0, 21.0),
    ];
    let want = [1.38, 0.64, 3.34];
    let ok = xi
        .iter()
        .zip(want)
        .all(|(x, w)| matches!(x, Ok(v) if (v - w).abs() <= 0.01));
    checks.push(check("aggregate elasticity", ok, format!("{xi:?}")));

    let shimer = (|| {
        let (q, d) = (0.07, 0.011);
        let obs = simulate_flow_observation(2.5, 25.0, q, d);
        let r = shimer_rates(&obs).ok()?;
        Some((r.finding_rate - q).abs().max((r.exit_rate - d).abs()))
    })();
    checks.push(check(
        "shimer round trip",
        matches!(shimer, Some(e) if e < 1e-10),
        format!("{shimer:?}"),
    ));

    let tax = tax_subsidy(1.0, 0.129, 0.309).map(|ts| {
        let w = LOW_WAGE_SHARE;
        (average_tax_rate(w, ts.tau, 0.309) - 0.129).abs()
    });
    checks.push(check(
        "tax subsidy",
        matches!(tax, Ok(e) if e < 1e-12),
        format!("{tax:?}"),
    ));

    let mut cd = 0.0f64;
    for rho in [1e-7, -1e-7] {
        let a = PreferenceConfig::new(0.0, 0.335, 1.0, 1.0).unwrap();
        let b = PreferenceConfig::new(rho, 0.335, 1.0, 1.0).unwrap();
        let p = RealPrices { p_h: 0.7, p_l: 1.3 };
        cd = cd.max(rel(
            price_index(0.7, 1.3, &b).unwrap(),
            price_index(0.7, 1.3, &a).unwrap(),
        ));
        let (da, db) = (demand(2.0, &p, &a).unwrap(), demand(2.0, &p, &b).unwrap());
        cd = cd.max(rel(db.d_h, da.d_h)).max(rel(db.d_l, da.d_l));
        let (pa, pb) = (
            equilibrium_prices(12.0, 4.0, 10.0, 17.0, &a, 0.2, 0.2).unwrap(),
            equilibrium_prices(12.0, 4.0, 10.0, 17.0, &b, 0.2, 0.2).unwrap(),
        );
        cd = cd.max(rel(pb.p_h, pa.p_h)).max(rel(pb.p_l, pa.p_l));
    }
    checks.push(check(
        "cobb-douglas limit",
        cd < 1e-5,
        format!("max {cd:.3e}"),
    ));

    let null = run_scenario(
        &synthetic::italy_like(),
        &Scenario::null(),
        &SolverConfig::default(),
    );
    let zero = null
        .as_ref()
        .map(|r| {
            r.main_deltas
                .iter()
                .chain(&r.aggregate_deltas)
                .all(|d| d.change == 0.0)
        })
        .unwrap_or(false);
    checks.push(check("null scenario", zero, String::new()));

    let removal = run_scenario(
        &synthetic::italy_like(),
        &Scenario::remove_all_nonnatives(),
        &SolverConfig::default(),
    );
    let signs = removal
        .as_ref()
        .map(|r| {
            r.change("p_l") > 0.0
                && r.change("p_h") < 0.0
                && r.change(&format!("wage_{}", WorkerClass::L_N.tag())) > 0.0
                && r.change(&format!("wage_{}", WorkerClass::H_N.tag())) < 0.0
                && r.change("gdp") < 0.0
        })
        .unwrap_or(false);
    checks.push(check("removal signs", signs, String::new()));

    SelftestReport {
        seed,
        draws,
        checks,
    }
}
