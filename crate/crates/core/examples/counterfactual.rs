//! Removing all non-natives and adding low-skilled non-natives: aggregate and
//! main delta tables, winners and losers, and the firm-value elasticity test.

use migrant_ge::counterfactual::{
    firm_value_elasticity_test, run_scenario, winners_losers, Scenario,
};
use migrant_ge::{synthetic, SolverConfig, WorkerClass};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let eco = synthetic::italy_like();
    let solver = SolverConfig::default();
    for scenario in [
        Scenario::remove_all_nonnatives(),
        Scenario::low_skilled_inflow(),
    ] {
        let r = run_scenario(&eco, &scenario, &solver)?;
        println!("== {} (epsilon {})", r.scenario.name, r.epsilon);
        for d in r.aggregate_deltas.iter().chain(&r.main_deltas) {
            println!(
                "  {:<16} {:>12.4} {:>12.4} {:>+9.3}",
                d.key, d.baseline, d.scenario, d.change
            );
        }
        println!("  winners and losers:");
        for w in winners_losers(&r) {
            println!(
                "    {:?} {:<4} {:>+8.3}%",
                w.agent,
                w.class.tag(),
                w.pct_change
            );
        }
        if let Ok(xi) = r.aggregate_elasticity() {
            println!("  aggregate elasticity {xi:.3}");
        }
    }
    let d = firm_value_elasticity_test(&eco, WorkerClass::L_I, 0.05, &solver)?;
    println!("== 5% more low-skilled non-natives");
    for c in WorkerClass::ALL {
        println!(
            "  {:<4} wage elasticity {:>+8.4} predicted rise {:<5} direct change {:>+10.6}",
            c.tag(),
            d.wage.get(c),
            d.predicted_rise.get(c),
            d.direct_change.get(c)
        );
    }
    Ok(())
}
