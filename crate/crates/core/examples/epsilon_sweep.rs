//! The removal scenario at several elasticities of substitution between the
//! two goods, with the aggregate skill elasticity each one implies.

use migrant_ge::counterfactual::{epsilon_sweep, Scenario, DEFAULT_EPSILONS};
use migrant_ge::{synthetic, SolverConfig};

fn main() {
    env_logger::init();
    let eco = synthetic::italy_like();
    let reports = epsilon_sweep(
        &eco,
        &Scenario::remove_all_nonnatives(),
        &DEFAULT_EPSILONS,
        &SolverConfig::default(),
    );
    println!("epsilon   wage_h_N   wage_l_N       p_h       p_l       gdp     xi");
    for (eps, r) in DEFAULT_EPSILONS.iter().zip(reports) {
        match r {
            Ok(r) => println!(
                "{:>7} {:>+10.3} {:>+10.3} {:>+9.3} {:>+9.3} {:>+9.3} {:>6}",
                eps,
                r.change("wage_h_N"),
                r.change("wage_l_N"),
                r.change("p_h"),
                r.change("p_l"),
                r.change("gdp"),
                r.aggregate_elasticity()
                    .map(|x| format!("{x:.2}"))
                    .unwrap_or_else(|_| "-".into())
            ),
            Err(e) => println!("{eps:>7} failed: {e}"),
        }
    }
}
