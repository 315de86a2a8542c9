//! Solves the Italy-like synthetic steady state and prints the unknowns and
//! the post-hoc identity checks.

use migrant_ge::equilibrium::UnknownVector;
use migrant_ge::{solve_equilibrium, synthetic, SolverConfig, WorkerClass};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let eco = synthetic::italy_like();
    let sol = solve_equilibrium(&eco, &SolverConfig::default())?;
    println!("solved by {:?} in {} iterations", sol.path, sol.iterations);
    for (name, v) in UnknownVector::NAMES.iter().zip(sol.unknowns.to_array()) {
        println!("  {name:<8} {v:>14.6}");
    }
    println!("class  unemployment  job finding  net wage");
    for c in WorkerClass::ALL {
        println!(
            "  {:<4} {:>12.4} {:>12.4} {:>9.4}",
            c.tag(),
            sol.unemployment_rate(c),
            sol.job_finding_rate(&eco, c),
            sol.net_wage(&eco, c)
        );
    }
    println!(
        "GDP {:.3} bn/month, labour share {:.3}",
        sol.gdp(&eco),
        sol.labour_share()
    );
    println!("{:#?}", sol.verification);
    Ok(())
}
