//! External calibration from raw yearly data: flow decomposition, firing and
//! vacancy costs, the tax subsidy, the non-native entry rate and HP trends.
//!
//! With a path argument the inputs are read from JSON, otherwise a synthetic
//! input set is generated from the Italy-like economy.

use migrant_ge::calibration::{calibrate_year, CalibrationInputs};
use migrant_ge::io::read_json_file;
use migrant_ge::{solve_equilibrium, synthetic, SolverConfig, WorkerClass};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inputs: CalibrationInputs = match std::env::args().nth(1) {
        Some(p) => read_json_file(p.as_ref())?,
        None => {
            let eco = synthetic::italy_like();
            let sol = solve_equilibrium(&eco, &SolverConfig::default())?;
            synthetic::calibration_inputs(2017, &eco, &sol)
        }
    };
    let out = calibrate_year(&inputs)?;
    println!("year {}", out.year);
    for c in WorkerClass::ALL {
        let r = out.rates.get(c);
        println!(
            "  {:<4} finding prob {:.4} rate {:.4}  exit prob {:.5} rate {:.5}",
            c.tag(),
            r.finding_prob,
            r.finding_rate,
            r.exit_prob,
            r.exit_rate
        );
    }
    println!("firing cost {:.4} of value added", out.firing_cost);
    if let Some((fd, a)) = out.trial_lengths {
        println!("trial lengths {fd:.2} and {a:.2} months");
    }
    println!("vacancy cost {:.4} of value added", out.vacancy_cost);
    println!(
        "tax subsidy {:.4}, no-tax threshold {:.4}",
        out.tax.tau, out.tax.no_tax_threshold
    );
    println!(
        "eta {:.5} (via employment {:.5}, gap {:.2e})",
        out.eta.eta, out.eta.via_employment, out.eta.gap
    );
    for (name, t) in &out.trends {
        println!("trend {name}: {:.2?}", t);
    }
    Ok(())
}
