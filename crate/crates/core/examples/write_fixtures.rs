//! Writes a synthetic input set: a yearly CSV, an economy JSON, raw
//! calibration inputs and a pipeline manifest.
//!
//! ```text
//! cargo run --release --example write_fixtures -- fixtures
//! ```

use std::path::PathBuf;

use migrant_ge::io::{
    synthetic_bundle, write_json_file, write_year_inputs, RunManifest, ScenarioSpec, SCHEMA_VERSION,
};
use migrant_ge::{solve_equilibrium, synthetic, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let solver = SolverConfig::default();
    let base = synthetic::italy_like();

    // Non-native low-skilled stock growing over the years, everything else fixed.
    let mut bundles = Vec::new();
    for (i, year) in (2014..=2019).enumerate() {
        let mut eco = base;
        eco.calibrated.sigma.l_i *= 1.0 + 0.03 * i as f64;
        eco.calibrated.sigma.h_i *= 1.0 + 0.02 * i as f64;
        bundles.push(synthetic_bundle(year, &eco, &solver)?);
    }
    write_year_inputs(&dir.join("years.csv"), &bundles)?;
    write_json_file(&dir.join("economy.json"), &base)?;

    let sol = solve_equilibrium(&base, &solver)?;
    write_json_file(
        &dir.join("calibration_inputs.json"),
        &synthetic::calibration_inputs(2017, &base, &sol),
    )?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION.into(),
        inputs: vec!["years.csv".into()],
        years: Some(vec![2016, 2017]),
        taste: base.taste,
        solver,
        estimation: Default::default(),
        estimated: None,
        scenarios: vec![
            ScenarioSpec::Named("remove_all_nonnatives".into()),
            ScenarioSpec::Named("low_skilled_inflow".into()),
        ],
        epsilons: vec![1.0, 2.0],
        hp_lambda: None,
        output_dir: "out".into(),
        seed: 20_240_601,
    };
    write_json_file(&dir.join("manifest.json"), &manifest)?;
    println!("fixtures written to {}", dir.display());
    Ok(())
}
