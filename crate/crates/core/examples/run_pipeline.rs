//! Runs a manifest end to end: estimation, solution and scenarios for every
//! year, with one report directory per year and a cross-year summary.
//!
//! ```text
//! cargo run --release --example run_pipeline -- fixtures/manifest.json
//! ```

use migrant_ge::io::RunManifest;
use migrant_ge::pipeline::run_pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures/manifest.json".into());
    let manifest = RunManifest::load(path.as_ref())?;
    let summary = run_pipeline(&manifest)?;
    for y in &summary.years {
        println!(
            "{} ok={} objective={:?} gdp={:?} scenarios={}",
            y.year, y.ok, y.objective, y.gdp, y.scenarios_run
        );
    }
    for f in &summary.failures {
        println!("failed: {f:?}");
    }
    println!("reports in {}", manifest.output_dir.display());
    if !summary.success() {
        std::process::exit(1);
    }
    Ok(())
}
