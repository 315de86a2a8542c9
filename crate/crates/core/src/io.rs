//! File formats: yearly input CSV, run manifest, and report files.
//!
//! Yearly inputs are one wide CSV with a header row and one row per year.
//! Every row carries `schema_version` and `year`, the calibrated parameters
//! and the seventeen observed moments. Units: monthly rates, stocks in
//! millions of persons, wages in thousand euro per month, GDP in billion euro
//! per month. Row numbers in errors count data rows from 1.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classes::ByClass;
use crate::counterfactual::{CounterfactualReport, DeltaRow, Scenario};
use crate::equilibrium::{EquilibriumSolution, SolverConfig};
use crate::error::{IoError, ModelError};
use crate::estimation::{EstimateResult, EstimationConfig, MomentVector};
use crate::params::{CalibratedParameters, Economy, EstimatedParameters, TasteConfig};

pub const SCHEMA_VERSION: &str = "1";

/// How a column is checked.
#[derive(Clone, Copy)]
enum Unit {
    /// Monthly rate in (0,1).
    MonthlyRate,
    /// Fraction in [0,1).
    Share,
    /// Millions of persons.
    Millions,
    /// Thousand euro per month.
    Money,
    /// Multiple of value added.
    Ratio,
    /// Billion euro per month.
    Billions,
    /// Moment rate in (0,1).
    MomentRate,
    /// Native share in (0,1].
    NativeShare,
}

const CALIBRATED_COLUMNS: [(&str, Unit); 22] = [
    ("r", Unit::MonthlyRate),
    ("phi", Unit::Share),
    ("alpha", Unit::Share),
    ("c", Unit::Ratio),
    ("firing_cost", Unit::Ratio),
    ("delta_h_N", Unit::MonthlyRate),
    ("delta_l_N", Unit::MonthlyRate),
    ("delta_h_I", Unit::MonthlyRate),
    ("delta_l_I", Unit::MonthlyRate),
    ("chi", Unit::Millions),
    ("sigma_h_N", Unit::Millions),
    ("sigma_l_N", Unit::Millions),
    ("sigma_h_I", Unit::Millions),
    ("sigma_l_I", Unit::Millions),
    ("g", Unit::Share),
    ("b", Unit::Share),
    ("tau", Unit::Money),
    ("t_p", Unit::Share),
    ("eta", Unit::MonthlyRate),
    ("lambda", Unit::MonthlyRate),
    ("ip", Unit::Millions),
    ("ssc_wedge", Unit::Ratio),
];

const OPTIONAL_COLUMNS: [(&str, Unit); 2] = [("g_h", Unit::Share), ("g_l", Unit::Share)];

fn moment_unit(index: usize) -> Unit {
    match index {
        0..=3 | 14 => Unit::Money,
        4..=12 => Unit::MomentRate,
        13 => Unit::Billions,
        _ => Unit::NativeShare,
    }
}

/// One year of validated inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearInputBundle {
    pub year: i32,
    pub calibrated: CalibratedParameters,
    pub moments: MomentVector,
}

fn check_unit(row: usize, field: &str, v: f64, unit: Unit) -> Result<(), IoError> {
    let range = |detail: String| IoError::RangeViolation {
        row,
        field: field.to_string(),
        detail,
    };
    let mismatch = |detail: &str| IoError::UnitMismatch {
        row,
        field: field.to_string(),
        detail: format!("{detail}, got {v}"),
    };
    if !v.is_finite() {
        return Err(range(format!("{v} is not finite")));
    }
    match unit {
        Unit::MonthlyRate => {
            if v >= 1.0 {
                return Err(mismatch(
                    "expected a monthly rate in (0,1), not an annual or percentage figure",
                ));
            }
            if v <= 0.0 {
                return Err(range(format!("{v} must be positive")));
            }
        }
        Unit::Share => {
            if v > 1.0 && v <= 100.0 {
                return Err(mismatch("expected a fraction, not a percentage"));
            }
            if !(0.0..1.0).contains(&v) {
                return Err(range(format!("{v} must lie in [0,1)")));
            }
        }
        Unit::Millions => {
            if v > 1000.0 {
                return Err(mismatch("expected millions of persons"));
            }
            if v < 0.0 {
                return Err(range(format!("{v} must be non-negative")));
            }
        }
        Unit::Money => {
            if v > 100.0 {
                return Err(mismatch("expected thousand euro per month"));
            }
            if v < 0.0 {
                return Err(range(format!("{v} must be non-negative")));
            }
        }
        Unit::Ratio => {
            if v < 0.0 {
                return Err(range(format!("{v} must be non-negative")));
            }
        }
        Unit::Billions => {
            if v > 1e5 {
                return Err(mismatch("expected billion euro per month"));
            }
            if v <= 0.0 {
                return Err(range(format!("{v} must be positive")));
            }
        }
        Unit::MomentRate => {
            if !(v > 0.0 && v < 1.0) {
                return Err(range(format!("{v} must lie in (0,1)")));
            }
        }
        Unit::NativeShare => {
            if !(v > 0.0 && v <= 1.0) {
                return Err(range(format!("{v} must lie in (0,1]")));
            }
        }
    }
    Ok(())
}

fn collapse(mut errs: Vec<IoError>) -> IoError {
    if errs.len() == 1 {
        errs.pop().expect("one error")
    } else {
        IoError::Invalid(errs)
    }
}

/// Parses and validates the yearly input file. Every problem found is
/// reported; a single problem is returned as itself.
pub fn load_year_inputs(path: &Path) -> Result<Vec<YearInputBundle>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let index: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();

    let mut required: Vec<&str> = vec!["schema_version", "year"];
    required.extend(CALIBRATED_COLUMNS.iter().map(|(n, _)| *n));
    required.extend(MomentVector::NAMES);
    let missing: Vec<IoError> = required
        .iter()
        .filter(|n| !index.contains_key(*n))
        .map(|n| IoError::MissingField(n.to_string()))
        .collect();
    if !missing.is_empty() {
        return Err(collapse(missing));
    }

    let mut out = Vec::new();
    let mut errs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let version = rec.get(index["schema_version"]).unwrap_or("");
        if version != SCHEMA_VERSION {
            return Err(IoError::SchemaVersion {
                found: version.to_string(),
                expected: SCHEMA_VERSION.to_string(),
            });
        }
        let mut row_errs = Vec::new();
        let mut num = |field: &str, unit: Option<Unit>| -> Option<f64> {
            let raw = index.get(field).and_then(|&k| rec.get(k)).unwrap_or("");
            if raw.is_empty() {
                if unit.is_some() {
                    row_errs.push(IoError::MissingField(field.to_string()));
                }
                return None;
            }
            match raw.parse::<f64>() {
                Ok(v) => {
                    if let Some(u) = unit {
                        if let Err(e) = check_unit(row, field, v, u) {
                            row_errs.push(e);
                        }
                    }
                    Some(v)
                }
                Err(_) => {
                    row_errs.push(IoError::Parse {
                        row,
                        field: field.to_string(),
                        value: raw.to_string(),
                    });
                    None
                }
            }
        };
        let year = num("year", None);
        let cal: Vec<Option<f64>> = CALIBRATED_COLUMNS
            .iter()
            .map(|(n, u)| num(n, Some(*u)))
            .collect();
        let opt: Vec<Option<f64>> = OPTIONAL_COLUMNS
            .iter()
            .map(|(n, u)| {
                if index.contains_key(n) {
                    let raw = rec.get(index[n]).unwrap_or("");
                    if raw.is_empty() {
                        None
                    } else {
                        num(n, Some(*u))
                    }
                } else {
                    None
                }
            })
            .collect();
        let moments: Vec<Option<f64>> = MomentVector::NAMES
            .iter()
            .enumerate()
            .map(|(k, n)| num(n, Some(moment_unit(k))))
            .collect();
        if year.is_none() {
            row_errs.push(IoError::MissingField("year".into()));
        }
        if !row_errs.is_empty() {
            errs.extend(row_errs);
            continue;
        }
        let c: Vec<f64> = cal.into_iter().map(|v| v.expect("checked")).collect();
        let calibrated = CalibratedParameters {
            r: c[0],
            phi: c[1],
            alpha: c[2],
            c: c[3],
            firing_cost: c[4],
            delta: ByClass::from_array([c[5], c[6], c[7], c[8]]),
            chi: c[9],
            sigma: ByClass::from_array([c[10], c[11], c[12], c[13]]),
            g: c[14],
            b: c[15],
            tau: c[16],
            t_p: c[17],
            eta: c[18],
            lambda: c[19],
            ip: c[20],
            ssc_wedge: c[21],
            g_h: opt[0],
            g_l: opt[1],
        };
        if let Err(e) = calibrated.validate() {
            errs.push(model_to_row(row, e));
            continue;
        }
        let mut m = [0.0; 17];
        for (k, v) in moments.into_iter().enumerate() {
            m[k] = v.expect("checked");
        }
        let moments = MomentVector::from_array(&m);
        if let Err(e) = moments.validate() {
            errs.push(model_to_row(row, e));
            continue;
        }
        out.push(YearInputBundle {
            year: year.expect("checked") as i32,
            calibrated,
            moments,
        });
    }
    if !errs.is_empty() {
        return Err(collapse(errs));
    }
    Ok(out)
}

fn model_to_row(row: usize, e: ModelError) -> IoError {
    match e {
        ModelError::InvalidParameter { field, detail } => {
            IoError::RangeViolation { row, field, detail }
        }
        other => IoError::RangeViolation {
            row,
            field: "moments".into(),
            detail: other.to_string(),
        },
    }
}

/// The header of the yearly input file.
pub fn year_input_header() -> Vec<&'static str> {
    let mut h = vec!["schema_version", "year"];
    h.extend(CALIBRATED_COLUMNS.iter().map(|(n, _)| *n));
    h.extend(OPTIONAL_COLUMNS.iter().map(|(n, _)| *n));
    h.extend(MomentVector::NAMES);
    h
}

/// Writes bundles in the yearly input format.
pub fn write_year_inputs(path: &Path, bundles: &[YearInputBundle]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(year_input_header())?;
    for b in bundles {
        let c = &b.calibrated;
        let mut rec = vec![SCHEMA_VERSION.to_string(), b.year.to_string()];
        let vals = [
            c.r,
            c.phi,
            c.alpha,
            c.c,
            c.firing_cost,
            c.delta.h_n,
            c.delta.l_n,
            c.delta.h_i,
            c.delta.l_i,
            c.chi,
            c.sigma.h_n,
            c.sigma.l_n,
            c.sigma.h_i,
            c.sigma.l_i,
            c.g,
            c.b,
            c.tau,
            c.t_p,
            c.eta,
            c.lambda,
            c.ip,
            c.ssc_wedge,
        ];
        rec.extend(vals.iter().map(|v| v.to_string()));
        for o in [c.g_h, c.g_l] {
            rec.push(o.map(|v| v.to_string()).unwrap_or_default());
        }
        rec.extend(b.moments.to_array().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Everything a pipeline run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: String,
    /// Yearly input files, relative to the manifest.
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub years: Option<Vec<i32>>,
    #[serde(default)]
    pub taste: TasteConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    /// Skip estimation and use these parameters for every year.
    #[serde(default)]
    pub estimated: Option<EstimatedParameters>,
    /// Scenario names or full scenario records.
    #[serde(default)]
    pub scenarios: Vec<ScenarioSpec>,
    /// Elasticities for the scenario sweep; empty means the taste setting only.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// HP smoothing of the moment series across years.
    #[serde(default)]
    pub hp_lambda: Option<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Named(String),
    Full(Scenario),
}

impl ScenarioSpec {
    pub fn resolve(&self) -> Result<Scenario, ModelError> {
        match self {
            ScenarioSpec::Named(n) => Scenario::by_name(n),
            ScenarioSpec::Full(s) => Ok(s.clone()),
        }
    }
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = fs::read_to_string(path)?;
        let mut m: RunManifest = serde_json::from_str(&text)?;
        if m.schema_version != SCHEMA_VERSION {
            return Err(IoError::SchemaVersion {
                found: m.schema_version,
                expected: SCHEMA_VERSION.into(),
            });
        }
        let base = path.parent().unwrap_or(Path::new("."));
        for p in m.inputs.iter_mut() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if m.output_dir.is_relative() {
            m.output_dir = base.join(&m.output_dir);
        }
        for p in &m.inputs {
            if !p.exists() {
                return Err(IoError::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("input file {} not found", p.display()),
                )));
            }
        }
        Ok(m)
    }
}

/// Everything produced for one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearReport {
    pub schema_version: String,
    pub year: i32,
    pub seed: u64,
    pub economy: Economy,
    pub equilibrium: EquilibriumSolution,
    pub estimation: Option<EstimateResult>,
    pub counterfactuals: Vec<CounterfactualReport>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Filename stem for one scenario at one elasticity.
pub fn scenario_stem(report: &CounterfactualReport) -> String {
    format!("{}_eps{}", report.scenario.name, report.epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table4Row {
    pub variable: String,
    pub key: String,
    pub pct_change: f64,
    /// Billion euro per month.
    pub absolute_change: f64,
    pub baseline: f64,
    pub scenario: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table5Row {
    pub variable: String,
    pub key: String,
    pub kind: crate::counterfactual::DeltaKind,
    pub change: f64,
    pub baseline: f64,
    pub scenario: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub year: i32,
    pub scenario: String,
    pub epsilon: f64,
    pub table: String,
    pub key: String,
    pub kind: crate::counterfactual::DeltaKind,
    pub baseline: f64,
    pub scenario_value: f64,
    pub change: f64,
}

fn table4(rows: &[DeltaRow]) -> Vec<Table4Row> {
    rows.iter()
        .map(|d| Table4Row {
            variable: d.label.clone(),
            key: d.key.clone(),
            pct_change: d.change,
            absolute_change: d.level_change(),
            baseline: d.baseline,
            scenario: d.scenario,
        })
        .collect()
}

fn table5(rows: &[DeltaRow]) -> Vec<Table5Row> {
    rows.iter()
        .map(|d| Table5Row {
            variable: d.label.clone(),
            key: d.key.clone(),
            kind: d.kind,
            change: d.change,
            baseline: d.baseline,
            scenario: d.scenario,
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for r in rdr.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

/// Writes the report set for one year into `dir` and returns the paths.
///
/// `equilibrium.json` always; `estimation.json` when an estimate exists; for
/// each counterfactual a JSON record, `table4_*.csv` and `table5_*.csv`; and
/// `long.csv` with every delta in long format when there is at least one
/// counterfactual.
pub fn write_report(report: &YearReport, dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let eq = dir.join("equilibrium.json");
    write_json(
        &eq,
        &serde_json::json!({
            "schema_version": report.schema_version,
            "year": report.year,
            "seed": report.seed,
            "economy": report.economy,
            "solution": report.equilibrium,
        }),
    )?;
    written.push(eq);
    if let Some(est) = &report.estimation {
        let p = dir.join("estimation.json");
        write_json(&p, est)?;
        written.push(p);
    }
    let mut long = Vec::new();
    for cf in &report.counterfactuals {
        let stem = scenario_stem(cf);
        let p = dir.join(format!("counterfactual_{stem}.json"));
        write_json(&p, cf)?;
        written.push(p);
        let p4 = dir.join(format!("table4_{stem}.csv"));
        write_csv(&p4, &table4(&cf.aggregate_deltas))?;
        written.push(p4);
        let p5 = dir.join(format!("table5_{stem}.csv"));
        write_csv(&p5, &table5(&cf.main_deltas))?;
        written.push(p5);
        for (table, rows) in [
            ("aggregate", &cf.aggregate_deltas),
            ("main", &cf.main_deltas),
        ] {
            for d in rows {
                long.push(LongRow {
                    year: report.year,
                    scenario: cf.scenario.name.clone(),
                    epsilon: cf.epsilon,
                    table: table.into(),
                    key: d.key.clone(),
                    kind: d.kind,
                    baseline: d.baseline,
                    scenario_value: d.scenario,
                    change: d.change,
                });
            }
        }
    }
    if !long.is_empty() {
        let p = dir.join("long.csv");
        write_csv(&p, &long)?;
        written.push(p);
    }
    Ok(written)
}

/// Writes a standalone equilibrium record.
pub fn write_solution(
    path: &Path,
    eco: &Economy,
    sol: &EquilibriumSolution,
) -> Result<(), IoError> {
    write_json(
        path,
        &serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "economy": eco,
            "solution": sol,
        }),
    )
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_json(path, value)
}

pub fn read_json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// A yearly input bundle built from a synthetic economy and its own moments.
pub fn synthetic_bundle(
    year: i32,
    eco: &Economy,
    solver: &SolverConfig,
) -> Result<YearInputBundle, ModelError> {
    let moments = crate::estimation::simulated_moments(eco, solver)?;
    Ok(YearInputBundle {
        year,
        calibrated: eco.calibrated,
        moments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counterfactual::run_scenario;
    use crate::synthetic;

    fn fixture(dir: &Path) -> PathBuf {
        let eco = synthetic::italy_like();
        let b = synthetic_bundle(2017, &eco, &SolverConfig::default()).unwrap();
        let p = dir.join("years.csv");
        write_year_inputs(&p, &[b]).unwrap();
        p
    }

    fn rewrite(path: &Path, column: &str, value: Option<&str>) {
        let mut rdr = csv::Reader::from_path(path).unwrap();
        let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        let rows: Vec<Vec<String>> = rdr
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect();
        let k = headers.iter().position(|h| h == column).unwrap();
        let mut w = csv::Writer::from_path(path).unwrap();
        let keep = |v: &Vec<String>| -> Vec<String> {
            v.iter()
                .enumerate()
                .filter(|(i, _)| value.is_some() || *i != k)
                .map(|(_, s)| s.clone())
                .collect()
        };
        w.write_record(keep(&headers)).unwrap();
        for mut r in rows {
            if let Some(v) = value {
                r[k] = v.to_string();
            }
            w.write_record(keep(&r)).unwrap();
        }
        w.flush().unwrap();
    }

    #[test]
    fn happy_path_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = fixture(dir.path());
        let b = load_year_inputs(&p).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].year, 2017);
        assert_eq!(b[0].calibrated, synthetic::italy_like_calibrated());
        assert_eq!(b[0].moments.to_array().len(), 17);
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = fixture(dir.path());
        rewrite(&p, "delta_l_I", None);
        match load_year_inputs(&p) {
            Err(IoError::MissingField(f)) => assert_eq!(f, "delta_l_I"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_and_unit_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = fixture(dir.path());
        rewrite(&p, "unemployment_l_N", Some("1.3"));
        match load_year_inputs(&p) {
            Err(IoError::RangeViolation { row, field, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(field, "unemployment_l_N");
            }
            other => panic!("{other:?}"),
        }
        let p = fixture(dir.path());
        rewrite(&p, "sigma_l_N", Some("15500000"));
        assert!(matches!(
            load_year_inputs(&p),
            Err(IoError::UnitMismatch { .. })
        ));
        let p = fixture(dir.path());
        rewrite(&p, "schema_version", Some("0"));
        assert!(matches!(
            load_year_inputs(&p),
            Err(IoError::SchemaVersion { .. })
        ));
        let p = fixture(dir.path());
        rewrite(&p, "delta_h_N", Some("0.3x"));
        assert!(matches!(load_year_inputs(&p), Err(IoError::Parse { .. })));
    }

    #[test]
    fn several_problems_are_all_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = fixture(dir.path());
        rewrite(&p, "unemployment_l_N", Some("1.3"));
        rewrite(&p, "t_p", Some("15"));
        match load_year_inputs(&p) {
            Err(IoError::Invalid(v)) => assert_eq!(v.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let eco = synthetic::italy_like();
        let cfg = SolverConfig::default();
        let sol = crate::equilibrium::solve_equilibrium(&eco, &cfg).unwrap();
        let cf = run_scenario(&eco, &Scenario::low_skilled_inflow(), &cfg).unwrap();
        let mut report = YearReport {
            schema_version: SCHEMA_VERSION.into(),
            year: 2017,
            seed: 1,
            economy: eco,
            equilibrium: sol,
            estimation: None,
            counterfactuals: vec![],
        };
        let files = write_report(&report, dir.path()).unwrap();
        assert_eq!(files.len(), 1);

        report.counterfactuals.push(cf.clone());
        let out = dir.path().join("with_cf");
        write_report(&report, &out).unwrap();
        let t5: Vec<Table5Row> =
            read_csv(&out.join(format!("table5_{}.csv", scenario_stem(&cf)))).unwrap();
        assert_eq!(t5.len(), 24);
        for (r, d) in t5.iter().zip(&cf.main_deltas) {
            assert!((r.change - d.change).abs() <= 1e-12 * d.change.abs().max(1.0));
            assert_eq!(r.change, d.change);
        }
        let t4: Vec<Table4Row> =
            read_csv(&out.join(format!("table4_{}.csv", scenario_stem(&cf)))).unwrap();
        assert_eq!(t4.len(), 4);
        let back: CounterfactualReport =
            read_json_file(&out.join(format!("counterfactual_{}.json", scenario_stem(&cf))))
                .unwrap();
        assert_eq!(back.main_deltas, cf.main_deltas);
        let long: Vec<LongRow> = read_csv(&out.join("long.csv")).unwrap();
        assert_eq!(long.len(), 28);
    }
}
