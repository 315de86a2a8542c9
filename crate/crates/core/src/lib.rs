//! Two-good general-equilibrium search-and-matching model of immigration.
//!
//! Natives and non-natives, high- and low-skilled, search for jobs in two
//! skill-specific labour markets; wages are Nash-bargained, firms face vacancy
//! and firing costs, and the two goods are combined by CES preferences. The
//! crate solves the steady state, calibrates external parameters from raw
//! series, estimates the free parameters by simulated moments and runs
//! immigration counterfactuals.
//!
//! ```
//! use migrant_ge::{equilibrium::{solve_equilibrium, SolverConfig}, synthetic};
//!
//! let eco = synthetic::italy_like();
//! let sol = solve_equilibrium(&eco, &SolverConfig::default()).unwrap();
//! assert!(sol.residual_norm < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod classes;
pub mod counterfactual;
pub mod equilibrium;
pub mod error;
pub mod estimation;
pub mod fiscal;
pub mod io;
pub mod labor;
pub mod model;
pub mod optim;
pub mod params;
pub mod pipeline;
pub mod selftest;
pub mod synthetic;

pub use classes::{ByClass, BySkill, Origin, Skill, WorkerClass};
pub use equilibrium::{
    solve_equilibrium, EquilibriumSolution, SolverConfig, Strategy, UnknownVector,
};
pub use error::{IoError, ModelError};
pub use params::{CalibratedParameters, Economy, EstimatedParameters, TasteConfig};
