//! Synthetic economies used by the examples, tests and the selftest.
//!
//! `italy_like` sits inside the ranges of the calibrated series for Italy in
//! the late 2010s: monthly rates, stocks in millions, money in thousand euro
//! per month.

use rand::Rng;

use std::collections::BTreeMap;

use crate::calibration::{
    simulate_flow_observation, CalibrationInputs, CourtFlows, FiringCostInputs, InflowInputs,
    TaxInputs, TrialFlow, VacancyCostInputs,
};
use crate::classes::{ByClass, BySkill, Skill, WorkerClass};
use crate::equilibrium::EquilibriumSolution;
use crate::params::{CalibratedParameters, Economy, EstimatedParameters, TasteConfig};

pub fn italy_like_calibrated() -> CalibratedParameters {
    CalibratedParameters {
        r: 0.01,
        phi: 0.3,
        alpha: 0.4,
        c: 8.0,
        firing_cost: 0.5,
        delta: ByClass::from_array([0.005, 0.012, 0.008, 0.02]),
        chi: 5.0,
        sigma: ByClass::from_array([7.5, 15.5, 0.2, 2.6]),
        g: 0.2,
        b: 0.4,
        tau: 0.2,
        t_p: 0.15,
        eta: 0.009,
        lambda: 0.0088,
        ip: 35.0,
        g_h: None,
        g_l: None,
        ssc_wedge: 0.33,
    }
}

pub fn italy_like_estimated() -> EstimatedParameters {
    EstimatedParameters {
        beta: 0.13,
        gamma: 0.335,
        x_h: 12.0,
        x_l: 4.0,
        t: 0.505,
        kappa: ByClass::from_array([0.5, 0.35, 0.4, 0.45]),
        w_fc: BySkill { h: 100.0, l: 40.0 },
    }
}

/// Italy-like baseline with Cobb-Douglas preferences.
pub fn italy_like() -> Economy {
    Economy {
        calibrated: italy_like_calibrated(),
        estimated: italy_like_estimated(),
        taste: TasteConfig::default(),
    }
}

/// The same baseline at a different elasticity of substitution.
pub fn italy_like_with_epsilon(epsilon: f64) -> Economy {
    let mut eco = italy_like();
    eco.taste.rho = 1.0 - 1.0 / epsilon;
    eco
}

/// Two mirror-image skill markets with natives and non-natives alike and no
/// return migration.
pub fn symmetric(rho: f64) -> Economy {
    Economy {
        calibrated: CalibratedParameters {
            r: 0.01,
            phi: 0.3,
            alpha: 0.4,
            c: 8.0,
            firing_cost: 0.5,
            delta: ByClass::splat(0.01),
            chi: 4.0,
            sigma: ByClass::from_array([10.0, 10.0, 2.0, 2.0]),
            g: 0.2,
            b: 0.4,
            tau: 0.2,
            t_p: 0.15,
            eta: 0.01,
            lambda: 0.0,
            ip: 30.0,
            g_h: None,
            g_l: None,
            ssc_wedge: 0.3,
        },
        estimated: EstimatedParameters {
            beta: 0.15,
            gamma: 0.5,
            x_h: 3.0,
            x_l: 3.0,
            t: 0.5,
            kappa: ByClass::splat(0.4),
            w_fc: BySkill::splat(80.0),
        },
        taste: TasteConfig {
            rho,
            ..TasteConfig::default()
        },
    }
}

/// A random perturbation of `italy_like`: every calibrated rate and stock is
/// scaled by up to 25%, the estimated parameters are drawn inside plausible
/// ranges and the elasticity of substitution lies in `[0.5, 2]`.
pub fn random_draw<R: Rng>(rng: &mut R) -> Economy {
    let mut eco = italy_like();
    let scale = |rng: &mut R| rng.gen_range(0.8..1.25);
    let cal = &mut eco.calibrated;
    cal.delta = cal.delta.map(|d| d * scale(rng));
    cal.sigma = cal.sigma.map(|s| s * scale(rng));
    cal.c *= scale(rng);
    cal.firing_cost *= scale(rng);
    cal.eta *= scale(rng);
    cal.lambda *= scale(rng);
    cal.b *= scale(rng);
    eco.estimated = EstimatedParameters {
        beta: rng.gen_range(0.08..0.2),
        gamma: rng.gen_range(0.25..0.45),
        x_h: rng.gen_range(9.0..15.0),
        x_l: rng.gen_range(3.0..5.5),
        t: rng.gen_range(0.45..0.55),
        kappa: ByClass::from_fn(|_| rng.gen_range(0.25..0.6)),
        w_fc: BySkill {
            h: rng.gen_range(60.0..150.0),
            l: rng.gen_range(25.0..60.0),
        },
    };
    let epsilon: f64 = rng.gen_range(0.5..2.0);
    eco.taste.rho = 1.0 - 1.0 / epsilon;
    eco
}

/// Raw calibration inputs consistent with a solved economy: labour-force
/// flows generated from its job-finding and separation rates, non-native
/// stocks and inflows from its steady state, and plausible firing, vacancy
/// and tax data.
pub fn calibration_inputs(
    year: i32,
    eco: &Economy,
    sol: &EquilibriumSolution,
) -> CalibrationInputs {
    let x = &sol.unknowns;
    let flows = ByClass::from_fn(|c: WorkerClass| {
        let (e, u) = (x.e.get(c), x.u.get(c));
        simulate_flow_observation(
            u,
            e + u,
            sol.job_finding_rate(eco, c),
            eco.calibrated.delta.get(c),
        )
    });
    let nonnative = |v: &ByClass<f64>| {
        BySkill::from_fn(|s: Skill| v.get(WorkerClass::new(s, crate::Origin::NonNative)))
    };
    let trend: Vec<f64> = (0..12)
        .map(|i| 100.0 + 1.5 * i as f64 + if i % 2 == 0 { 0.8 } else { -0.8 })
        .collect();
    CalibrationInputs {
        year,
        flows,
        firing: FiringCostInputs {
            p_f: 0.1,
            p_s: 0.3,
            p_w: 0.5,
            p_a: 0.5,
            n_fd: 12.0,
            n_a: 24.0,
            ss: 4.0 / 12.0,
            pp: 3.0 / 12.0,
            sp: 15.0,
            lc: 3.0,
            levy: 1.0,
            wage_to_va: 0.7,
        },
        courts: Some(CourtFlows {
            first_degree: TrialFlow {
                settled: 1000.0,
                pending_prev: 9500.0,
                ensued: 1000.0,
            },
            appeal: TrialFlow {
                settled: 200.0,
                pending_prev: 4600.0,
                ensued: 200.0,
            },
        }),
        vacancy: VacancyCostInputs {
            kappa_q_monthly: 0.6,
            direct_cost: 0.5,
            opportunity_cost: 1.0,
            p_tilde_x_monthly: 3.5,
        },
        tax: TaxInputs {
            w_bar: 2.4,
            t_avg: 0.129,
            t_marginal: 0.309,
        },
        inflow: InflowInputs {
            tii: eco.calibrated.eta * (eco.calibrated.sigma.h_i + eco.calibrated.sigma.l_i),
            lambda: eco.calibrated.lambda,
            employed: nonnative(&x.e),
            unemployed: nonnative(&x.u),
        },
        series: BTreeMap::from([("gdp_index".to_string(), trend)]),
        hp_lambda: 100.0,
    }
}
