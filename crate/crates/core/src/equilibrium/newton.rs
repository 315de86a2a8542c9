//! Damped Newton on the full 17-equation system.
//!
//! Tightness and prices are iterated in logs; the Jacobian is built from
//! central differences and factorized with LU.

use nalgebra::{DMatrix, DVector};

use crate::error::{ModelError, Result};
use crate::model::{THETA_MAX, THETA_MIN};
use crate::params::Economy;

use super::system::residual_vector;
use super::{SolverConfig, UnknownVector};

const LOG_SLOTS: [usize; 4] = [12, 13, 14, 15];

fn to_z(x: &UnknownVector) -> [f64; 17] {
    let mut z = x.to_array();
    for k in LOG_SLOTS {
        z[k] = z[k].ln();
    }
    z
}

fn from_z(z: &[f64; 17]) -> UnknownVector {
    let mut a = *z;
    for k in LOG_SLOTS {
        a[k] = a[k].exp();
    }
    UnknownVector::from_array(&a)
}

fn clamp_theta(z: &mut [f64; 17]) -> bool {
    let (lo, hi) = (THETA_MIN.ln(), THETA_MAX.ln());
    let mut hit = false;
    for k in [12, 13] {
        if z[k] < lo {
            z[k] = lo;
            hit = true;
        } else if z[k] > hi {
            z[k] = hi;
            hit = true;
        }
    }
    hit
}

fn eval(z: &[f64; 17], eco: &Economy) -> [f64; 17] {
    residual_vector(&from_z(z), eco)
}

fn inf_norm(r: &[f64; 17]) -> f64 {
    r.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn two_norm(r: &[f64; 17]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn jacobian(z: &[f64; 17], eco: &Economy) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(17, 17);
    for j in 0..17 {
        let h = 1e-6 * z[j].abs().max(1.0);
        let mut zp = *z;
        let mut zm = *z;
        zp[j] += h;
        zm[j] -= h;
        let (fp, fm) = (eval(&zp, eco), eval(&zm, eco));
        for i in 0..17 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

pub struct NewtonOutcome {
    pub unknowns: UnknownVector,
    pub residual: f64,
    pub iterations: usize,
}

pub fn solve(eco: &Economy, start: &UnknownVector, cfg: &SolverConfig) -> Result<NewtonOutcome> {
    let mut z = to_z(start);
    clamp_theta(&mut z);
    let mut f = eval(&z, eco);
    let mut norm = inf_norm(&f);
    let mut polish = 0;
    let mut iterations = 0;
    let give_up = |z: &[f64; 17], norm: f64, iterations: usize| ModelError::NoConvergence {
        iterations,
        best_residual: norm,
        best_iterate: Some(Box::new(from_z(z))),
    };

    while iterations < cfg.max_iterations {
        if norm < cfg.tolerance {
            // A few extra steps buy several digits on the unknowns for free.
            if polish >= 3 || norm < 1e-3 * cfg.tolerance {
                break;
            }
            polish += 1;
        }
        iterations += 1;
        let jac = jacobian(&z, eco);
        let rhs = DVector::from_iterator(17, f.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(give_up(&z, norm, iterations));
        };
        if step.iter().any(|v| !v.is_finite()) {
            return Err(give_up(&z, norm, iterations));
        }
        let base = two_norm(&f);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let mut trial = z;
            for k in 0..17 {
                trial[k] += lambda * step[k];
            }
            clamp_theta(&mut trial);
            let ft = eval(&trial, eco);
            if two_norm(&ft) < base * (1.0 - 1e-4 * lambda) {
                accepted = Some((trial, ft));
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((zt, ft)) => {
                z = zt;
                f = ft;
                norm = inf_norm(&f);
            }
            None if norm < cfg.tolerance => break,
            None => return Err(give_up(&z, norm, iterations)),
        }
        log::trace!("newton iter {iterations}: residual {norm:.3e}, step {lambda}");
    }
    if norm < cfg.tolerance {
        Ok(NewtonOutcome {
            unknowns: from_z(&z),
            residual: norm,
            iterations,
        })
    } else {
        Err(give_up(&z, norm, iterations))
    }
}
