//! Nested bisection on the two tightnesses.
//!
//! Given `theta_l`, the high-skilled job-creation residual is driven to zero
//! by bisection in `ln theta_h`; the outer loop bisects `ln theta_l` on the
//! low-skilled residual evaluated at that inner root. Everything else follows
//! in closed form, so the result also serves as an independent check on the
//! Newton solver.

use crate::classes::{BySkill, Skill};
use crate::error::{ModelError, Result};
use crate::model::{THETA_MAX, THETA_MIN};
use crate::params::Economy;

use super::system::{evaluate_at_theta, InnerState};

const GROWTH: f64 = 4.0;
const MAX_BISECTIONS: usize = 200;

/// Brackets and bisects a root of `f` in `ln theta`, starting from `start`.
/// `f` is expected to be positive for small tightness and negative for large.
fn root_in_log_theta(
    market: &'static str,
    start: f64,
    evals: &mut usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<f64> {
    let (lo_lim, hi_lim) = (THETA_MIN.ln(), THETA_MAX.ln());
    let mut x0 = start.clamp(THETA_MIN, THETA_MAX).ln();
    let f0 = f(x0)?;
    *evals += 1;
    let step = GROWTH.ln();
    let (mut lo, mut hi);
    if f0 > 0.0 {
        loop {
            if x0 >= hi_lim {
                return Err(ModelError::BoundaryHit {
                    market,
                    theta: THETA_MAX,
                });
            }
            let x1 = (x0 + step).min(hi_lim);
            let f1 = f(x1)?;
            *evals += 1;
            if f1 <= 0.0 {
                lo = x0;
                hi = x1;
                break;
            }
            x0 = x1;
        }
    } else {
        loop {
            if x0 <= lo_lim {
                return Err(ModelError::BoundaryHit {
                    market,
                    theta: THETA_MIN,
                });
            }
            let x1 = (x0 - step).max(lo_lim);
            let f1 = f(x1)?;
            *evals += 1;
            if f1 > 0.0 {
                lo = x1;
                hi = x0;
                break;
            }
            x0 = x1;
        }
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        *evals += 1;
        if fm == 0.0 {
            return Ok(mid.exp());
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

pub struct NestedOutcome {
    pub state: InnerState,
    pub evaluations: usize,
}

pub fn solve(eco: &Economy, start: BySkill<f64>) -> Result<NestedOutcome> {
    let mut evals = 0usize;
    let mut inner_evals = 0usize;
    let mut theta_h_guess = start.h;
    let inner = |theta_l: f64, guess: f64, count: &mut usize| -> Result<f64> {
        root_in_log_theta("high-skilled", guess, count, |lh| {
            let st = evaluate_at_theta(
                eco,
                BySkill {
                    h: lh.exp(),
                    l: theta_l,
                },
            )?;
            Ok(st.jcc.get(Skill::High))
        })
    };
    let theta_l = root_in_log_theta("low-skilled", start.l, &mut evals, |ll| {
        let th = inner(ll.exp(), theta_h_guess, &mut inner_evals)?;
        theta_h_guess = th;
        let st = evaluate_at_theta(eco, BySkill { h: th, l: ll.exp() })?;
        Ok(st.jcc.get(Skill::Low))
    })?;
    let theta_h = inner(theta_l, theta_h_guess, &mut inner_evals)?;
    let state = evaluate_at_theta(
        eco,
        BySkill {
            h: theta_h,
            l: theta_l,
        },
    )?;
    Ok(NestedOutcome {
        state,
        evaluations: evals + inner_evals,
    })
}
