//! Derivative-free minimization on the unit box: projected Nelder-Mead with
//! restarts, a coordinate pattern search to polish, and scrambled Halton
//! starting points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `count` Halton points in `[0,1)^dim`, shifted modulo 1 by a random vector
/// drawn from `seed`.
pub fn scrambled_halton(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract())
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Stop when the simplex values spread less than this.
    pub f_tol: f64,
    /// Stop when the simplex is smaller than this in every coordinate.
    pub x_tol: f64,
    pub max_evaluations: usize,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
    /// Edge of the first simplex, in box units.
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            f_tol: 1e-14,
            x_tol: 1e-9,
            max_evaluations: 20_000,
            restarts: 4,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

struct Counted<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn nelder_mead_once<F: Fn(&[f64]) -> f64>(
    fun: &mut Counted<F>,
    x0: &[f64],
    step: f64,
    cfg: &OptimizerConfig,
) -> (Vec<f64>, f64, bool) {
    let n = x0.len();
    let nf = n as f64;
    // Dimension-adapted coefficients.
    let (reflect, expand, contract, shrink) =
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut base = x0.to_vec();
    project(&mut base);
    simplex.push(base.clone());
    for i in 0..n {
        let mut p = base.clone();
        p[i] = if p[i] + step <= 1.0 {
            p[i] + step
        } else {
            p[i] - step
        };
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| fun.eval(p)).collect();
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = (1..=n)
            .flat_map(|i| (0..n).map(move |d| (i, d)))
            .map(|(i, d)| (simplex[i][d] - simplex[0][d]).abs())
            .fold(0.0, f64::max);
        if (spread.abs() <= cfg.f_tol && size <= cfg.x_tol.sqrt()) || size <= cfg.x_tol {
            return (simplex[0].clone(), values[0], true);
        }
        if fun.evals >= cfg.max_evaluations {
            return (simplex[0].clone(), values[0], false);
        }

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|p| p[d]).sum::<f64>() / nf)
            .collect();
        let along = |coef: f64| {
            let mut p: Vec<f64> = (0..n)
                .map(|d| centroid[d] + coef * (centroid[d] - simplex[n][d]))
                .collect();
            project(&mut p);
            p
        };
        let xr = along(reflect);
        let fr = fun.eval(&xr);
        if fr < values[0] {
            let xe = along(reflect * expand);
            let fe = fun.eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(reflect * contract);
            let fc = fun.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-contract);
            let fc = fun.eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (v, b) in simplex[i].iter_mut().zip(&best) {
                *v = b + shrink * (*v - b);
            }
            values[i] = fun.eval(&simplex[i]);
        }
    }
}

/// Projected Nelder-Mead from `x0`, restarted around the incumbent until a
/// restart no longer improves it.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], cfg: &OptimizerConfig) -> Minimum {
    let mut fun = Counted { f, evals: 0 };
    let (mut x, mut value, mut converged) = nelder_mead_once(&mut fun, x0, cfg.initial_step, cfg);
    let mut step = cfg.initial_step;
    for _ in 0..cfg.restarts {
        if fun.evals >= cfg.max_evaluations {
            break;
        }
        step = (step * 0.5).max(1e-4);
        let (x2, v2, c2) = nelder_mead_once(&mut fun, &x, step, cfg);
        let improved = v2 < value - cfg.f_tol.max(1e-15 * value.abs());
        if v2 < value {
            x = x2;
            value = v2;
            converged = c2;
        }
        if !improved {
            break;
        }
    }
    Minimum {
        x,
        value,
        evaluations: fun.evals,
        converged,
    }
}

/// Coordinate pattern search from `start`, halving the step on failure.
pub fn coordinate_refine<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &Minimum,
    initial_step: f64,
    min_step: f64,
    max_evaluations: usize,
) -> Minimum {
    let mut fun = Counted { f, evals: 0 };
    let mut x = start.x.clone();
    let mut value = start.value;
    let mut step = initial_step;
    while step >= min_step && fun.evals < max_evaluations {
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] = (y[d] + dir * step).clamp(0.0, 1.0);
                if y[d] == x[d] {
                    continue;
                }
                let v = fun.eval(&y);
                if v < value {
                    x = y;
                    value = v;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Minimum {
        x,
        value,
        evaluations: start.evaluations + fun.evals,
        converged: start.converged,
    }
}
