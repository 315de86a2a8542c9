//! Labour-market block: bargained wages, steady-state stocks, the
//! job-creation condition and the lifetime values of workers and employers.
//!
//! All rates are monthly. `s` denotes a worker's job-finding rate
//! `kappa * theta^(1-alpha)` and `x` the real value added `p_tilde * x`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::fiscal::FiscalConfig;
use crate::model::matching_rates;

/// Per-class matching and separation rates plus the workforce stock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassRates {
    pub kappa: f64,
    pub delta: f64,
    pub sigma: f64,
}

impl ClassRates {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            return Err(ModelError::param("kappa", "must lie in (0,1]"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(ModelError::param("delta", "must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(ModelError::param("sigma", "must be non-negative"));
        }
        Ok(())
    }

    /// Job-finding rate `kappa * theta^(1-alpha)`.
    pub fn job_finding(&self, theta: f64, alpha: f64) -> Result<f64> {
        Ok(self.kappa * matching_rates(theta, alpha)?.theta_q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MigrationRates {
    pub eta: f64,
    pub lambda: f64,
}

/// Bargaining environment shared by all classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bargaining {
    pub r: f64,
    pub beta: f64,
    pub phi: f64,
}

impl Bargaining {
    fn validate(&self, fiscal: &FiscalConfig) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(ModelError::param("r", "must be positive"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ModelError::param("beta", "must lie in (0,1)"));
        }
        if !(0.0..1.0).contains(&fiscal.b) {
            return Err(ModelError::param("b", "must lie in [0,1)"));
        }
        if !(0.0..1.0).contains(&fiscal.t) {
            return Err(ModelError::param("t", "must lie in [0,1)"));
        }
        Ok(())
    }
}

/// `w = a*x - b*tau + c*x*F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NativeWageCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `w = d*x - e*tau + g*x*F + k*W_FC - h*iota*nu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonNativeWageCoefficients {
    pub d: f64,
    pub e: f64,
    pub g: f64,
    pub k: f64,
    pub h: f64,
}

pub fn native_wage_coefficients(
    bargain: &Bargaining,
    fiscal: &FiscalConfig,
    delta: f64,
    s: f64,
) -> Result<NativeWageCoefficients> {
    bargain.validate(fiscal)?;
    let Bargaining { r, beta, phi } = *bargain;
    let (b, t) = (fiscal.b, fiscal.t);
    let rd = r + delta;
    let den = rd * (1.0 - b * (1.0 - beta)) + beta * s;
    if !(den > 0.0) {
        return Err(ModelError::domain(
            "native_wage_coefficients",
            format!("non-positive denominator {den}"),
        ));
    }
    Ok(NativeWageCoefficients {
        a: beta * (rd + s) / den,
        b: (1.0 - beta) * rd * (1.0 - b) / den,
        c: (beta * r * (rd + s) + phi * rd * (1.0 - beta) * (r + s)) / ((1.0 - t) * den),
    })
}

pub fn nonnative_wage_coefficients(
    bargain: &Bargaining,
    fiscal: &FiscalConfig,
    delta: f64,
    s: f64,
    lambda: f64,
) -> Result<NonNativeWageCoefficients> {
    bargain.validate(fiscal)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ModelError::param("lambda", "must be non-negative"));
    }
    let Bargaining { r, beta, phi } = *bargain;
    let (b, t) = (fiscal.b, fiscal.t);
    let rd = r + delta;
    let den = rd * ((lambda + r) - r * b * (1.0 - beta)) + beta * r * s;
    if !(den > 0.0) {
        return Err(ModelError::domain(
            "nonnative_wage_coefficients",
            format!("non-positive denominator {den}"),
        ));
    }
    let m = rd * (r + lambda) + r * s;
    let net = (1.0 - t) * den;
    Ok(NonNativeWageCoefficients {
        d: beta * m / den,
        e: (1.0 - beta) * rd * ((1.0 - b) * r + lambda) / den,
        g: (phi * rd * (1.0 - beta) * r * (r + lambda + s) + beta * r * m) / net,
        k: lambda * r * (1.0 - beta) * rd / net,
        h: lambda * (1.0 - beta) * rd / net,
    })
}

/// Bargained real wage of a native worker.
pub fn wage_native(
    bargain: &Bargaining,
    fiscal: &FiscalConfig,
    delta: f64,
    s: f64,
    p_tilde_x: f64,
    firing_cost: f64,
) -> Result<f64> {
    let k = native_wage_coefficients(bargain, fiscal, delta, s)?;
    Ok(k.a * p_tilde_x - k.b * fiscal.tau_tilde + k.c * p_tilde_x * firing_cost)
}

/// Bargained real wage of a non-native worker.
#[allow(clippy::too_many_arguments)]
pub fn wage_nonnative(
    bargain: &Bargaining,
    fiscal: &FiscalConfig,
    delta: f64,
    s: f64,
    lambda: f64,
    p_tilde_x: f64,
    firing_cost: f64,
    w_fc: f64,
    iota_nu: f64,
) -> Result<f64> {
    let k = nonnative_wage_coefficients(bargain, fiscal, delta, s, lambda)?;
    Ok(
        k.d * p_tilde_x - k.e * fiscal.tau_tilde + k.g * p_tilde_x * firing_cost + k.k * w_fc
            - k.h * iota_nu,
    )
}

/// Employed and unemployed native stocks given the job-finding rate.
pub fn native_stocks_from_rate(sigma: f64, s: f64, delta: f64) -> Result<(f64, f64)> {
    if !(sigma >= 0.0 && s >= 0.0 && delta > 0.0) {
        return Err(ModelError::domain(
            "native_stocks",
            format!("need sigma >= 0, s >= 0, delta > 0; got ({sigma}, {s}, {delta})"),
        ));
    }
    let e = sigma * s / (delta + s);
    let u = sigma * delta / (delta + s);
    Ok((e, u))
}

pub fn native_stocks(
    sigma: f64,
    kappa: f64,
    theta: f64,
    alpha: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    let s = kappa * matching_rates(theta, alpha)?.theta_q;
    native_stocks_from_rate(sigma, s, delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonNativeStocks {
    pub e: f64,
    pub u: f64,
    /// Mass currently abroad.
    pub fc: f64,
}

pub fn nonnative_stocks_from_rate(
    sigma: f64,
    s: f64,
    delta: f64,
    migration: &MigrationRates,
) -> Result<NonNativeStocks> {
    let MigrationRates { eta, lambda } = *migration;
    if !(sigma >= 0.0 && s >= 0.0 && delta > 0.0 && lambda >= 0.0) {
        return Err(ModelError::domain(
            "nonnative_stocks",
            format!(
                "need sigma, s, lambda >= 0 and delta > 0; got ({sigma}, {s}, {delta}, {lambda})"
            ),
        ));
    }
    if !(eta > 0.0) {
        return Err(ModelError::DegenerateEconomy(format!(
            "non-native entry rate eta = {eta} leaves the whole non-native mass abroad"
        )));
    }
    let den = lambda * delta + eta * (s + delta);
    let e = sigma * eta * s / den;
    let u = sigma * eta * delta / den;
    let fc = sigma * lambda * delta / den;
    Ok(NonNativeStocks { e, u, fc })
}

pub fn nonnative_stocks(
    sigma: f64,
    kappa: f64,
    theta: f64,
    alpha: f64,
    delta: f64,
    migration: &MigrationRates,
) -> Result<NonNativeStocks> {
    let s = kappa * matching_rates(theta, alpha)?.theta_q;
    nonnative_stocks_from_rate(sigma, s, delta, migration)
}

/// Value of a filled job, `[(1-t)(x - w) - delta*x*F] / (r + delta)`.
pub fn firm_value(r: f64, t: f64, delta: f64, p_tilde_x: f64, wage: f64, firing_cost: f64) -> f64 {
    ((1.0 - t) * (p_tilde_x - wage) - delta * p_tilde_x * firing_cost) / (r + delta)
}

/// One skill market seen from an employer posting a vacancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacancyMarket {
    /// Vacancy meeting rate `theta^(-alpha)`.
    pub q: f64,
    /// Share of natives among the unemployed.
    pub pi_n: f64,
    pub p_tilde_x: f64,
    pub w_n: f64,
    pub w_i: f64,
    pub kappa_n: f64,
    pub kappa_i: f64,
    pub delta_n: f64,
    pub delta_i: f64,
}

/// Employer-side constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmployerCosts {
    pub r: f64,
    pub t: f64,
    pub c: f64,
    pub firing_cost: f64,
}

impl VacancyMarket {
    pub fn j_native(&self, costs: &EmployerCosts) -> f64 {
        firm_value(
            costs.r,
            costs.t,
            self.delta_n,
            self.p_tilde_x,
            self.w_n,
            costs.firing_cost,
        )
    }

    pub fn j_nonnative(&self, costs: &EmployerCosts) -> f64 {
        firm_value(
            costs.r,
            costs.t,
            self.delta_i,
            self.p_tilde_x,
            self.w_i,
            costs.firing_cost,
        )
    }

    /// Expected filled-job value flow minus the vacancy cost; zero under free entry.
    pub fn job_creation_residual(&self, costs: &EmployerCosts) -> f64 {
        self.pi_n * self.kappa_n * self.q * self.j_native(costs)
            + (1.0 - self.pi_n) * self.kappa_i * self.q * self.j_nonnative(costs)
            - costs.c * self.p_tilde_x
    }

    /// Value of an open vacancy solving its own Bellman equation.
    pub fn vacancy_value(&self, costs: &EmployerCosts) -> f64 {
        let fill = self.q * (self.pi_n * self.kappa_n + (1.0 - self.pi_n) * self.kappa_i);
        self.job_creation_residual(costs) / (costs.r + fill)
    }

    /// Real price that makes the job-creation condition hold given wages,
    /// `x` being physical output per worker.
    pub fn price_from_job_creation(&self, costs: &EmployerCosts, x: f64) -> f64 {
        let EmployerCosts {
            r,
            t,
            c,
            firing_cost: f,
        } = *costs;
        let (rn, ri) = (r + self.delta_n, r + self.delta_i);
        let wn = self.pi_n * self.kappa_n * ri;
        let wi = (1.0 - self.pi_n) * self.kappa_i * rn;
        let num = self.q * (1.0 - t) * (wn * self.w_n + wi * self.w_i);
        let den = x
            * (self.q * (wn * (1.0 - t - self.delta_n * f) + wi * (1.0 - t - self.delta_i * f))
                - c * rn * ri);
        num / den
    }
}

/// Inputs for the lifetime values of one worker class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerValueInputs {
    pub r: f64,
    pub beta: f64,
    pub phi: f64,
    pub b: f64,
    pub t: f64,
    pub tau_tilde: f64,
    pub delta: f64,
    /// Job-finding rate.
    pub s: f64,
    pub p_tilde_x: f64,
    pub wage: f64,
    pub firing_cost: f64,
    pub iota_nu: f64,
    /// Exit rate and utility abroad; `None` for natives.
    pub abroad: Option<(f64, f64)>,
}

/// Lifetime values `(W_u, W_e)`.
///
/// `W_u` uses the bargaining-consistent closed form and `W_e` adds the
/// employment surplus implied by the employed worker's Bellman equation.
pub fn worker_values(v: &WorkerValueInputs) -> (f64, f64) {
    let x = v.p_tilde_x;
    let xf = x * v.firing_cost;
    let net = (1.0 - v.t) * (v.wage + v.tau_tilde);
    let z_u = v.b * net + v.iota_nu;
    let j = firm_value(v.r, v.t, v.delta, x, v.wage, v.firing_cost);
    let gain = v.beta / (1.0 - v.beta) * (j + xf) + v.phi * xf;
    let flow_surplus = (1.0 - v.b) * net + v.delta * v.phi * xf;
    let denom = v.r + v.delta + v.s;
    match v.abroad {
        None => {
            let w_u = z_u / v.r + v.s / v.r * gain;
            (w_u, w_u + flow_surplus / denom)
        }
        Some((lambda, w_fc)) => {
            let w_u = (z_u + lambda * w_fc) / (v.r + lambda) + v.s / (v.r + lambda) * gain;
            let surplus = (flow_surplus - lambda * (w_fc - w_u)) / denom;
            (w_u, w_u + surplus)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fiscal(b: f64, t: f64, tau: f64) -> FiscalConfig {
        FiscalConfig {
            t,
            t_p: 0.15,
            b,
            tau_tilde: tau,
            g_h: 0.2,
            g_l: 0.2,
        }
    }

    const BARGAIN: Bargaining = Bargaining {
        r: 0.01,
        beta: 0.13,
        phi: 0.3,
    };

    // Independent evaluation of the printed native wage expression, term by term.
    #[allow(clippy::too_many_arguments)]
    fn native_oracle(
        beta: f64,
        r: f64,
        d: f64,
        s: f64,
        b: f64,
        t: f64,
        phi: f64,
        x: f64,
        tau: f64,
        f: f64,
    ) -> f64 {
        let den = (1.0 - t) * ((r + d) * (1.0 - b * (1.0 - beta)) + beta * s);
        let t1 = beta * (1.0 - t) * (r + d + s) / den * x;
        let t2 = (1.0 - beta) * (r + d) * (1.0 - t) * (1.0 - b) / den * tau;
        let t3 = (beta * r * (r + d + s) + phi * (r + d) * (1.0 - beta) * (r + s)) / den * x * f;
        t1 - t2 + t3
    }

    // Solves the Nash condition for the non-native wage directly: the value
    // functions are linear in w, so two evaluations pin the root.
    #[allow(clippy::too_many_arguments)]
    fn nonnative_fixed_point(
        bg: &Bargaining,
        fs: &FiscalConfig,
        d: f64,
        s: f64,
        lambda: f64,
        x: f64,
        f: f64,
        w_fc: f64,
        iota_nu: f64,
    ) -> f64 {
        let foc = |w: f64| {
            // Solve the Bellman pair for (W_u, W_e) from scratch rather than
            // through the closed forms in `worker_values`.
            let net = (1.0 - fs.t) * (w + fs.tau_tilde);
            let z_e = net + iota_nu;
            let z_u = fs.b * net + iota_nu;
            let xf = x * f;
            // (r + delta) W_e - delta W_u = Z_e + delta phi xf
            // -s W_e + (r + lambda + s) W_u = Z_u + lambda W_fc
            let (a11, a12, a21, a22) = (bg.r + d, -d, -s, bg.r + lambda + s);
            let (r1, r2) = (z_e + d * bg.phi * xf, z_u + lambda * w_fc);
            let det = a11 * a22 - a12 * a21;
            let we = (r1 * a22 - a12 * r2) / det;
            let wu = (a11 * r2 - a21 * r1) / det;
            let j = firm_value(bg.r, fs.t, d, x, w, f);
            (1.0 - bg.beta) * (we - bg.phi * xf - wu) - bg.beta * (j + xf)
        };
        let (f0, f1) = (foc(0.0), foc(1.0));
        -f0 / (f1 - f0)
    }

    #[test]
    fn native_wage_reduces_to_first_term() {
        let fs = fiscal(0.4, 0.5, 0.0);
        let w = wage_native(&BARGAIN, &fs, 0.02, 0.1, 3.0, 0.0).unwrap();
        let a = 0.13 * (0.01 + 0.02 + 0.1) / ((0.03) * (1.0 - 0.4 * 0.87) + 0.13 * 0.1);
        assert!((w - a * 3.0).abs() < 1e-14);
    }

    #[test]
    fn native_wage_full_power_limit() {
        let fs = fiscal(0.4, 0.5, 0.0);
        let bg = Bargaining {
            beta: 1.0 - 1e-12,
            ..BARGAIN
        };
        let w = wage_native(&bg, &fs, 0.02, 0.1, 3.0, 0.0).unwrap();
        assert!((w - 3.0).abs() < 1e-9);
    }

    #[test]
    fn native_wage_matches_oracle() {
        let fs = fiscal(0.4, 0.5, 0.2);
        let w = wage_native(&BARGAIN, &fs, 0.02, 0.1, 3.0, 2.0).unwrap();
        let o = native_oracle(0.13, 0.01, 0.02, 0.1, 0.4, 0.5, 0.3, 3.0, 0.2, 2.0);
        assert!((w - o).abs() < 1e-12, "{w} vs {o}");
    }

    #[test]
    fn nonnative_wage_lambda_zero_equals_native() {
        let fs = fiscal(0.4, 0.5, 0.2);
        let wn = wage_native(&BARGAIN, &fs, 0.02, 0.1, 3.0, 2.0).unwrap();
        let wi = wage_nonnative(&BARGAIN, &fs, 0.02, 0.1, 0.0, 3.0, 2.0, 50.0, 0.3).unwrap();
        assert!((wn - wi).abs() < 1e-13);
        let k = nonnative_wage_coefficients(&BARGAIN, &fs, 0.02, 0.1, 0.0).unwrap();
        assert_eq!((k.k, k.h), (0.0, 0.0));
    }

    #[test]
    fn nonnative_wage_solves_nash_condition() {
        let fs = fiscal(0.4, 0.5, 0.2);
        let w = wage_nonnative(&BARGAIN, &fs, 0.02, 0.1, 0.01, 3.0, 2.0, 50.0, 0.3).unwrap();
        let o = nonnative_fixed_point(&BARGAIN, &fs, 0.02, 0.1, 0.01, 3.0, 2.0, 50.0, 0.3);
        assert!((w - o).abs() < 1e-12, "{w} vs {o}");
    }

    #[test]
    fn native_wage_solves_nash_condition() {
        let fs = fiscal(0.35, 0.45, 0.15);
        let (d, s, x, f) = (0.015, 0.2, 4.0, 0.6);
        let w = wage_native(&BARGAIN, &fs, d, s, x, f).unwrap();
        let o = nonnative_fixed_point(&BARGAIN, &fs, d, s, 0.0, x, f, 0.0, 0.4);
        assert!((w - o).abs() < 1e-12);
    }

    #[test]
    fn nonnative_coefficients_positive_and_wfc_monotone() {
        let fs = fiscal(0.4, 0.5, 0.2);
        let k = nonnative_wage_coefficients(&BARGAIN, &fs, 0.02, 0.1, 0.01).unwrap();
        assert!(k.d > 0.0 && k.e > 0.0 && k.g > 0.0 && k.k > 0.0 && k.h > 0.0);
        let w1 = wage_nonnative(&BARGAIN, &fs, 0.02, 0.1, 0.01, 3.0, 2.0, 50.0, 0.3).unwrap();
        let w2 = wage_nonnative(&BARGAIN, &fs, 0.02, 0.1, 0.01, 3.0, 2.0, 51.0, 0.3).unwrap();
        assert!(w2 > w1);
    }

    #[test]
    fn wage_rejects_full_benefit() {
        let fs = fiscal(1.0, 0.5, 0.2);
        assert!(wage_native(&BARGAIN, &fs, 0.02, 0.1, 3.0, 2.0).is_err());
    }

    #[test]
    fn native_stock_examples() {
        let (e, u) = native_stocks_from_rate(10.0, 0.03, 0.03).unwrap();
        assert!((e - 5.0).abs() < 1e-14 && (u - 5.0).abs() < 1e-14);
        assert_eq!(
            native_stocks_from_rate(10.0, 0.0, 0.03).unwrap(),
            (0.0, 10.0)
        );
        let (e, u) = native_stocks_from_rate(100.0, 0.09, 0.01).unwrap();
        assert!((e - 90.0).abs() < 1e-12 && (u - 10.0).abs() < 1e-12);
    }

    #[test]
    fn nonnative_stock_examples() {
        let m0 = MigrationRates {
            eta: 0.02,
            lambda: 0.0,
        };
        let s = nonnative_stocks_from_rate(100.0, 0.08, 0.02, &m0).unwrap();
        let (e, u) = native_stocks_from_rate(100.0, 0.08, 0.02).unwrap();
        assert!((s.e - e).abs() < 1e-12 && (s.u - u).abs() < 1e-12 && s.fc == 0.0);

        let m = MigrationRates {
            eta: 0.02,
            lambda: 0.01,
        };
        let s = nonnative_stocks_from_rate(100.0, 0.0, 0.02, &m).unwrap();
        assert_eq!(s.e, 0.0);
        assert!((s.u - 100.0 * 0.02 / 0.03).abs() < 1e-12);

        let s = nonnative_stocks_from_rate(100.0, 0.08, 0.02, &m).unwrap();
        assert!((s.e + s.u + s.fc - 100.0).abs() < 1e-12);

        let dead = MigrationRates {
            eta: 0.0,
            lambda: 0.01,
        };
        assert!(matches!(
            nonnative_stocks_from_rate(100.0, 0.08, 0.02, &dead),
            Err(ModelError::DegenerateEconomy(_))
        ));
    }

    fn market(w_n: f64, w_i: f64) -> VacancyMarket {
        VacancyMarket {
            q: 2.0,
            pi_n: 0.8,
            p_tilde_x: 3.0,
            w_n,
            w_i,
            kappa_n: 0.3,
            kappa_i: 0.4,
            delta_n: 0.01,
            delta_i: 0.02,
        }
    }

    #[test]
    fn jcc_examples() {
        let costs = EmployerCosts {
            r: 0.01,
            t: 0.5,
            c: 0.0,
            firing_cost: 0.5,
        };
        assert!(market(1.0, 1.0).job_creation_residual(&costs) > 0.0);

        let costs = EmployerCosts { c: 0.3, ..costs };
        // zero-surplus wages: (1-t)(x - w) = delta x F
        let zero = |d: f64| 3.0 - d * 3.0 * 0.5 / 0.5;
        let m = market(zero(0.01), zero(0.02));
        assert!((m.job_creation_residual(&costs) + 0.3 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn price_from_jcc_zeroes_residual() {
        let costs = EmployerCosts {
            r: 0.01,
            t: 0.5,
            c: 0.3,
            firing_cost: 0.5,
        };
        let x = 2.0;
        let m = market(1.2, 1.1);
        let p = m.price_from_job_creation(&costs, x);
        let m2 = VacancyMarket {
            p_tilde_x: p * x,
            ..m
        };
        assert!(m2.job_creation_residual(&costs).abs() < 1e-12);
        assert!(m2.vacancy_value(&costs).abs() < 1e-12);
    }

    #[test]
    fn firm_value_examples() {
        let (r, t, d, x, f) = (0.01, 0.5, 0.02, 3.0, 0.4);
        let w0 = x * (1.0 - t - d * f) / (1.0 - t);
        assert!(firm_value(r, t, d, x, w0, f).abs() < 1e-14);
        assert!(firm_value(r, t, d, x, 1.0, 2.0 * f) < firm_value(r, t, d, x, 1.0, f));
    }

    fn wv(b: f64, phi: f64, abroad: Option<(f64, f64)>) -> WorkerValueInputs {
        WorkerValueInputs {
            r: 0.01,
            beta: 0.13,
            phi,
            b,
            t: 0.5,
            tau_tilde: 0.2,
            delta: 0.02,
            s: 0.1,
            p_tilde_x: 3.0,
            wage: 1.5,
            firing_cost: 0.5,
            iota_nu: 0.3,
            abroad,
        }
    }

    #[test]
    fn worker_value_examples() {
        let mut v = wv(1.0 - 1e-15, 0.0, None);
        v.firing_cost = 0.0;
        let (wu, we) = worker_values(&v);
        assert!((we - wu).abs() < 1e-9);

        let v = wv(0.4, 0.3, None);
        let (wu, we) = worker_values(&v);
        let direct = ((1.0 - 0.4) * 0.5 * 1.7 + 0.02 * 0.3 * 1.5) / (0.01 + 0.02 + 0.1);
        assert!(((we - wu) - direct).abs() < 1e-12);

        // Myopic limit without job finding: r W_e -> Z_e + delta phi X F.
        let mut v = wv(0.4, 0.3, None);
        v.r = 1e9;
        v.s = 0.0;
        let (_, we) = worker_values(&v);
        let z_e = 0.5 * 1.7 + 0.3 + 0.02 * 0.3 * 1.5;
        assert!((we * v.r - z_e).abs() / z_e < 1e-6);
    }

    #[test]
    fn nonnative_surplus_identity() {
        let v = wv(0.4, 0.3, Some((0.01, 50.0)));
        let (wu, we) = worker_values(&v);
        let flow = (1.0 - 0.4) * 0.5 * 1.7 - 0.01 * (50.0 - wu) + 0.02 * 0.3 * 1.5;
        assert!(((we - wu) - flow / 0.13).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn nonnative_mass_conserved(
            sigma in 0.0f64..50.0, s in 0.0f64..1.0, delta in 1e-4f64..0.2,
            eta in 1e-4f64..0.1, lambda in 0.0f64..0.1,
        ) {
            let st = nonnative_stocks_from_rate(sigma, s, delta, &MigrationRates { eta, lambda }).unwrap();
            prop_assert!((st.e + st.u + st.fc - sigma).abs() <= 1e-12 * sigma.max(1.0));
        }

        #[test]
        fn native_wage_signs(
            x in 0.5f64..8.0, tau in 0.0f64..0.5, f in 0.0f64..2.0,
            s in 0.01f64..0.5, delta in 0.002f64..0.05,
        ) {
            let fs = fiscal(0.4, 0.5, tau);
            let w = |x: f64, fs: &FiscalConfig, f: f64| wage_native(&BARGAIN, fs, delta, s, x, f).unwrap();
            let h = 1e-6;
            let base = w(x, &fs, f);
            prop_assert!(w(x + h, &fs, f) > base);
            prop_assert!(w(x, &fiscal(0.4, 0.5, tau + h), f) < base);
            prop_assert!(w(x, &fs, f + h) > base);
        }

        #[test]
        fn lambda_zero_reduction(
            x in 0.5f64..8.0, tau in 0.0f64..0.5, f in 0.0f64..2.0,
            s in 0.01f64..0.5, delta in 0.002f64..0.05, wfc in -50.0f64..50.0,
        ) {
            let fs = fiscal(0.4, 0.5, tau);
            let wn = wage_native(&BARGAIN, &fs, delta, s, x, f).unwrap();
            let wi = wage_nonnative(&BARGAIN, &fs, delta, s, 0.0, x, f, wfc, 0.3).unwrap();
            prop_assert!((wn - wi).abs() <= 1e-13 * wn.abs().max(1.0));
        }
    }
}
