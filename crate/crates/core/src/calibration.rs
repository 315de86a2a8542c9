//! External calibration from raw series: worker flow rates, the non-native
//! inflow rate, firing and vacancy costs, the tax subsidy and trend smoothing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, BySkill, Skill, WorkerClass};
use crate::error::{ModelError, Result};

fn data_err(op: &'static str, detail: impl Into<String>) -> ModelError {
    ModelError::Data {
        op,
        detail: detail.into(),
    }
}

/// Monthly probability from an annual one, `1 - (1 - a)^(1/12)`.
pub fn monthly_probability(annual: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&annual) {
        return Err(ModelError::domain(
            "monthly_probability",
            format!("annual probability must lie in [0,1), got {annual}"),
        ));
    }
    Ok(1.0 - (1.0 - annual).powf(1.0 / 12.0))
}

/// Monthly flow from an annual one.
pub fn monthly_flow(annual: f64) -> f64 {
    annual / 12.0
}

/// Unemployment stocks observed at two consecutive dates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowObservation {
    pub u_t: f64,
    pub u_next: f64,
    /// Unemployed at the second date who held a job during the period.
    pub u_short_next: f64,
    /// Labour force.
    pub l_t: f64,
}

impl FlowObservation {
    pub fn validate(&self) -> Result<()> {
        let ok = self.u_short_next >= 0.0
            && self.u_short_next <= self.u_next
            && self.u_next <= self.l_t
            && self.u_t > 0.0
            && self.u_t <= self.l_t
            && [self.u_t, self.u_next, self.u_short_next, self.l_t]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(data_err(
                "shimer_rates",
                format!("need 0 <= u_short_next <= u_next <= l_t and 0 < u_t <= l_t, got {self:?}"),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShimerRates {
    /// Job-finding probability over the period.
    pub finding_prob: f64,
    /// Employment-exit probability over the period.
    pub exit_prob: f64,
    /// Poisson job-finding rate `-ln(1 - Q)`.
    pub finding_rate: f64,
    /// Poisson exit rate `-ln(1 - Delta)`.
    pub exit_rate: f64,
}

/// Unemployment at the end of a period that starts with `u_t` unemployed
/// out of `l_t`, under constant Poisson finding and exit rates.
pub fn unemployment_law_of_motion(u_t: f64, l_t: f64, q: f64, delta: f64) -> f64 {
    let decay = (-(q + delta)).exp();
    (1.0 - decay) * delta * l_t / (q + delta) + decay * u_t
}

/// Job-finding and exit probabilities and rates from unemployment and
/// short-term unemployment stocks.
pub fn shimer_rates(obs: &FlowObservation) -> Result<ShimerRates> {
    obs.validate()?;
    let finding_prob = 1.0 - (obs.u_next - obs.u_short_next) / obs.u_t;
    if !(finding_prob > 0.0 && finding_prob < 1.0) {
        return Err(data_err(
            "shimer_rates",
            format!("job-finding probability {finding_prob} outside (0,1)"),
        ));
    }
    let q = -(-finding_prob).ln_1p();
    let gap = |prob: f64| {
        let d = -(-prob).ln_1p();
        unemployment_law_of_motion(obs.u_t, obs.l_t, q, d) - obs.u_next
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (g_lo, g_hi) = (gap(lo), gap(hi));
    if g_lo.signum() == g_hi.signum() {
        return Err(data_err(
            "shimer_rates",
            "no exit probability in (0,1) reproduces the observed unemployment",
        ));
    }
    let rising = g_hi > g_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-16 || mid <= lo || mid >= hi {
            break;
        }
        let g = gap(mid);
        if (g > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let exit_prob = 0.5 * (lo + hi);
    Ok(ShimerRates {
        finding_prob,
        exit_prob,
        finding_rate: q,
        exit_rate: -(-exit_prob).ln_1p(),
    })
}

/// Stocks implied by known rates, the inverse of [`shimer_rates`].
pub fn simulate_flow_observation(u_t: f64, l_t: f64, q: f64, delta: f64) -> FlowObservation {
    let u_next = unemployment_law_of_motion(u_t, l_t, q, delta);
    FlowObservation {
        u_t,
        u_next,
        u_short_next: u_next - (-q).exp() * u_t,
        l_t,
    }
}

/// Hodrick-Prescott trend of `series` with smoothing `lambda_hp`.
///
/// Solves `(I + lambda D'D) trend = series`, with `D` the second-difference
/// operator, by a banded Cholesky factorization.
pub fn hp_filter(series: &[f64], lambda_hp: f64) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 4 {
        return Err(ModelError::domain(
            "hp_filter",
            format!("series needs at least 4 points, got {n}"),
        ));
    }
    if !(lambda_hp > 0.0 && lambda_hp.is_finite()) {
        return Err(ModelError::domain("hp_filter", "lambda must be positive"));
    }
    // Bands of the symmetric pentadiagonal matrix: diagonal, first and second off-diagonal.
    let mut d0 = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for k in 0..n - 2 {
        // row of D: [1, -2, 1] at columns k, k+1, k+2
        let coeffs = [1.0, -2.0, 1.0];
        for a in 0..3 {
            d0[k + a] += lambda_hp * coeffs[a] * coeffs[a];
            if a + 1 < 3 {
                d1[k + a] += lambda_hp * coeffs[a] * coeffs[a + 1];
            }
        }
        d2[k] += lambda_hp * coeffs[0] * coeffs[2];
    }
    for v in d0.iter_mut() {
        *v += 1.0;
    }
    // Banded Cholesky: A = L L', L lower with bandwidth 2.
    let mut l0 = vec![0.0; n];
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for i in 0..n {
        if i >= 2 {
            l2[i - 2] = d2[i - 2] / l0[i - 2];
        }
        if i >= 1 {
            let mut v = d1[i - 1];
            if i >= 2 {
                v -= l2[i - 2] * l1[i - 2];
            }
            l1[i - 1] = v / l0[i - 1];
        }
        let mut diag = d0[i];
        if i >= 1 {
            diag -= l1[i - 1] * l1[i - 1];
        }
        if i >= 2 {
            diag -= l2[i - 2] * l2[i - 2];
        }
        if !(diag > 0.0) {
            return Err(ModelError::domain("hp_filter", "factorization broke down"));
        }
        l0[i] = diag.sqrt();
    }
    // l1[j] = L[j+1][j], l2[j] = L[j+2][j]
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut v = series[i];
        if i >= 1 {
            v -= l1[i - 1] * z[i - 1];
        }
        if i >= 2 {
            v -= l2[i - 2] * z[i - 2];
        }
        z[i] = v / l0[i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = z[i];
        if i + 1 < n {
            v -= l1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= l2[i] * x[i + 2];
        }
        x[i] = v / l0[i];
    }
    Ok(x)
}

/// Which steady-state stock the inflow rate is backed out from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaVia {
    Employment,
    Unemployment,
}

/// Non-native stocks and rates in one skill market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonNativeMarketObs {
    pub e: f64,
    pub u: f64,
    /// Job-finding rate `kappa theta q(theta)`.
    pub s: f64,
    pub delta: f64,
}

/// Entry rate of non-natives from the total inflow `tii`.
pub fn eta_from_inflows(
    tii: f64,
    lambda: f64,
    markets: &[NonNativeMarketObs],
    via: EtaVia,
) -> Result<f64> {
    if !(tii >= 0.0 && lambda >= 0.0) {
        return Err(data_err(
            "eta_from_inflows",
            "inflow and exit rate must be non-negative",
        ));
    }
    if markets
        .iter()
        .any(|m| !(m.s > 0.0 && m.delta > 0.0 && m.e >= 0.0 && m.u >= 0.0))
    {
        return Err(data_err(
            "eta_from_inflows",
            "stocks and rates must be positive",
        ));
    }
    let (outflow, weight): (f64, f64) = match via {
        EtaVia::Employment => markets.iter().fold((0.0, 0.0), |(o, w), m| {
            (o + m.e * m.delta / m.s, w + m.e * (m.s + m.delta) / m.s)
        }),
        EtaVia::Unemployment => markets.iter().fold((0.0, 0.0), |(o, w), m| {
            (o + m.u, w + m.u * (m.s + m.delta) / m.delta)
        }),
    };
    let numerator = tii - lambda * outflow;
    if numerator < 0.0 {
        return Err(data_err(
            "eta_from_inflows",
            format!("outflows exceed inflows (numerator {numerator})"),
        ));
    }
    if !(weight > 0.0) {
        return Err(data_err("eta_from_inflows", "no non-native stock"));
    }
    Ok(numerator / weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaReconciliation {
    pub eta: f64,
    pub via_employment: f64,
    pub via_unemployment: f64,
    /// Absolute gap between the two estimators.
    pub gap: f64,
}

/// Both estimators, keeping the unemployment-based one.
pub fn eta_reconciled(
    tii: f64,
    lambda: f64,
    markets: &[NonNativeMarketObs],
) -> Result<EtaReconciliation> {
    let via_employment = eta_from_inflows(tii, lambda, markets, EtaVia::Employment)?;
    let via_unemployment = eta_from_inflows(tii, lambda, markets, EtaVia::Unemployment)?;
    Ok(EtaReconciliation {
        eta: via_unemployment,
        via_employment,
        via_unemployment,
        gap: (via_employment - via_unemployment).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiringCostInputs {
    /// Probability of being fired.
    pub p_f: f64,
    /// Probability of suing.
    pub p_s: f64,
    /// Probability the dismissal is ruled unfair.
    pub p_w: f64,
    /// Probability of appeal.
    pub p_a: f64,
    /// Trial lengths in months, first degree and appeal.
    pub n_fd: f64,
    pub n_a: f64,
    /// Social-security contributions and late-payment penalty, per month of trial.
    pub ss: f64,
    pub pp: f64,
    /// Severance payment and legal costs, in monthly wages.
    pub sp: f64,
    pub lc: f64,
    /// Extra levy due on every dismissal, in monthly wages (0 or 1).
    pub levy: f64,
    /// Wage over value added.
    pub wage_to_va: f64,
}

impl FiringCostInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_f", self.p_f),
            ("p_s", self.p_s),
            ("p_w", self.p_w),
            ("p_a", self.p_a),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::param(
                    name,
                    format!("probability {p} outside [0,1]"),
                ));
            }
        }
        for (name, n) in [("n_fd", self.n_fd), ("n_a", self.n_a)] {
            if !(n > 0.0 && n.is_finite()) {
                return Err(ModelError::param(name, "trial length must be positive"));
            }
        }
        for (name, v) in [
            ("ss", self.ss),
            ("pp", self.pp),
            ("sp", self.sp),
            ("lc", self.lc),
            ("levy", self.levy),
            ("wage_to_va", self.wage_to_va),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::param(name, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Expected firing cost as a fraction of value added.
pub fn firing_cost(inp: &FiringCostInputs) -> Result<f64> {
    inp.validate()?;
    let trial = |n: f64| n + (inp.ss + inp.pp) * n + inp.sp + inp.lc;
    let first = inp.p_s * inp.p_w * trial(inp.n_fd);
    let appeal = inp.p_s * (1.0 - inp.p_w) * inp.p_a * inp.p_w * trial(inp.n_a);
    Ok(inp.p_f * (inp.levy + first + appeal) * inp.wage_to_va)
}

/// Settled, pending and newly opened trials in one month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialFlow {
    pub settled: f64,
    pub pending_prev: f64,
    pub ensued: f64,
}

/// Average trial length in months, the inverse of the monthly closing probability.
pub fn average_trial_length(flow: &TrialFlow) -> Result<f64> {
    if !(flow.settled > 0.0) {
        return Err(data_err("average_trial_length", "no settled trials"));
    }
    if !(flow.pending_prev >= 0.0 && flow.ensued >= 0.0) {
        return Err(data_err("average_trial_length", "negative trial counts"));
    }
    let open = flow.pending_prev + flow.ensued;
    if !(open > 0.0) {
        return Err(data_err("average_trial_length", "no open trials"));
    }
    Ok(open / flow.settled)
}

/// Monthly vacancy cost as a fraction of value added.
pub fn vacancy_cost(
    kappa_q_monthly: f64,
    direct_cost: f64,
    opportunity_cost: f64,
    p_tilde_x_monthly: f64,
) -> Result<f64> {
    if !(kappa_q_monthly > 0.0 && p_tilde_x_monthly > 0.0) {
        return Err(ModelError::domain(
            "vacancy_cost",
            "filling rate and value added must be positive",
        ));
    }
    if !(direct_cost >= 0.0 && opportunity_cost >= 0.0) {
        return Err(ModelError::domain(
            "vacancy_cost",
            "costs must be non-negative",
        ));
    }
    Ok(kappa_q_monthly * (direct_cost + opportunity_cost) / p_tilde_x_monthly)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxSubsidy {
    pub tau: f64,
    /// Wage below which no tax is paid.
    pub no_tax_threshold: f64,
}

/// Share of the average wage earned by the reference low-wage worker.
pub const LOW_WAGE_SHARE: f64 = 0.67;

/// Lump-sum subsidy that turns a marginal rate into the observed average rate
/// for a worker at 67% of the average wage.
pub fn tax_subsidy(w_bar: f64, t_avg: f64, t_marginal: f64) -> Result<TaxSubsidy> {
    if !(t_marginal < 1.0) {
        return Err(ModelError::domain(
            "tax_subsidy",
            format!("marginal rate must be < 1, got {t_marginal}"),
        ));
    }
    if !(0.0 <= t_avg && t_avg <= t_marginal) {
        return Err(ModelError::domain(
            "tax_subsidy",
            format!("need 0 <= average <= marginal, got ({t_avg}, {t_marginal})"),
        ));
    }
    let tau = LOW_WAGE_SHARE * w_bar * (t_marginal - t_avg) / (1.0 - t_marginal);
    let no_tax_threshold = if t_marginal > 0.0 {
        (1.0 - t_marginal) * tau / t_marginal
    } else {
        0.0
    };
    Ok(TaxSubsidy {
        tau,
        no_tax_threshold,
    })
}

/// Average tax rate at wage `w` under marginal rate `t_m` and subsidy `tau`.
pub fn average_tax_rate(w: f64, tau: f64, t_m: f64) -> f64 {
    (t_m * w - tau * (1.0 - t_m)) / w
}

/// Trial flows for first-degree and appeal courts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CourtFlows {
    pub first_degree: TrialFlow,
    pub appeal: TrialFlow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacancyCostInputs {
    pub kappa_q_monthly: f64,
    pub direct_cost: f64,
    pub opportunity_cost: f64,
    pub p_tilde_x_monthly: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaxInputs {
    pub w_bar: f64,
    pub t_avg: f64,
    pub t_marginal: f64,
}

/// Non-native inflow data; rates come from the flow decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflowInputs {
    pub tii: f64,
    pub lambda: f64,
    /// Employed and unemployed non-natives by market.
    pub employed: BySkill<f64>,
    pub unemployed: BySkill<f64>,
}

/// Raw inputs for one year of external calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationInputs {
    pub year: i32,
    pub flows: ByClass<FlowObservation>,
    pub firing: FiringCostInputs,
    /// When present, trial lengths in `firing` are replaced by these.
    #[serde(default)]
    pub courts: Option<CourtFlows>,
    pub vacancy: VacancyCostInputs,
    pub tax: TaxInputs,
    pub inflow: InflowInputs,
    /// Series to detrend, by name.
    #[serde(default)]
    pub series: BTreeMap<String, Vec<f64>>,
    #[serde(default = "default_hp_lambda")]
    pub hp_lambda: f64,
}

fn default_hp_lambda() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalCalibration {
    pub year: i32,
    pub rates: ByClass<ShimerRates>,
    /// Exit rates, the model's job-destruction rates.
    pub delta: ByClass<f64>,
    pub firing_cost: f64,
    pub trial_lengths: Option<(f64, f64)>,
    pub vacancy_cost: f64,
    pub tax: TaxSubsidy,
    pub eta: EtaReconciliation,
    pub trends: BTreeMap<String, Vec<f64>>,
}

/// Runs every external-calibration step on one year of raw inputs.
pub fn calibrate_year(inp: &CalibrationInputs) -> Result<ExternalCalibration> {
    let rates = ByClass::try_from_fn(|c| shimer_rates(&inp.flows.get(c)))?;
    let mut firing = inp.firing;
    let trial_lengths = match &inp.courts {
        Some(courts) => {
            let n_fd = average_trial_length(&courts.first_degree)?;
            let n_a = average_trial_length(&courts.appeal)?;
            firing.n_fd = n_fd;
            firing.n_a = n_a;
            Some((n_fd, n_a))
        }
        None => None,
    };
    let v = &inp.vacancy;
    let markets = [
        (WorkerClass::H_I, Skill::High),
        (WorkerClass::L_I, Skill::Low),
    ]
    .map(|(c, s)| NonNativeMarketObs {
        e: inp.inflow.employed.get(s),
        u: inp.inflow.unemployed.get(s),
        s: rates.get(c).finding_rate,
        delta: rates.get(c).exit_rate,
    });
    let mut trends = BTreeMap::new();
    for (name, series) in &inp.series {
        trends.insert(name.clone(), hp_filter(series, inp.hp_lambda)?);
    }
    Ok(ExternalCalibration {
        year: inp.year,
        delta: rates.map(|r| r.exit_rate),
        rates,
        firing_cost: firing_cost(&firing)?,
        trial_lengths,
        vacancy_cost: vacancy_cost(
            v.kappa_q_monthly,
            v.direct_cost,
            v.opportunity_cost,
            v.p_tilde_x_monthly,
        )?,
        tax: tax_subsidy(inp.tax.w_bar, inp.tax.t_avg, inp.tax.t_marginal)?,
        eta: eta_reconciled(inp.inflow.tii, inp.inflow.lambda, &markets)?,
        trends,
    })
}
