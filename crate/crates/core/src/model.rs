//! Preference and matching primitives: CES demand, the aggregate price index,
//! expenditure shares and the Cobb-Douglas matching technology.
//!
//! Every CES expression that degenerates to 0/0 at `rho = 0` is evaluated
//! through `expm1`/`ln_1p` so the general branch stays accurate near the
//! Cobb-Douglas point, and the closed Cobb-Douglas forms are selected when
//! `|rho| < COBB_DOUGLAS_EPS`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Below this `|rho|` the Cobb-Douglas closed forms are used.
pub const COBB_DOUGLAS_EPS: f64 = 1e-8;

/// Lower clamp for solver-internal market tightness.
pub const THETA_MIN: f64 = 1e-9;
/// Upper clamp for solver-internal market tightness.
pub const THETA_MAX: f64 = 1e9;

/// Elasticity of substitution between the two goods, `1 / (1 - rho)`.
pub fn elasticity_of_substitution(rho: f64) -> Result<f64> {
    if !rho.is_finite() || rho >= 1.0 {
        return Err(ModelError::domain(
            "elasticity_of_substitution",
            format!("rho must be finite and < 1, got {rho}"),
        ));
    }
    Ok(1.0 / (1.0 - rho))
}

/// Inverse of [`elasticity_of_substitution`].
pub fn rho_from_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(ModelError::domain(
            "rho_from_epsilon",
            format!("epsilon must be positive, got {epsilon}"),
        ));
    }
    Ok(1.0 - 1.0 / epsilon)
}

/// CES preferences over the two goods plus an additive public good.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreferenceConfig {
    /// CES curvature, `rho < 1`.
    pub rho: f64,
    /// Taste weight on the high-skilled good, strictly inside (0, 1).
    pub gamma: f64,
    /// Utility weight on the public good.
    pub iota: f64,
    /// Congestion exponent of the public good.
    pub zeta: f64,
}

impl PreferenceConfig {
    pub fn new(rho: f64, gamma: f64, iota: f64, zeta: f64) -> Result<Self> {
        let prefs = PreferenceConfig {
            rho,
            gamma,
            iota,
            zeta,
        };
        prefs.validate()?;
        Ok(prefs)
    }

    pub fn validate(&self) -> Result<()> {
        elasticity_of_substitution(self.rho)
            .map_err(|_| ModelError::param("rho", format!("must be < 1, got {}", self.rho)))?;
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ModelError::param(
                "gamma",
                format!("must lie in (0,1), got {}", self.gamma),
            ));
        }
        if !(self.iota > 0.0 && self.iota.is_finite()) {
            return Err(ModelError::param("iota", "must be positive"));
        }
        if !(self.zeta >= 0.0 && self.zeta.is_finite()) {
            return Err(ModelError::param("zeta", "must be non-negative"));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / (1.0 - self.rho)
    }

    pub fn is_cobb_douglas(&self) -> bool {
        self.rho.abs() < COBB_DOUGLAS_EPS
    }
}

/// Cobb-Douglas matching `m(v, u) = u^alpha v^(1-alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingConfig {
    pub alpha: f64,
}

impl MatchingConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::param(
                "alpha",
                format!("must lie in (0,1), got {alpha}"),
            ));
        }
        Ok(MatchingConfig { alpha })
    }

    pub fn rates(&self, theta: f64) -> Result<MatchingRates> {
        matching_rates(theta, self.alpha)
    }
}

/// Poisson meeting rates of a market with tightness `theta`.
///
/// These are rates, not probabilities: `q` exceeds one whenever `theta < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingRates {
    /// Rate at which a vacancy meets a worker, `theta^(-alpha)`.
    pub q: f64,
    /// Rate at which a worker meets a vacancy, `theta^(1-alpha)`.
    pub theta_q: f64,
}

pub fn matching_rates(theta: f64, alpha: f64) -> Result<MatchingRates> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(ModelError::domain(
            "matching_rates",
            format!("theta must be positive and finite, got {theta}"),
        ));
    }
    Ok(MatchingRates {
        q: theta.powf(-alpha),
        theta_q: theta.powf(1.0 - alpha),
    })
}

/// Prices of the two goods deflated by the aggregate price index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealPrices {
    pub p_h: f64,
    pub p_l: f64,
}

impl RealPrices {
    /// Residual of `p_h (p_h/gamma)^(1/(rho-1)) + p_l (p_l/(1-gamma))^(1/(rho-1)) = 1`.
    ///
    /// Evaluated in expenditure-share form, `gamma^eps p_h^(1-eps) + ...`, which
    /// is the same expression and stays finite at `rho = 0`.
    pub fn normalization_residual(&self, prefs: &PreferenceConfig) -> f64 {
        let (s_h, s_l) = expenditure_shares(self, prefs);
        s_h + s_l - 1.0
    }
}

/// Income of one consumer and whether it comes from employment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncomeBundle {
    pub y: f64,
    pub employed: bool,
}

/// `(1/k) * ln(w1 e^(k a) + w2 e^(k b))` with `w1 + w2 = 1`, accurate for tiny `k`.
///
/// As `k -> 0` this tends to the weighted mean `w1 a + w2 b`.
pub(crate) fn ces_log_mean(k: f64, w1: f64, a: f64, b: f64) -> f64 {
    let w2 = 1.0 - w1;
    if k == 0.0 {
        return w1 * a + w2 * b;
    }
    let s_minus_1 = w1 * (k * a).exp_m1() + w2 * (k * b).exp_m1();
    s_minus_1.ln_1p() / k
}

fn check_prices(op: &'static str, p_h: f64, p_l: f64) -> Result<()> {
    if !(p_h > 0.0 && p_l > 0.0 && p_h.is_finite() && p_l.is_finite()) {
        return Err(ModelError::domain(
            op,
            format!("prices must be positive and finite, got ({p_h}, {p_l})"),
        ));
    }
    Ok(())
}

/// Aggregate CES price index.
///
/// For `|rho| < 1e-8` the Cobb-Douglas index
/// `p_h^gamma p_l^(1-gamma) / (gamma^gamma (1-gamma)^(1-gamma))` is returned.
pub fn price_index(p_h: f64, p_l: f64, prefs: &PreferenceConfig) -> Result<f64> {
    check_prices("price_index", p_h, p_l)?;
    let g = prefs.gamma;
    let a = (p_h / g).ln();
    let b = (p_l / (1.0 - g)).ln();
    if prefs.is_cobb_douglas() {
        return Ok((g * a + (1.0 - g) * b).exp());
    }
    // P = [g (p_h/g)^(1-eps) + (1-g) (p_l/(1-g))^(1-eps)]^(1/(1-eps))
    let k = 1.0 - prefs.epsilon();
    Ok(ces_log_mean(k, g, a, b).exp())
}

/// Shares of real income spent on each good, `gamma^eps p_h^(1-eps)` and
/// `(1-gamma)^eps p_l^(1-eps)`; they sum to one only for normalized prices.
pub fn expenditure_shares(prices: &RealPrices, prefs: &PreferenceConfig) -> (f64, f64) {
    let g = prefs.gamma;
    let k = 1.0 - prefs.epsilon();
    let s_h = g * (k * (prices.p_h / g).ln()).exp();
    let s_l = (1.0 - g) * (k * (prices.p_l / (1.0 - g)).ln()).exp();
    (s_h, s_l)
}

/// Individual demands and expenditure shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub d_h: f64,
    pub d_l: f64,
    pub share_h: f64,
    pub share_l: f64,
}

/// Utility-maximizing demands for income `y` at prices `prices`.
///
/// Uses the budget-normalized CES demand, so it is valid for any positive
/// prices; for prices normalized by the price index it coincides with
/// `d_h = (p_h/gamma)^(1/(rho-1)) y`.
pub fn demand(y: f64, prices: &RealPrices, prefs: &PreferenceConfig) -> Result<Demand> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(ModelError::domain(
            "demand",
            format!("income must be non-negative, got {y}"),
        ));
    }
    check_prices("demand", prices.p_h, prices.p_l)?;
    let (w_h, w_l) = expenditure_shares(prices, prefs);
    let share_h = w_h / (w_h + w_l);
    let share_l = 1.0 - share_h;
    Ok(Demand {
        d_h: share_h * y / prices.p_h,
        d_l: share_l * y / prices.p_l,
        share_h,
        share_l,
    })
}

/// Indirect utility `y / P + iota * nu`.
pub fn indirect_utility(y: f64, price_index: f64, iota: f64, nu: f64) -> Result<f64> {
    if !(price_index > 0.0) {
        return Err(ModelError::domain(
            "indirect_utility",
            format!("price index must be positive, got {price_index}"),
        ));
    }
    Ok(y / price_index + iota * nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prefs(rho: f64, gamma: f64) -> PreferenceConfig {
        PreferenceConfig::new(rho, gamma, 1.0, 1.0).unwrap()
    }

    #[test]
    fn epsilon_examples() {
        assert_eq!(elasticity_of_substitution(0.0).unwrap(), 1.0);
        assert_eq!(elasticity_of_substitution(0.5).unwrap(), 2.0);
        assert_eq!(elasticity_of_substitution(-1.0).unwrap(), 0.5);
        assert!(elasticity_of_substitution(1.0).is_err());
        assert!(elasticity_of_substitution(1.5).is_err());
    }

    #[test]
    fn price_index_cobb_douglas() {
        let p = price_index(1.0, 1.0, &prefs(0.0, 0.5)).unwrap();
        assert!((p - 2.0).abs() < 1e-14);
        let p = price_index(2.0, 1.0, &prefs(0.0, 0.3)).unwrap();
        let expected = 2f64.powf(0.3) / (0.3f64.powf(0.3) * 0.7f64.powf(0.7));
        assert!((p - expected).abs() < 1e-14);
    }

    #[test]
    fn price_index_branch_consistency() {
        let cd = price_index(1.0, 1.0, &prefs(0.0, 0.5)).unwrap();
        let near = price_index(1.0, 1.0, &prefs(1e-9, 0.5)).unwrap();
        assert!(((near - cd) / cd).abs() < 1e-6);
    }

    #[test]
    fn price_index_matches_textbook_ces() {
        // rho = 0.5 -> eps = 2: P = [g^2 p_h^-1 + (1-g)^2 p_l^-1]^-1
        let pr = prefs(0.5, 0.4);
        let (ph, pl) = (1.7, 0.6);
        let direct = 1.0 / (0.16 / ph + 0.36 / pl);
        assert!((price_index(ph, pl, &pr).unwrap() - direct).abs() < 1e-13);
    }

    #[test]
    fn price_index_rejects_nonpositive() {
        assert!(price_index(0.0, 1.0, &prefs(0.0, 0.5)).is_err());
        assert!(price_index(1.0, -1.0, &prefs(0.3, 0.5)).is_err());
    }

    #[test]
    fn demand_examples() {
        let d = demand(1.0, &RealPrices { p_h: 1.0, p_l: 1.0 }, &prefs(0.0, 0.5)).unwrap();
        assert!((d.d_h - 0.5).abs() < 1e-15 && (d.d_l - 0.5).abs() < 1e-15);
        assert!((d.share_h - 0.5).abs() < 1e-15);
        let d = demand(0.0, &RealPrices { p_h: 1.3, p_l: 0.4 }, &prefs(0.2, 0.5)).unwrap();
        assert_eq!((d.d_h, d.d_l), (0.0, 0.0));
        let d = demand(2.0, &RealPrices { p_h: 1.2, p_l: 1.0 }, &prefs(0.0, 0.33)).unwrap();
        assert!((d.share_h - 0.33).abs() < 1e-15);
        assert!(demand(-1.0, &RealPrices { p_h: 1.0, p_l: 1.0 }, &prefs(0.0, 0.5)).is_err());
    }

    #[test]
    fn matching_examples() {
        let m = matching_rates(1.0, 0.4).unwrap();
        assert_eq!((m.q, m.theta_q), (1.0, 1.0));
        let m = matching_rates(2.0, 0.4).unwrap();
        assert!((m.q - 0.757_858_283_255_198_9).abs() < 1e-12);
        assert!((m.theta_q - 1.515_716_566_510_397_7).abs() < 1e-12);
        assert!(matching_rates(0.0, 0.4).is_err());
        assert!(matching_rates(-1.0, 0.4).is_err());
        // Rates, not probabilities: small theta gives q > 1.
        assert!(matching_rates(1e-6, 0.4).unwrap().q > 1.0);
    }

    #[test]
    fn indirect_utility_examples() {
        assert_eq!(indirect_utility(1.0, 1.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(indirect_utility(0.0, 1.0, 1.0, 0.5).unwrap(), 0.5);
        assert!((indirect_utility(2.0, 2.0, 1.0, 0.1).unwrap() - 1.1).abs() < 1e-15);
        assert!(indirect_utility(1.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(PreferenceConfig::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(PreferenceConfig::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(PreferenceConfig::new(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(MatchingConfig::new(1.0).is_err());
        assert!(MatchingConfig::new(0.4).is_ok());
    }
}
