//! Parameter sets: the externally calibrated inputs, the estimated free
//! parameters and the fixed taste parameters.
//!
//! Units follow one convention throughout: rates are monthly, stocks are
//! millions of persons, and money is thousands of euro per month at base-year
//! prices, so aggregates come out in billions of euro per month.

use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, BySkill, Skill};
use crate::error::{ModelError, Result};
use crate::fiscal::FiscalConfig;
use crate::model::{MatchingConfig, PreferenceConfig};

/// The twenty yearly inputs set outside the estimation, plus bookkeeping extras.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibratedParameters {
    /// Monthly discount rate.
    pub r: f64,
    /// Share of firing costs transferred to the worker.
    pub phi: f64,
    /// Matching elasticity with respect to unemployment.
    pub alpha: f64,
    /// Vacancy cost as a fraction of value added.
    pub c: f64,
    /// Firing cost as a fraction of value added.
    pub firing_cost: f64,
    /// Monthly job destruction rates.
    pub delta: ByClass<f64>,
    /// Mass of employers (millions).
    pub chi: f64,
    /// Workforce stocks (millions).
    pub sigma: ByClass<f64>,
    /// Government spending share of value added.
    pub g: f64,
    /// Benefit replacement rate.
    pub b: f64,
    /// Real tax subsidy (thousand euro per month).
    pub tau: f64,
    /// Indirect tax rate.
    pub t_p: f64,
    /// Monthly entry rate of non-natives.
    pub eta: f64,
    /// Monthly exit rate of non-natives.
    pub lambda: f64,
    /// Population outside the workforce (millions).
    pub ip: f64,
    /// Per-good spending shares; `None` falls back to `g`.
    #[serde(default)]
    pub g_h: Option<f64>,
    #[serde(default)]
    pub g_l: Option<f64>,
    /// Social-security contributions per unit of gross wage bill.
    #[serde(default)]
    pub ssc_wedge: f64,
}

impl CalibratedParameters {
    pub fn g_share(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.g_h.unwrap_or(self.g),
            Skill::Low => self.g_l.unwrap_or(self.g),
        }
    }

    /// Total population entering the congestion term, counting only the
    /// non-natives who currently reside in the country.
    pub fn population(&self, resident_nonnatives: f64) -> f64 {
        self.sigma.h_n + self.sigma.l_n + resident_nonnatives + self.chi + self.ip
    }

    pub fn matching(&self) -> Result<MatchingConfig> {
        MatchingConfig::new(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &str, detail: &str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(ModelError::param(field, detail))
            }
        }
        let finite = |v: f64| v.is_finite();
        check(finite(self.r) && self.r > 0.0, "r", "must be positive")?;
        check((0.0..=1.0).contains(&self.phi), "phi", "must lie in [0,1]")?;
        check(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha",
            "must lie in (0,1)",
        )?;
        check(finite(self.c) && self.c >= 0.0, "c", "must be non-negative")?;
        check(
            finite(self.firing_cost) && self.firing_cost >= 0.0,
            "firing_cost",
            "must be non-negative",
        )?;
        for (class, d) in self.delta.iter() {
            check(
                finite(d) && d > 0.0,
                &format!("delta_{}", class.tag()),
                "must be positive",
            )?;
        }
        for (class, s) in self.sigma.iter() {
            check(
                finite(s) && s >= 0.0,
                &format!("sigma_{}", class.tag()),
                "must be non-negative",
            )?;
        }
        check(
            finite(self.chi) && self.chi >= 0.0,
            "chi",
            "must be non-negative",
        )?;
        check(
            finite(self.ip) && self.ip >= 0.0,
            "ip",
            "must be non-negative",
        )?;
        check((0.0..1.0).contains(&self.g), "g", "must lie in [0,1)")?;
        for (name, v) in [("g_h", self.g_h), ("g_l", self.g_l)] {
            if let Some(v) = v {
                check((0.0..1.0).contains(&v), name, "must lie in [0,1)")?;
            }
        }
        check((0.0..1.0).contains(&self.b), "b", "must lie in [0,1)")?;
        check(
            finite(self.tau) && self.tau >= 0.0,
            "tau",
            "must be non-negative",
        )?;
        check((0.0..1.0).contains(&self.t_p), "t_p", "must lie in [0,1)")?;
        check(
            finite(self.eta) && self.eta > 0.0,
            "eta",
            "must be positive",
        )?;
        check(
            finite(self.lambda) && self.lambda >= 0.0,
            "lambda",
            "must be non-negative",
        )?;
        check(
            finite(self.ssc_wedge) && self.ssc_wedge >= 0.0,
            "ssc_wedge",
            "must be non-negative",
        )?;
        Ok(())
    }
}

/// The eleven free parameters matched by simulated moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedParameters {
    /// Bargaining power, common to natives and non-natives.
    pub beta: f64,
    /// Taste weight on the high-skilled good.
    pub gamma: f64,
    pub x_h: f64,
    pub x_l: f64,
    /// Direct tax rate.
    pub t: f64,
    /// Offer-signing probabilities.
    pub kappa: ByClass<f64>,
    /// Lifetime utility abroad.
    pub w_fc: BySkill<f64>,
}

impl EstimatedParameters {
    pub const LEN: usize = 11;

    pub const NAMES: [&'static str; 11] = [
        "beta",
        "gamma",
        "x_h",
        "x_l",
        "t",
        "kappa_h_N",
        "kappa_l_N",
        "kappa_h_I",
        "kappa_l_I",
        "W_FC_h",
        "W_FC_l",
    ];

    pub fn to_array(&self) -> [f64; 11] {
        [
            self.beta,
            self.gamma,
            self.x_h,
            self.x_l,
            self.t,
            self.kappa.h_n,
            self.kappa.l_n,
            self.kappa.h_i,
            self.kappa.l_i,
            self.w_fc.h,
            self.w_fc.l,
        ]
    }

    pub fn from_array(v: &[f64; 11]) -> Self {
        EstimatedParameters {
            beta: v[0],
            gamma: v[1],
            x_h: v[2],
            x_l: v[3],
            t: v[4],
            kappa: ByClass::from_array([v[5], v[6], v[7], v[8]]),
            w_fc: BySkill { h: v[9], l: v[10] },
        }
    }

    pub fn x(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.x_h,
            Skill::Low => self.x_l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(ModelError::param("beta", "must lie in (0,1)"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(ModelError::param("gamma", "must lie in (0,1)"));
        }
        if !(self.x_h > 0.0 && self.x_h.is_finite()) {
            return Err(ModelError::param("x_h", "must be positive"));
        }
        if !(self.x_l > 0.0 && self.x_l.is_finite()) {
            return Err(ModelError::param("x_l", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.t) {
            return Err(ModelError::param("t", "must lie in [0,1)"));
        }
        for (class, k) in self.kappa.iter() {
            if !(k > 0.0 && k <= 1.0) {
                return Err(ModelError::param(
                    format!("kappa_{}", class.tag()),
                    "must lie in (0,1]",
                ));
            }
        }
        if !(self.w_fc.h.is_finite() && self.w_fc.l.is_finite()) {
            return Err(ModelError::param("W_FC", "must be finite"));
        }
        Ok(())
    }
}

/// Preference parameters that are fixed rather than estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TasteConfig {
    pub rho: f64,
    pub iota: f64,
    pub zeta: f64,
}

impl Default for TasteConfig {
    fn default() -> Self {
        TasteConfig {
            rho: 0.0,
            iota: 1.0,
            zeta: 1.0,
        }
    }
}

impl TasteConfig {
    pub fn with_epsilon(epsilon: f64) -> Result<Self> {
        Ok(TasteConfig {
            rho: crate::model::rho_from_epsilon(epsilon)?,
            ..TasteConfig::default()
        })
    }

    /// Same `iota` and `zeta` at another elasticity of substitution.
    pub fn at_epsilon(&self, epsilon: f64) -> Result<Self> {
        Ok(TasteConfig {
            rho: crate::model::rho_from_epsilon(epsilon)?,
            ..*self
        })
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / (1.0 - self.rho)
    }
}

/// Everything needed to pin down one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Economy {
    pub calibrated: CalibratedParameters,
    pub estimated: EstimatedParameters,
    pub taste: TasteConfig,
}

impl Economy {
    pub fn new(
        calibrated: CalibratedParameters,
        estimated: EstimatedParameters,
        taste: TasteConfig,
    ) -> Result<Self> {
        let e = Economy {
            calibrated,
            estimated,
            taste,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        self.calibrated.validate()?;
        self.estimated.validate()?;
        self.prefs().validate()?;
        Ok(())
    }

    pub fn prefs(&self) -> PreferenceConfig {
        PreferenceConfig {
            rho: self.taste.rho,
            gamma: self.estimated.gamma,
            iota: self.taste.iota,
            zeta: self.taste.zeta,
        }
    }

    pub fn fiscal(&self) -> FiscalConfig {
        FiscalConfig {
            t: self.estimated.t,
            t_p: self.calibrated.t_p,
            b: self.calibrated.b,
            tau_tilde: self.calibrated.tau,
            g_h: self.calibrated.g_share(Skill::High),
            g_l: self.calibrated.g_share(Skill::Low),
        }
    }
}
