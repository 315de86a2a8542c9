//! Goods-market prices, public goods and the government accounts.
//!
//! The steady-state system pins relative prices from the ratio of the two
//! goods-clearing conditions, but nothing in it forces the level condition
//! (aggregate demand equal to aggregate supply). The accounts close the
//! economy by rebating the government's primary surplus, which may be
//! negative, lump-sum to employers. With that rebate both goods markets clear
//! whenever prices satisfy the normalization, so the two clearing residuals
//! are genuine checks on the price block.

use serde::{Deserialize, Serialize};

use crate::classes::{ByClass, Skill};
use crate::error::{ModelError, Result};
use crate::model::{ces_log_mean, expenditure_shares, PreferenceConfig, RealPrices};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiscalConfig {
    /// Direct tax rate on labour and profit income.
    pub t: f64,
    /// Indirect tax rate.
    pub t_p: f64,
    /// Benefit replacement rate.
    pub b: f64,
    /// Real lump-sum tax subsidy.
    pub tau_tilde: f64,
    pub g_h: f64,
    pub g_l: f64,
}

impl FiscalConfig {
    pub fn g(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.g_h,
            Skill::Low => self.g_l,
        }
    }
}

/// Employer mass and the population outside the workforce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationConfig {
    pub chi: f64,
    pub ip: f64,
}

/// Real prices that clear both goods markets.
///
/// Evaluated as `p_h = gamma [gamma + (1-gamma) R^rho]^((1-rho)/rho)` with
/// `R` the ratio of government-net low- to high-skilled output; the
/// Cobb-Douglas limit `p_h = gamma R^(1-gamma)` is used for `|rho| < 1e-8`.
pub fn equilibrium_prices(
    x_h: f64,
    x_l: f64,
    e_h_total: f64,
    e_l_total: f64,
    prefs: &PreferenceConfig,
    g_h: f64,
    g_l: f64,
) -> Result<RealPrices> {
    let supply_h = (1.0 - g_h) * x_h * e_h_total;
    let supply_l = (1.0 - g_l) * x_l * e_l_total;
    if !(supply_h > 0.0 && supply_l > 0.0 && supply_h.is_finite() && supply_l.is_finite()) {
        return Err(ModelError::domain(
            "equilibrium_prices",
            format!("need positive production of both goods, got ({supply_h}, {supply_l})"),
        ));
    }
    let ln_r = (supply_l / supply_h).ln();
    let g = prefs.gamma;
    let rho = prefs.rho;
    let (ln_ph, ln_pl) = if prefs.is_cobb_douglas() {
        (g.ln() + (1.0 - g) * ln_r, (1.0 - g).ln() - g * ln_r)
    } else {
        (
            g.ln() + (1.0 - rho) * ces_log_mean(rho, g, 0.0, ln_r),
            (1.0 - g).ln() + (1.0 - rho) * ces_log_mean(rho, 1.0 - g, 0.0, -ln_r),
        )
    };
    Ok(RealPrices {
        p_h: ln_ph.exp(),
        p_l: ln_pl.exp(),
    })
}

/// Per-capita public goods, `[g_h X_h E_h + g_l X_l E_l] / population^zeta`.
#[allow(clippy::too_many_arguments)]
pub fn public_goods(
    g_h: f64,
    g_l: f64,
    p_tilde_x_h: f64,
    p_tilde_x_l: f64,
    e_h_total: f64,
    e_l_total: f64,
    population_total: f64,
    zeta: f64,
) -> Result<f64> {
    if !(population_total > 0.0) {
        return Err(ModelError::domain(
            "public_goods",
            format!("population must be positive, got {population_total}"),
        ));
    }
    let spending = g_h * p_tilde_x_h * e_h_total + g_l * p_tilde_x_l * e_l_total;
    Ok(spending / population_total.powf(zeta))
}

/// The steady-state quantities the fiscal block needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub e: ByClass<f64>,
    pub u: ByClass<f64>,
    pub w: ByClass<f64>,
    pub prices: RealPrices,
    pub x_h: f64,
    pub x_l: f64,
}

impl Aggregates {
    pub fn value_added(&self, skill: Skill) -> f64 {
        match skill {
            Skill::High => self.prices.p_h * self.x_h,
            Skill::Low => self.prices.p_l * self.x_l,
        }
    }

    /// Gross value added at basic prices.
    pub fn gva(&self) -> f64 {
        Skill::ALL
            .iter()
            .map(|&s| self.value_added(s) * self.e.skill_total(s))
            .sum()
    }

    /// Production of a good at market prices.
    pub fn supply(&self, skill: Skill, t_p: f64) -> f64 {
        self.value_added(skill) * self.e.skill_total(skill) / (1.0 - t_p)
    }

    /// Benefits plus the tax subsidy paid to employed and unemployed workers.
    pub fn transfers(&self, fiscal: &FiscalConfig) -> f64 {
        let wu: f64 = ByClass::from_fn(|c| self.w.get(c) * self.u.get(c)).sum();
        fiscal.b * wu + fiscal.tau_tilde * (self.e.sum() + fiscal.b * self.u.sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GovernmentAccounts {
    /// Direct taxes.
    pub dt: f64,
    /// Indirect taxes.
    pub it: f64,
    /// Total government expenditure, including the surplus rebate.
    pub tge: f64,
    /// Benefits and tax subsidies.
    pub transfers: f64,
    /// Government purchases of the two goods.
    pub public_consumption: f64,
    /// Primary surplus before the rebate, handed back lump-sum to employers.
    pub balancing_transfer: f64,
    pub gva: f64,
    pub nu: f64,
}

impl GovernmentAccounts {
    pub fn relative_surplus(&self) -> f64 {
        (self.dt + self.it - self.tge) / self.tge.abs().max(1.0)
    }
}

pub fn government_accounts(
    agg: &Aggregates,
    fiscal: &FiscalConfig,
    population_total: f64,
    zeta: f64,
) -> Result<GovernmentAccounts> {
    let gva = agg.gva();
    let transfers = agg.transfers(fiscal);
    let dt = fiscal.t * (transfers + gva);
    let it = fiscal.t_p / (1.0 - fiscal.t_p) * gva;
    let public_consumption = fiscal.g_h * agg.supply(Skill::High, fiscal.t_p)
        + fiscal.g_l * agg.supply(Skill::Low, fiscal.t_p);
    let balancing_transfer = dt + it - transfers - public_consumption;
    let nu = public_goods(
        fiscal.g_h,
        fiscal.g_l,
        agg.value_added(Skill::High),
        agg.value_added(Skill::Low),
        agg.e.skill_total(Skill::High),
        agg.e.skill_total(Skill::Low),
        population_total,
        zeta,
    )?;
    Ok(GovernmentAccounts {
        dt,
        it,
        tge: transfers + public_consumption + balancing_transfer,
        transfers,
        public_consumption,
        balancing_transfer,
        gva,
        nu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearingResiduals {
    /// Demand minus supply.
    pub raw_h: f64,
    pub raw_l: f64,
    /// The same, relative to supply.
    pub rel_h: f64,
    pub rel_l: f64,
}

/// Demand minus supply in each goods market.
///
/// Private demand is the CES demand out of disposable income, which is
/// after-tax labour, profit and transfer income plus the surplus rebate;
/// government demand is the share `g_i` of production.
pub fn market_clearing_residuals(
    agg: &Aggregates,
    fiscal: &FiscalConfig,
    prefs: &PreferenceConfig,
    balancing_transfer: f64,
) -> ClearingResiduals {
    let income = (1.0 - fiscal.t) * (agg.transfers(fiscal) + agg.gva()) + balancing_transfer;
    let (share_h, share_l) = expenditure_shares(&agg.prices, prefs);
    let supply_h = agg.supply(Skill::High, fiscal.t_p);
    let supply_l = agg.supply(Skill::Low, fiscal.t_p);
    let raw_h = share_h * income + fiscal.g_h * supply_h - supply_h;
    let raw_l = share_l * income + fiscal.g_l * supply_l - supply_l;
    ClearingResiduals {
        raw_h,
        raw_l,
        rel_h: raw_h / supply_h,
        rel_l: raw_l / supply_l,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::price_index;
    use proptest::prelude::*;

    fn prefs(rho: f64, gamma: f64) -> PreferenceConfig {
        PreferenceConfig::new(rho, gamma, 1.0, 1.0).unwrap()
    }

    fn fiscal(t: f64, t_p: f64, b: f64, tau: f64, g: f64) -> FiscalConfig {
        FiscalConfig {
            t,
            t_p,
            b,
            tau_tilde: tau,
            g_h: g,
            g_l: g,
        }
    }

    fn aggregates(prices: RealPrices) -> Aggregates {
        Aggregates {
            e: ByClass::from_array([7.0, 14.0, 0.2, 2.2]),
            u: ByClass::from_array([0.4, 1.4, 0.02, 0.3]),
            w: ByClass::from_array([2.0, 1.4, 1.8, 1.2]),
            prices,
            x_h: 4.0,
            x_l: 2.5,
        }
    }

    #[test]
    fn symmetric_prices_equal() {
        let p = equilibrium_prices(2.0, 2.0, 5.0, 5.0, &prefs(0.5, 0.5), 0.2, 0.2).unwrap();
        assert!((p.p_h - p.p_l).abs() < 1e-14);
    }

    #[test]
    fn more_low_skilled_employment_lowers_p_l() {
        let pr = prefs(0.3, 0.4);
        let a = equilibrium_prices(3.0, 2.0, 5.0, 10.0, &pr, 0.2, 0.1).unwrap();
        let b = equilibrium_prices(3.0, 2.0, 5.0, 10.5, &pr, 0.2, 0.1).unwrap();
        assert!(b.p_l < a.p_l && b.p_h > a.p_h);
    }

    #[test]
    fn cobb_douglas_prices_closed_form() {
        let pr = prefs(0.0, 0.335);
        let p = equilibrium_prices(3.0, 2.0, 5.0, 10.0, &pr, 0.2, 0.1).unwrap();
        let r: f64 = 0.9 * 2.0 * 10.0 / (0.8 * 3.0 * 5.0);
        assert!((p.p_h - 0.335 * r.powf(0.665)).abs() < 1e-14);
        assert!((p.p_l - 0.665 * r.powf(-0.335)).abs() < 1e-14);
        assert!((price_index(p.p_h, p.p_l, &pr).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn prices_zero_output_rejected() {
        assert!(equilibrium_prices(3.0, 2.0, 0.0, 10.0, &prefs(0.0, 0.5), 0.2, 0.1).is_err());
    }

    #[test]
    fn cobb_douglas_limit_of_prices() {
        for rho in [1e-7, -1e-7] {
            let a = equilibrium_prices(3.0, 2.0, 5.0, 10.0, &prefs(rho, 0.3), 0.2, 0.1).unwrap();
            let b = equilibrium_prices(3.0, 2.0, 5.0, 10.0, &prefs(0.0, 0.3), 0.2, 0.1).unwrap();
            assert!(((a.p_h - b.p_h) / b.p_h).abs() < 1e-5);
            assert!(((a.p_l - b.p_l) / b.p_l).abs() < 1e-5);
        }
    }

    #[test]
    fn public_goods_examples() {
        let nu = public_goods(0.2, 0.2, 3.0, 2.0, 10.0, 20.0, 60.0, 0.0).unwrap();
        assert!((nu - (0.2 * 30.0 + 0.2 * 40.0)).abs() < 1e-12);
        assert_eq!(
            public_goods(0.0, 0.0, 3.0, 2.0, 10.0, 20.0, 60.0, 1.0).unwrap(),
            0.0
        );
        let nu = public_goods(0.18, 0.22, 3.0, 2.0, 10.0, 20.0, 60.0, 1.0).unwrap();
        assert!((nu - (0.18 * 30.0 + 0.22 * 40.0) / 60.0).abs() < 1e-15);
        assert!(public_goods(0.2, 0.2, 3.0, 2.0, 10.0, 20.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn accounts_trivial_cases() {
        let pr = prefs(0.0, 0.4);
        let prices = equilibrium_prices(4.0, 2.5, 7.2, 16.2, &pr, 0.2, 0.2).unwrap();
        let agg = aggregates(prices);
        let acc = government_accounts(&agg, &fiscal(0.0, 0.0, 0.4, 0.2, 0.2), 60.0, 1.0).unwrap();
        assert_eq!((acc.dt, acc.it), (0.0, 0.0));
        let acc = government_accounts(&agg, &fiscal(0.5, 0.15, 0.0, 0.0, 0.0), 60.0, 1.0).unwrap();
        assert_eq!(acc.transfers + acc.public_consumption, 0.0);
    }

    #[test]
    fn clearing_bookkeeping() {
        let pr = prefs(0.0, 0.4);
        let fs = fiscal(0.5, 0.15, 0.4, 0.2, 0.2);
        let prices = equilibrium_prices(4.0, 2.5, 7.2, 16.2, &pr, 0.2, 0.2).unwrap();
        let agg = aggregates(prices);
        let acc = government_accounts(&agg, &fs, 60.0, 1.0).unwrap();
        let res = market_clearing_residuals(&agg, &fs, &pr, acc.balancing_transfer);
        assert!(res.rel_h.abs() < 1e-12 && res.rel_l.abs() < 1e-12);

        // Doubling supply of h with demand held fixed leaves a shortfall equal to the old supply.
        let supply_h = agg.supply(Skill::High, fs.t_p);
        let income = (1.0 - fs.t) * (agg.transfers(&fs) + agg.gva()) + acc.balancing_transfer;
        let (sh, _) = expenditure_shares(&agg.prices, &pr);
        let demand = sh * income + fs.g_h * supply_h;
        assert!((demand - 2.0 * supply_h + supply_h).abs() < 1e-9 * supply_h);
    }

    proptest! {
        #[test]
        fn price_normalization(
            rho in -3.0f64..0.9, gamma in 0.05f64..0.95, xh in 0.1f64..10.0, xl in 0.1f64..10.0,
            eh in 0.1f64..30.0, el in 0.1f64..30.0, gh in 0.0f64..0.5, gl in 0.0f64..0.5,
        ) {
            let pr = prefs(rho, gamma);
            let p = equilibrium_prices(xh, xl, eh, el, &pr, gh, gl).unwrap();
            prop_assert!(p.normalization_residual(&pr).abs() < 1e-10);
            prop_assert!((price_index(p.p_h, p.p_l, &pr).unwrap() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn price_comparative_statics(
            rho in -3.0f64..0.9, gamma in 0.05f64..0.95, eh in 0.5f64..30.0, el in 0.5f64..30.0,
        ) {
            let pr = prefs(rho, gamma);
            let a = equilibrium_prices(3.0, 2.0, eh, el, &pr, 0.2, 0.2).unwrap();
            let b = equilibrium_prices(3.0, 2.0, eh, el * (1.0 + 1e-4), &pr, 0.2, 0.2).unwrap();
            prop_assert!(b.p_l < a.p_l);
            prop_assert!(b.p_h > a.p_h);
        }

        #[test]
        fn walras_on_normalized_prices(
            rho in -2.0f64..0.8, gamma in 0.1f64..0.9, t in 0.0f64..0.7, tp in 0.0f64..0.3,
            b in 0.0f64..0.9, tau in 0.0f64..0.5, gh in 0.0f64..0.4, gl in 0.0f64..0.4,
        ) {
            let pr = prefs(rho, gamma);
            let fs = FiscalConfig { t, t_p: tp, b, tau_tilde: tau, g_h: gh, g_l: gl };
            let agg0 = aggregates(RealPrices { p_h: 1.0, p_l: 1.0 });
            let prices = equilibrium_prices(
                agg0.x_h, agg0.x_l, agg0.e.skill_total(Skill::High), agg0.e.skill_total(Skill::Low),
                &pr, gh, gl,
            ).unwrap();
            let agg = Aggregates { prices, ..agg0 };
            let acc = government_accounts(&agg, &fs, 60.0, 1.0).unwrap();
            prop_assert!(acc.relative_surplus().abs() < 1e-12);
            let res = market_clearing_residuals(&agg, &fs, &pr, acc.balancing_transfer);
            prop_assert!(res.rel_h.abs() < 1e-10 && res.rel_l.abs() < 1e-10);
        }
    }
}
