//! Exogenous food demand, its normalization to model units and the
//! shortfall feedback.

mod drivers;

use serde::{Deserialize, Serialize};

pub use drivers::{BuiltinCurves, DriverAdjustments, DriverPoint, Drivers};

use crate::error::{Error, Result};
use crate::params::DemandParams;

/// Engel curve: `(a + b ln I) N` calories per year.
pub fn caloric_demand_raw(income: f64, population: f64, params: &DemandParams) -> Result<f64> {
    if population == 0.0 {
        return Ok(0.0);
    }
    let per_capita = params.a + params.b * income.ln();
    if !(per_capita > 0.0) {
        return Err(Error::DriverDomain(format!(
            "income {income} is below the Engel floor (per-capita calories {per_capita})"
        )));
    }
    Ok(per_capita * population)
}

/// Meat power law: `c I^d N` kg per year.
pub fn meat_demand_raw(income: f64, population: f64, params: &DemandParams) -> f64 {
    params.c * income.powf(params.d) * population
}

/// Raw exogenous demands in one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawDemand {
    /// Meat, kg per year.
    pub meat: f64,
    /// Calories not met by meat, in Engel-curve calorie units.
    pub crop_food: f64,
}

/// Raw meat demand and the crop-food residual of the calorie demand.
pub fn raw_demand(point: &DriverPoint, params: &DemandParams) -> Result<RawDemand> {
    let meat = meat_demand_raw(point.income_per_capita, point.population, params);
    let calories = caloric_demand_raw(point.income_per_capita, point.population, params)?;
    let crop_food = calories - params.r * params.calorie_unit_scale * meat;
    if !(crop_food > 0.0) {
        return Err(Error::DriverDomain(format!(
            "meat calories exceed total calories in {} (residual {crop_food})",
            point.year
        )));
    }
    Ok(RawDemand { meat, crop_food })
}

/// Raw demand in `year` with demand-reduction adjustments: a fraction of
/// the increase over the anchor year is removed, each series on its own.
pub fn exogenous_demand(drivers: &Drivers, year: i32, params: &DemandParams) -> Result<RawDemand> {
    let raw = raw_demand(&drivers.at(year)?, params)?;
    let adj = &drivers.adjustments;
    if year <= adj.anchor_year || (adj.meat_demand_reduction == 0.0 && adj.crop_demand_reduction == 0.0) {
        return Ok(raw);
    }
    let base = raw_demand(&drivers.at(adj.anchor_year)?, params)?;
    let cut = |y: f64, y0: f64, rho: f64| y0 + (1.0 - rho) * (y - y0);
    Ok(RawDemand {
        meat: cut(raw.meat, base.meat, adj.meat_demand_reduction),
        crop_food: cut(raw.crop_food, base.crop_food, adj.crop_demand_reduction),
    })
}

/// Model-unit demand levels that the first-year raw demands map onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTargets {
    pub meat: f64,
    pub crop_food: f64,
}

impl Default for NormalizationTargets {
    fn default() -> Self {
        Self {
            meat: 3500.0,
            crop_food: 1500.0,
        }
    }
}

/// Normalization constants and last-period demand/output records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandState {
    /// Raw meat units per model unit.
    pub omega_m: f64,
    /// Raw crop-food units per model unit.
    pub omega_c: f64,
    pub last_d_m: f64,
    pub last_q_m: f64,
    /// Total crop demand (food and feed).
    pub last_d_c: f64,
    pub last_q_c: f64,
}

/// Fix the normalization constants from the first-year raw demands. The
/// last-period records start balanced at the targets.
pub fn init_normalization(raw0: &RawDemand, targets: &NormalizationTargets) -> Result<DemandState> {
    if !(raw0.meat > 0.0) || !(raw0.crop_food > 0.0) {
        return Err(Error::Init(format!(
            "initial raw demands must be positive (meat {}, crop food {})",
            raw0.meat, raw0.crop_food
        )));
    }
    if !(targets.meat > 0.0) || !(targets.crop_food > 0.0) {
        return Err(Error::Init(format!(
            "normalization targets must be positive (meat {}, crop food {})",
            targets.meat, targets.crop_food
        )));
    }
    Ok(DemandState {
        omega_m: raw0.meat / targets.meat,
        omega_c: raw0.crop_food / targets.crop_food,
        last_d_m: targets.meat,
        last_q_m: targets.meat,
        last_d_c: targets.crop_food,
        last_q_c: targets.crop_food,
    })
}

/// `1 - alpha * (D - Q) / D`, at most 1 unless feedback is symmetric, and
/// never negative. Defined as 1 when `D` is zero.
pub fn feedback_factor(alpha: f64, last_d: f64, last_q: f64, symmetric: bool) -> f64 {
    if last_d == 0.0 {
        return 1.0;
    }
    let f = 1.0 - alpha * (last_d - last_q) / last_d;
    let f = if symmetric { f } else { f.min(1.0) };
    f.max(0.0)
}

/// Normalized demands after feedback: `(D_m, D_c_food)` in model units.
pub fn demands_for_step(raw: &RawDemand, state: &DemandState, params: &DemandParams) -> (f64, f64) {
    let fm = feedback_factor(params.alpha_m, state.last_d_m, state.last_q_m, params.symmetric_feedback);
    let fc = feedback_factor(params.alpha_c, state.last_d_c, state.last_q_c, params.symmetric_feedback);
    (raw.meat / state.omega_m * fm, raw.crop_food / state.omega_c * fc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> DemandParams {
        DemandParams::default()
    }

    fn state(omega_m: f64, omega_c: f64) -> DemandState {
        DemandState {
            omega_m,
            omega_c,
            last_d_m: 1.0,
            last_q_m: 1.0,
            last_d_c: 1.0,
            last_q_c: 1.0,
        }
    }

    #[test]
    fn engel_examples() {
        assert_eq!(caloric_demand_raw(5.0, 0.0, &p()).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((caloric_demand_raw(e, 1.0, &p()).unwrap() - 606.2).abs() < 1e-9);
        assert!((caloric_demand_raw(e * e, 2.0, &p()).unwrap() - 2701.2).abs() < 1e-9);
        assert!(matches!(caloric_demand_raw(1.0, 1.0, &p()), Err(Error::DriverDomain(_))));
    }

    #[test]
    fn meat_examples() {
        assert_eq!(meat_demand_raw(1.0, 1.0, &p()), 210.0);
        assert!((meat_demand_raw(32.0, 1.0, &p()) - 210.0 * 32f64.powf(0.65)).abs() < 1e-9);
        assert!((meat_demand_raw(32.0, 1.0, &p()) - 1997.868).abs() < 1e-3);
        assert_eq!(meat_demand_raw(32.0, 0.0, &p()), 0.0);
    }

    #[test]
    fn normalization_examples() {
        let raw = RawDemand {
            meat: 7.0e9,
            crop_food: 3.0e12,
        };
        let s = init_normalization(&raw, &NormalizationTargets::default()).unwrap();
        assert!((s.omega_m - 2.0e6).abs() < 1e-6);
        assert!((s.omega_c - 2.0e9).abs() < 1e-3);
        let (dm, dc) = demands_for_step(&raw, &s, &p());
        assert_eq!((dm, dc), (3500.0, 1500.0));
        let bad = RawDemand { meat: 0.0, ..raw };
        assert!(matches!(init_normalization(&bad, &NormalizationTargets::default()), Err(Error::Init(_))));
    }

    #[test]
    fn feedback_examples() {
        let mut s = state(1.0, 1.0);
        s.last_d_m = 100.0;
        s.last_q_m = 90.0;
        s.last_d_c = 100.0;
        s.last_q_c = 80.0;
        let raw = RawDemand {
            meat: 1000.0,
            crop_food: 2000.0,
        };
        let (dm, dc) = demands_for_step(&raw, &s, &p());
        assert!((dm - 950.0).abs() < 1e-9);
        assert!((dc - 1960.0).abs() < 1e-9);
    }

    #[test]
    fn surplus_does_not_amplify_unless_symmetric() {
        assert_eq!(feedback_factor(0.5, 100.0, 150.0, false), 1.0);
        assert!((feedback_factor(0.5, 100.0, 150.0, true) - 1.25).abs() < 1e-12);
        assert_eq!(feedback_factor(0.5, 0.0, 10.0, false), 1.0);
    }

    #[test]
    fn builtin_residual_is_positive_and_growing() {
        let d = Drivers::builtin();
        let mut prev = 0.0;
        for y in 1960..=2100 {
            let r = raw_demand(&d.at(y).unwrap(), &p()).unwrap();
            assert!(r.crop_food > prev);
            prev = r.crop_food;
        }
    }

    #[test]
    fn full_meat_reduction_freezes_post_anchor() {
        let mut d = Drivers::builtin();
        d.adjustments.meat_demand_reduction = 1.0;
        let m22 = exogenous_demand(&d, 2022, &p()).unwrap();
        for y in [2023, 2060, 2100] {
            let r = exogenous_demand(&d, y, &p()).unwrap();
            assert_eq!(r.meat, m22.meat);
            let unadjusted = raw_demand(&d.at(y).unwrap(), &p()).unwrap();
            assert_eq!(r.crop_food, unadjusted.crop_food);
        }
    }

    proptest! {
        #[test]
        fn monotone_in_income_and_population(i in 1.5f64..200.0, n in 1.0f64..1e10, di in 0.01f64..10.0, dn in 1.0f64..1e9) {
            prop_assert!(meat_demand_raw(i + di, n, &p()) > meat_demand_raw(i, n, &p()));
            prop_assert!(meat_demand_raw(i, n + dn, &p()) > meat_demand_raw(i, n, &p()));
            prop_assert!(caloric_demand_raw(i + di, n, &p()).unwrap() > caloric_demand_raw(i, n, &p()).unwrap());
            let one = caloric_demand_raw(i, n, &p()).unwrap();
            let two = caloric_demand_raw(i, 2.0 * n, &p()).unwrap();
            prop_assert!((two - 2.0 * one).abs() <= 1e-9 * two);
        }

        #[test]
        fn feedback_bounded(alpha in 0.0f64..=1.0, d in 1.0f64..1e6, frac in 0.0f64..=1.0) {
            let f = feedback_factor(alpha, d, d * (1.0 - frac), false);
            prop_assert!(f >= 1.0 - alpha - 1e-12 && f <= 1.0);
        }

        #[test]
        fn meat_elasticity_is_d(i in 1.2f64..500.0) {
            let h = 1e-6;
            let up = meat_demand_raw(i * (1.0 + h), 1.0, &p()).ln();
            let down = meat_demand_raw(i * (1.0 - h), 1.0, &p()).ln();
            let el = (up - down) / ((1.0 + h).ln() - (1.0 - h).ln());
            prop_assert!((el - 0.65).abs() < 1e-6);
        }

        #[test]
        fn reductions_monotone(r1 in 0.0f64..1.0, dr in 0.0f64..1.0, year in 2023i32..2100) {
            let r2 = (r1 + dr).min(1.0);
            let mut a = Drivers::builtin();
            a.adjustments.meat_demand_reduction = r1;
            a.adjustments.crop_demand_reduction = r1;
            let mut b = Drivers::builtin();
            b.adjustments.meat_demand_reduction = r2;
            b.adjustments.crop_demand_reduction = r2;
            let da = exogenous_demand(&a, year, &p()).unwrap();
            let db = exogenous_demand(&b, year, &p()).unwrap();
            prop_assert!(db.meat <= da.meat && db.crop_food <= da.crop_food);
        }
    }
}
