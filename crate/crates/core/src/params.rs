//! Model parameters with the calibrated default values.
//!
//! Parameters are grouped by the subsystem that consumes them. Every group
//! deserializes with defaults for missing keys and rejects unknown keys, so
//! a configuration file only needs to list overrides.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Demand-side coefficients (Engel curve, meat power law, shortfall feedback).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandParams {
    /// Engel-curve intercept, kcal per capita per year.
    pub a: f64,
    /// Engel-curve slope on log income.
    pub b: f64,
    /// Meat demand scale, kg per capita per year at unit income.
    pub c: f64,
    /// Income elasticity of meat demand.
    pub d: f64,
    /// Meat-to-calorie conversion, kcal per kg.
    pub r: f64,
    /// Engel-curve calorie units per kcal. The Engel coefficients and `r`
    /// are not expressed in a common calorie unit; meat calories enter the
    /// crop-food residual as `r * calorie_unit_scale * meat`.
    pub calorie_unit_scale: f64,
    /// Shortfall feedback strength on meat demand.
    pub alpha_m: f64,
    /// Shortfall feedback strength on crop-food demand.
    pub alpha_c: f64,
    /// Let surpluses raise demand as well (the factor is otherwise capped at 1).
    pub symmetric_feedback: bool,
}

impl Default for DemandParams {
    fn default() -> Self {
        Self {
            a: -138.2,
            b: 744.4,
            c: 210.0,
            d: 0.65,
            r: 3000.0,
            calorie_unit_scale: 1e-4,
            alpha_m: 0.5,
            alpha_c: 0.1,
            symmetric_feedback: false,
        }
    }
}

/// Production functions, input adjustment and technology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductionParams {
    /// Yield elasticity to chemical inputs.
    pub k: f64,
    /// Yield elasticity to mechanization.
    pub f: f64,
    /// Meat yield sensitivity to livestock density.
    pub h: f64,
    /// Livestock density cap under organic management.
    pub lambda_max: f64,
    /// Mechanization adjustment speed.
    pub beta: f64,
    /// Chemical input adjustment speed.
    pub delta: f64,
    /// Livestock density adjustment speed.
    pub gamma: f64,
    /// Technology growth rate.
    pub nu: f64,
    /// Technology ceiling.
    pub t_max: f64,
    /// Technology level in the first year.
    pub t0: f64,
    /// Crop units of feed per unit of planned meat output.
    pub feed_coeff: f64,
}

impl Default for ProductionParams {
    fn default() -> Self {
        Self {
            k: 0.2,
            f: 0.5,
            h: 0.95,
            lambda_max: 3.0,
            beta: 0.95,
            delta: 1.1,
            gamma: 0.95,
            nu: 0.1,
            t_max: 0.2,
            t0: 0.001,
            feed_coeff: 0.17,
        }
    }
}

/// Sign convention for natural-cell integrity dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NaturalSign {
    /// Logistic recovery towards `eps_max`.
    #[default]
    Growth,
    /// Printed form of the update, which decays natural integrity.
    Literal,
}

/// Grid layout, initialization and integrity dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeParams {
    pub width: usize,
    pub height: usize,
    pub share_natural: f64,
    pub share_pasture: f64,
    pub share_crop: f64,
    /// Correlation length of the initial natural-land field, in cells.
    pub xi: f64,
    /// Log-scale spread of natural restoration lifespans.
    pub mu_n: f64,
    /// Median natural restoration lifespan, in steps.
    pub sigma_n: f64,
    pub mu_c: f64,
    pub sigma_c: f64,
    pub mu_m: f64,
    pub sigma_m: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub eps_init_agricultural: f64,
    pub eps_init_natural: f64,
    /// Ecosystem-service exponent.
    pub p: f64,
    pub forest_threshold: f64,
    pub degraded_threshold: f64,
    pub natural_sign: NaturalSign,
    /// Organic cells degrade under organic pressures: crop cells without the
    /// chemical term and pasture cells at the capped livestock density.
    pub organic_relief: bool,
}

impl Default for LandscapeParams {
    fn default() -> Self {
        Self {
            width: 100,
            height: 100,
            share_natural: 0.50,
            share_pasture: 0.35,
            share_crop: 0.15,
            xi: 10.0,
            mu_n: 1.0,
            sigma_n: 1000.0,
            mu_c: 1.0,
            sigma_c: 10000.0,
            mu_m: 1.0,
            sigma_m: 5000.0,
            eps_max: 2.0,
            eps_min: 1e-6,
            eps_init_agricultural: 1.0,
            eps_init_natural: 2.0,
            p: 0.25,
            forest_threshold: 1.9,
            degraded_threshold: 0.1,
            natural_sign: NaturalSign::Growth,
            organic_relief: true,
        }
    }
}

impl LandscapeParams {
    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }
}

/// Placement of the floor in the expansion/contraction rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FloorMode {
    /// `round(phi * cells) * floor(1 + zeta * gap)`.
    #[default]
    Quantum,
    /// `floor(phi * (1 + zeta * gap) * cells)`.
    Scaled,
}

/// Output that this year's demand is compared with when sizing land
/// conversion and abandonment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GapReference {
    /// Last year's output.
    Previous,
    /// This year's output, after inputs have adjusted.
    #[default]
    Current,
}

/// Land conversion and abandonment responsiveness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandDynamicsParams {
    /// Baseline per-cell turnover rate.
    pub phi: f64,
    pub zeta_plus_c: f64,
    pub zeta_plus_m: f64,
    pub zeta_minus_c: f64,
    pub zeta_minus_m: f64,
    pub floor_mode: FloorMode,
    pub gap_reference: GapReference,
}

impl Default for LandDynamicsParams {
    fn default() -> Self {
        Self {
            phi: 3e-4,
            zeta_plus_c: 130.0,
            zeta_plus_m: 500.0,
            zeta_minus_c: 120.0,
            zeta_minus_m: 500.0,
            floor_mode: FloorMode::Quantum,
            gap_reference: GapReference::Current,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timeline {
    pub start_year: i32,
    pub policy_year: i32,
    pub end_year: i32,
}

impl Default for Timeline {
    fn default() -> Self {
        Self {
            start_year: 1960,
            policy_year: 2022,
            end_year: 2100,
        }
    }
}

impl Timeline {
    pub fn years(&self) -> usize {
        (self.end_year - self.start_year + 1) as usize
    }
}

/// Supply-side policy levers, each a magnitude in `[0, 1]` that takes
/// effect after the policy year. Zero means "not applied".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyLevers {
    /// Scales the chemical adjustment speed by `1 - m`.
    pub chemical_reduction: f64,
    /// Scales the livestock adjustment speed by `1 - m`.
    pub livestock_density_reduction: f64,
    /// Also freeze livestock density at its policy-year value while the
    /// reduction is active. Off by default: with growing meat demand the
    /// freeze routes all further supply through pasture expansion.
    pub cap_livestock_density: bool,
    /// Scales cropland demand-driven expansion by `1 - m`.
    pub deforestation_restriction_crop: f64,
    /// Scales pasture demand-driven expansion by `1 - m`.
    pub deforestation_restriction_meat: f64,
}

impl Default for PolicyLevers {
    fn default() -> Self {
        Self {
            chemical_reduction: 0.0,
            livestock_density_reduction: 0.0,
            cap_livestock_density: false,
            deforestation_restriction_crop: 0.0,
            deforestation_restriction_meat: 0.0,
        }
    }
}

impl PolicyLevers {
    pub fn is_empty(&self) -> bool {
        self.chemical_reduction == 0.0
            && self.livestock_density_reduction == 0.0
            && self.deforestation_restriction_crop == 0.0
            && self.deforestation_restriction_meat == 0.0
    }
}

/// Every tunable of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub demand: DemandParams,
    pub production: ProductionParams,
    pub landscape: LandscapeParams,
    pub land: LandDynamicsParams,
    pub timeline: Timeline,
    pub policy: PolicyLevers,
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(msg))
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl ModelParams {
    /// Parameters in force after the policy year: levers folded into the
    /// adjustment speeds and expansion responsiveness.
    pub fn after_policy(&self) -> ModelParams {
        let mut out = self.clone();
        let lv = &self.policy;
        out.production.delta *= 1.0 - lv.chemical_reduction;
        out.production.gamma *= 1.0 - lv.livestock_density_reduction;
        out.land.zeta_plus_c *= 1.0 - lv.deforestation_restriction_crop;
        out.land.zeta_plus_m *= 1.0 - lv.deforestation_restriction_meat;
        out
    }

    /// Whether livestock density is frozen at its policy-year value.
    pub fn caps_livestock_density(&self) -> bool {
        self.policy.livestock_density_reduction > 0.0 && self.policy.cap_livestock_density
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.demand;
        check(d.b > 0.0, "demand.b must be positive")?;
        check(d.c > 0.0, "demand.c must be positive")?;
        check(d.d > 0.0, "demand.d must be positive")?;
        check(d.r > 0.0, "demand.r must be positive")?;
        check(d.calorie_unit_scale >= 0.0, "demand.calorie_unit_scale must be >= 0")?;
        check(unit(d.alpha_m) && unit(d.alpha_c), "demand.alpha_m and demand.alpha_c must lie in [0, 1]")?;

        let p = &self.production;
        check(p.k > 0.0 && p.f > 0.0 && p.k + p.f < 1.0, "production.k, production.f must be positive with k + f < 1")?;
        check(p.h > 0.0 && p.h < 1.0, "production.h must lie in (0, 1)")?;
        check(p.lambda_max >= 1.0, "production.lambda_max must be >= 1")?;
        check(p.beta > 0.0 && p.delta > 0.0 && p.gamma > 0.0 && p.nu > 0.0, "adjustment speeds and nu must be positive")?;
        check(p.t_max > 0.0, "production.t_max must be positive")?;
        check(p.t0 > 0.0 && p.t0 <= p.t_max, "production.t0 must lie in (0, t_max]")?;
        check(p.feed_coeff >= 0.0, "production.feed_coeff must be >= 0")?;

        let l = &self.landscape;
        check(l.width > 0 && l.height > 0, "landscape grid dimensions must be positive")?;
        let shares = [l.share_natural, l.share_pasture, l.share_crop];
        check(shares.iter().all(|s| unit(*s)), "land shares must lie in [0, 1]")?;
        check((shares.iter().sum::<f64>() - 1.0).abs() < 1e-9, "land shares must sum to 1")?;
        check(l.xi > 0.0, "landscape.xi must be positive")?;
        check(l.sigma_n > 0.0 && l.sigma_c > 0.0 && l.sigma_m > 0.0, "lifespan scales sigma_* must be positive")?;
        check(l.mu_n >= 0.0 && l.mu_c >= 0.0 && l.mu_m >= 0.0, "lifespan spreads mu_* must be >= 0")?;
        check(l.eps_min > 0.0 && l.eps_min < 1.0, "landscape.eps_min must lie in (0, 1)")?;
        check(l.eps_max >= 1.0, "landscape.eps_max must be >= 1")?;
        check(
            l.eps_init_agricultural > l.eps_min && l.eps_init_agricultural <= 1.0,
            "landscape.eps_init_agricultural must lie in (eps_min, 1]",
        )?;
        check(
            l.eps_init_natural > l.eps_min && l.eps_init_natural <= l.eps_max,
            "landscape.eps_init_natural must lie in (eps_min, eps_max]",
        )?;
        check(l.p >= 0.0, "landscape.p must be >= 0")?;

        let ld = &self.land;
        check(ld.phi >= 0.0, "land.phi must be >= 0")?;
        check(
            [ld.zeta_plus_c, ld.zeta_plus_m, ld.zeta_minus_c, ld.zeta_minus_m].iter().all(|z| *z >= 0.0),
            "land.zeta_* must be >= 0",
        )?;

        let t = &self.timeline;
        check(
            t.start_year <= t.policy_year && t.policy_year <= t.end_year && t.start_year < t.end_year,
            "timeline must satisfy start_year <= policy_year <= end_year",
        )?;

        let lv = &self.policy;
        check(
            [lv.chemical_reduction, lv.livestock_density_reduction, lv.deforestation_restriction_crop, lv.deforestation_restriction_meat]
                .iter()
                .all(|m| unit(*m)),
            "policy lever magnitudes must lie in [0, 1]",
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn shares_must_sum_to_one() {
        let mut p = ModelParams::default();
        p.landscape.share_crop = 0.2;
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn zero_grid_rejected() {
        let mut p = ModelParams::default();
        p.landscape.width = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn chemical_lever_scales_delta() {
        let mut p = ModelParams::default();
        p.policy.chemical_reduction = 0.1;
        let post = p.after_policy();
        assert!((post.production.delta - 0.99).abs() < 1e-12);
        assert_eq!(post.production.beta, p.production.beta);
    }
}
