//! The annual step, single runs and Monte Carlo ensembles.
//!
//! Within a year the model proceeds from demand to production to land to
//! ecosystem:
//!
//! 1. exogenous demands and shortfall feedback;
//! 2. technology advance;
//! 3. livestock density responds to the meat gap;
//! 4. organic shares are brought to the driver trajectory;
//! 5. planned meat output from current pasture;
//! 6. feed demand, giving total crop demand;
//! 7. mechanization and chemicals respond to the crop gap;
//! 8. crop output, then meat is scaled to the crop available for feed;
//! 9. land conversion and abandonment on each side;
//! 10. ecosystem services, then integrity update with this year's inputs.
//!
//! Gaps in steps 3 and 7 compare this year's demand with last year's
//! output. The land gap in step 9 uses this year's output by default and
//! last year's under `GapReference::Previous`.

mod ensemble;
mod record;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use ensemble::{delta_pct, delta_vs_baseline, derive_seeds, run_branched, run_ensemble, run_ensemble_with, ColumnStats, EnsembleAccumulator, EnsembleResult};
pub use record::{column_index, LandChange, RunRecord, YearRecord, COLUMNS, N_COLUMNS};

use crate::demand::{demands_for_step, exogenous_demand, init_normalization, DemandState, Drivers, NormalizationTargets, RawDemand};
use crate::error::{Error, Result};
use crate::landscape::{LandUse, Landscape, Management, Pressures};
use crate::params::{FloorMode, GapReference, LandDynamicsParams, ModelParams};
use crate::production::{self, InputState};

/// Cells to convert into and abandon from one agricultural class.
pub fn land_response(demand: f64, supply_prev: f64, total_cells: usize, land: &LandDynamicsParams, side: LandUse) -> (usize, usize) {
    let (zp, zm) = match side {
        LandUse::Crop => (land.zeta_plus_c, land.zeta_minus_c),
        LandUse::Pasture => (land.zeta_plus_m, land.zeta_minus_m),
        LandUse::Natural => panic!("land response is defined for agricultural classes"),
    };
    let gap = if demand > 0.0 { (demand - supply_prev) / demand } else { 0.0 };
    let cells = total_cells as f64;
    match land.floor_mode {
        FloorMode::Quantum => {
            let quantum = (land.phi * cells).round();
            let mult = |z: f64, g: f64| (1.0 + z * g).floor().max(0.0);
            ((quantum * mult(zp, gap)) as usize, (quantum * mult(zm, -gap)) as usize)
        }
        FloorMode::Scaled => {
            let cnt = |z: f64, g: f64| (land.phi * (1.0 + z * g) * cells).floor().max(0.0) as usize;
            (cnt(zp, gap), cnt(zm, -gap))
        }
    }
}

/// Per-year exogenous inputs for one parameter/driver combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Exogenous {
    start_year: i32,
    demand: Vec<RawDemand>,
    organic: Vec<(f64, f64)>,
}

impl Exogenous {
    pub fn new(drivers: &Drivers, params: &ModelParams) -> Result<Self> {
        let t = &params.timeline;
        let mut demand = Vec::with_capacity(t.years());
        let mut organic = Vec::with_capacity(t.years());
        for year in t.start_year..=t.end_year {
            let at = |e: Error| Error::Step {
                year,
                source: Box::new(e),
            };
            demand.push(exogenous_demand(drivers, year, &params.demand).map_err(at)?);
            let p = drivers.at(year).map_err(at)?;
            organic.push((p.organic_share_crop, p.organic_share_pasture));
        }
        Ok(Self {
            start_year: t.start_year,
            demand,
            organic,
        })
    }

    fn idx(&self, year: i32) -> usize {
        (year - self.start_year) as usize
    }

    pub fn demand(&self, year: i32) -> RawDemand {
        self.demand[self.idx(year)]
    }

    pub fn organic_shares(&self, year: i32) -> (f64, f64) {
        self.organic[self.idx(year)]
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    /// Last completed year.
    pub year: i32,
    pub landscape: Landscape,
    pub inputs: InputState,
    pub demand: DemandState,
    pub ecosystem_service: f64,
    /// Livestock density ceiling once a density policy is active.
    pub lambda_cap: Option<f64>,
}

/// Switches of a diagnostic nature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Check landscape invariants after every step.
    pub check_invariants: bool,
}

/// One seeded run: state, random stream and the rows produced so far.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: Arc<ModelParams>,
    post: Arc<ModelParams>,
    exo: Arc<Exogenous>,
    state: SimState,
    rng: ChaCha8Rng,
    rows: Vec<YearRecord>,
    seed: u64,
    options: RunOptions,
}

impl Simulation {
    /// Generate the landscape, normalize demand and record the first year.
    pub fn new(params: &ModelParams, drivers: &Drivers, seed: u64) -> Result<Self> {
        params.validate()?;
        let exo = Arc::new(Exogenous::new(drivers, params)?);
        Self::with_exogenous(Arc::new(params.clone()), exo, seed)
    }

    pub fn with_exogenous(params: Arc<ModelParams>, exo: Arc<Exogenous>, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let landscape = Landscape::generate(&params.landscape, &mut rng)?;
        let prod = &params.production;
        let inputs = InputState::initial(prod);
        let metrics = landscape.metrics(&params.landscape);
        let (q_c, _) = production::crop_output(metrics.area_crop, 0, &inputs, metrics.mean_eps_crop_conv, None, prod);
        let (q_m, _) = production::meat_output(metrics.area_pasture, 0, &inputs, metrics.mean_eps_pasture_conv, None, prod);
        let feed = production::feed_demand(q_m, prod);
        let targets = NormalizationTargets {
            meat: q_m,
            crop_food: q_c - feed,
        };
        let start = params.timeline.start_year;
        let demand = init_normalization(&exo.demand(start), &targets)?;
        let demand = DemandState {
            last_d_c: q_c,
            last_q_c: q_c,
            ..demand
        };
        let row = YearRecord {
            year: start,
            demand_meat: targets.meat,
            demand_crop_food: targets.crop_food,
            demand_feed: feed,
            output_crop_conv: q_c,
            output_crop_org: 0.0,
            output_meat_conv: q_m,
            output_meat_org: 0.0,
            feed_scaling: 1.0,
            technology: inputs.technology,
            mechanization: inputs.mechanization,
            chemicals: inputs.chemicals,
            livestock_density: inputs.livestock_density,
            ecosystem_service: 1.0,
            natural_eps_sum: landscape.natural_eps_sum(),
            metrics,
            change: LandChange::default(),
            saturation_events: 0,
        };
        let post = Arc::new(params.after_policy());
        let mut rows = Vec::with_capacity(params.timeline.years());
        rows.push(row);
        Ok(Self {
            params,
            post,
            exo,
            state: SimState {
                year: start,
                landscape,
                inputs,
                demand,
                ecosystem_service: 1.0,
                lambda_cap: None,
            },
            rng,
            rows,
            seed,
            options: RunOptions::default(),
        })
    }

    pub fn set_options(&mut self, options: RunOptions) {
        self.options = options;
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn rows(&self) -> &[YearRecord] {
        &self.rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_complete(&self) -> bool {
        self.state.year >= self.params.timeline.end_year
    }

    /// Continue this run under other policies. The branch keeps the state
    /// and random stream, so it matches a run started with `params` and
    /// `exo` as long as no policy has taken effect yet.
    pub fn branch(&self, params: Arc<ModelParams>, exo: Arc<Exogenous>) -> Result<Simulation> {
        if self.state.year > self.params.timeline.policy_year {
            return Err(Error::config(format!(
                "cannot branch in {}, after the policy year {}",
                self.state.year, self.params.timeline.policy_year
            )));
        }
        let mut base = params.as_ref().clone();
        base.policy = self.params.policy.clone();
        if base != *self.params {
            return Err(Error::config("branch parameters differ from the trunk before the policy year"));
        }
        Ok(Simulation {
            post: Arc::new(params.after_policy()),
            params,
            exo,
            state: self.state.clone(),
            rng: self.rng.clone(),
            rows: self.rows.clone(),
            seed: self.seed,
            options: self.options,
        })
    }

    /// Simulate the next year.
    pub fn step(&mut self) -> Result<&YearRecord> {
        if self.is_complete() {
            return Err(Error::RunComplete(self.state.year));
        }
        let year = self.state.year + 1;
        self.advance(year).map_err(|e| Error::Step {
            year,
            source: Box::new(e),
        })?;
        Ok(self.rows.last().unwrap())
    }

    /// Step until `year` has been simulated.
    pub fn run_until(&mut self, year: i32) -> Result<()> {
        while self.state.year < year.min(self.params.timeline.end_year) {
            self.step()?;
        }
        Ok(())
    }

    pub fn run_to_end(mut self) -> Result<RunRecord> {
        self.run_until(self.params.timeline.end_year)?;
        Ok(self.into_record())
    }

    pub fn into_record(self) -> RunRecord {
        RunRecord {
            seed: self.seed,
            rows: self.rows,
        }
    }

    fn advance(&mut self, year: i32) -> Result<()> {
        let after = year > self.params.timeline.policy_year;
        let p: &ModelParams = if after { &self.post } else { &self.params };
        let prod = &p.production;
        let st = &mut self.state;
        let rng = &mut self.rng;

        let raw = self.exo.demand(year);
        let (d_m, d_food) = demands_for_step(&raw, &st.demand, &p.demand);
        let last = st.demand;

        st.inputs.technology = production::advance_technology(st.inputs.technology, prod);

        let mut lambda = production::adjust_intensity(st.inputs.livestock_density, prod.gamma, d_m, last.last_q_m);
        if after && p.caps_livestock_density() {
            let cap = *st.lambda_cap.get_or_insert(st.inputs.livestock_density);
            lambda = lambda.min(cap);
        }
        st.inputs.livestock_density = lambda;

        let (share_c, share_p) = self.exo.organic_shares(year);
        st.landscape.set_organic_share(share_c, share_p, rng);

        let ls_params = &p.landscape;
        let ls = &st.landscape;
        let split = |lu: LandUse| {
            let org = ls.organic_area(lu);
            (ls.area(lu) - org, org, ls.mean_eps(lu, Some(Management::Conventional)), ls.mean_eps(lu, Some(Management::Organic)))
        };
        let (pc, po, pc_eps, po_eps) = split(LandUse::Pasture);
        let (cc, co, cc_eps, co_eps) = split(LandUse::Crop);
        let (q_m, q_m_org) = production::meat_output(pc, po, &st.inputs, pc_eps, po_eps, prod);
        let planned = q_m + q_m_org;
        let feed = production::feed_demand(planned, prod);
        let d_c = d_food + feed;

        st.inputs.mechanization = production::adjust_intensity(st.inputs.mechanization, prod.beta, d_c, last.last_q_c);
        st.inputs.chemicals = production::adjust_intensity(st.inputs.chemicals, prod.delta, d_c, last.last_q_c);

        let (q_c, q_c_org) = production::crop_output(cc, co, &st.inputs, cc_eps, co_eps, prod);
        let crop_total = q_c + q_c_org;
        let (meat_total, scaling) = production::scale_meat_to_feed(planned, crop_total, d_food, feed);

        let cells = st.landscape.len();
        let (ref_c, ref_m) = match p.land.gap_reference {
            GapReference::Previous => (last.last_q_c, last.last_q_m),
            GapReference::Current => (crop_total, meat_total),
        };
        let (expand_c, contract_c) = land_response(d_c, ref_c, cells, &p.land, LandUse::Crop);
        let (expand_m, contract_m) = land_response(d_m, ref_m, cells, &p.land, LandUse::Pasture);
        let change = LandChange {
            converted_crop: st.landscape.convert_cells(LandUse::Crop, expand_c, rng),
            converted_pasture: st.landscape.convert_cells(LandUse::Pasture, expand_m, rng),
            abandoned_crop: st.landscape.abandon_cells(LandUse::Crop, contract_c, rng),
            abandoned_pasture: st.landscape.abandon_cells(LandUse::Pasture, contract_m, rng),
        };

        let e = st.landscape.ecosystem_service(ls_params.p, ls_params.eps_min);
        let pressures = Pressures::from_inputs(
            st.inputs.livestock_density,
            st.inputs.mechanization,
            st.inputs.chemicals,
            prod.lambda_max,
            ls_params.organic_relief,
        );
        let metrics = st.landscape.update_integrity(&pressures, e, ls_params);
        st.ecosystem_service = e;
        if self.options.check_invariants {
            st.landscape.check_invariants(ls_params).map_err(Error::Invariant)?;
        }

        st.demand.last_d_m = d_m;
        st.demand.last_q_m = meat_total;
        st.demand.last_d_c = d_c;
        st.demand.last_q_c = crop_total;
        st.year = year;

        let row = YearRecord {
            year,
            demand_meat: d_m,
            demand_crop_food: d_food,
            demand_feed: feed,
            output_crop_conv: q_c,
            output_crop_org: q_c_org,
            output_meat_conv: q_m * scaling,
            output_meat_org: q_m_org * scaling,
            feed_scaling: scaling,
            technology: st.inputs.technology,
            mechanization: st.inputs.mechanization,
            chemicals: st.inputs.chemicals,
            livestock_density: st.inputs.livestock_density,
            ecosystem_service: e,
            natural_eps_sum: metrics.mean_eps_natural.map_or(0.0, |m| m * metrics.area_natural as f64),
            metrics,
            change,
            saturation_events: st.landscape.saturation_events(),
        };
        self.rows.push(row);
        Ok(())
    }
}

/// One full run. Policies are read from `params.policy` and
/// `drivers.adjustments`.
pub fn run(params: &ModelParams, drivers: &Drivers, seed: u64) -> Result<RunRecord> {
    Simulation::new(params, drivers, seed)?.run_to_end()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn land() -> LandDynamicsParams {
        LandDynamicsParams::default()
    }

    #[test]
    fn land_response_examples() {
        assert_eq!(land_response(100.0, 100.0, 10_000, &land(), LandUse::Crop), (3, 3));
        assert_eq!(land_response(100.0, 98.0, 10_000, &land(), LandUse::Crop), (9, 0));
        assert_eq!(land_response(100.0, 200.0, 10_000, &land(), LandUse::Pasture).0, 0);
        let scaled = LandDynamicsParams {
            floor_mode: FloorMode::Scaled,
            ..land()
        };
        assert_eq!(land_response(100.0, 98.0, 10_000, &scaled, LandUse::Crop), (10, 0));
    }

    #[test]
    fn first_row_is_balanced() {
        let sim = Simulation::new(&ModelParams::default(), &Drivers::builtin(), 1).unwrap();
        let r = &sim.rows()[0];
        assert_eq!(r.year, 1960);
        assert!((r.demand_crop() - r.output_crop()).abs() < 1e-9);
        assert!((r.demand_meat - r.output_meat()).abs() < 1e-9);
        assert!((r.output_crop() - 1500.0 * 1.001).abs() < 1e-9);
        assert!((r.output_meat() - 3500.0 * 1.001).abs() < 1e-9);
    }

    #[test]
    fn step_past_end_is_an_error() {
        let mut params = ModelParams::default();
        params.timeline.end_year = 1962;
        params.timeline.policy_year = 1961;
        let mut sim = Simulation::new(&params, &Drivers::builtin(), 1).unwrap();
        sim.step().unwrap();
        sim.step().unwrap();
        assert!(matches!(sim.step(), Err(Error::RunComplete(1962))));
        assert_eq!(sim.rows().len(), 3);
    }

    #[test]
    fn livestock_cap_freezes_density_after_policy_year() {
        let mut params = ModelParams::default();
        params.timeline.end_year = 2040;
        params.policy.livestock_density_reduction = 0.1;
        let density = |p: &ModelParams| {
            let r = run(p, &Drivers::builtin(), 2).unwrap();
            r.rows.iter().filter(|y| y.year >= 2022).map(|y| y.livestock_density).collect::<Vec<_>>()
        };
        let free = density(&params);
        assert!(free.last().unwrap() > &free[0]);
        params.policy.cap_livestock_density = true;
        let capped = density(&params);
        assert!(capped[1..].iter().all(|l| *l <= capped[0]));
    }
}
