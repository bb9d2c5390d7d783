use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{column_index, RunRecord, N_COLUMNS};
use super::{Exogenous, Simulation};
use crate::demand::Drivers;
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Per-run seeds drawn from a stream seeded by `master_seed`.
pub fn derive_seeds(master_seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..n).map(|_| rng.next_u64()).collect()
}

/// Mean and standard error of one column in one year. Runs where the
/// value is undefined are left out; `n` counts the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub n: usize,
}

/// Ensemble means and standard errors of every record column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub start_year: i32,
    pub years: usize,
    pub seeds: Vec<u64>,
    stats: Vec<ColumnStats>,
}

impl EnsembleResult {
    pub fn n_runs(&self) -> usize {
        self.seeds.len()
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.years as i32 - 1
    }

    pub fn year_range(&self) -> std::ops::RangeInclusive<i32> {
        self.start_year..=self.end_year()
    }

    pub fn stats(&self, year: i32, column: usize) -> Option<&ColumnStats> {
        let y = usize::try_from(year - self.start_year).ok().filter(|y| *y < self.years)?;
        self.stats.get(y * N_COLUMNS + column)
    }

    pub fn mean(&self, year: i32, column: &str) -> Option<f64> {
        self.stats(year, column_index(column)?)?.mean
    }

    pub fn stderr(&self, year: i32, column: &str) -> Option<f64> {
        self.stats(year, column_index(column)?)?.stderr
    }

    /// Mean of one column over all years.
    pub fn series(&self, column: &str) -> Vec<Option<f64>> {
        self.year_range().map(|y| self.mean(y, column)).collect()
    }
}

/// Streaming mean/variance over runs, one cell per (year, column).
#[derive(Debug, Clone)]
pub struct EnsembleAccumulator {
    start_year: i32,
    years: usize,
    seeds: Vec<u64>,
    count: Vec<u32>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl EnsembleAccumulator {
    pub fn new(start_year: i32, years: usize) -> Self {
        let n = years * N_COLUMNS;
        Self {
            start_year,
            years,
            seeds: Vec::new(),
            count: vec![0; n],
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    pub fn add(&mut self, record: &RunRecord) {
        assert_eq!(record.rows.len(), self.years, "record length differs from the ensemble timeline");
        assert_eq!(record.rows[0].year, self.start_year, "record starts in a different year");
        self.seeds.push(record.seed);
        for (y, row) in record.rows.iter().enumerate() {
            for (c, v) in row.values().into_iter().enumerate() {
                let Some(v) = v else { continue };
                let k = y * N_COLUMNS + c;
                self.count[k] += 1;
                let delta = v - self.mean[k];
                self.mean[k] += delta / f64::from(self.count[k]);
                self.m2[k] += delta * (v - self.mean[k]);
            }
        }
    }

    pub fn finish(self) -> EnsembleResult {
        let stats = (0..self.count.len())
            .map(|k| {
                let n = self.count[k] as usize;
                if n == 0 {
                    return ColumnStats {
                        mean: None,
                        stderr: None,
                        n,
                    };
                }
                let se = if n > 1 {
                    (self.m2[k].max(0.0) / (n - 1) as f64 / n as f64).sqrt()
                } else {
                    0.0
                };
                ColumnStats {
                    mean: Some(self.mean[k]),
                    stderr: Some(se),
                    n,
                }
            })
            .collect();
        EnsembleResult {
            start_year: self.start_year,
            years: self.years,
            seeds: self.seeds,
            stats,
        }
    }
}

fn chunk_size() -> usize {
    2 * rayon::current_num_threads().max(1)
}

/// Independent runs with derived seeds, aggregated in seed order so the
/// result does not depend on scheduling. The first failing run aborts the
/// ensemble.
pub fn run_ensemble(params: &ModelParams, drivers: &Drivers, n_runs: usize, master_seed: u64) -> Result<EnsembleResult> {
    run_ensemble_with(params, drivers, n_runs, master_seed, |_| Ok(()))
}

/// [`run_ensemble`], handing every run record to `on_record` in seed order.
pub fn run_ensemble_with<F>(params: &ModelParams, drivers: &Drivers, n_runs: usize, master_seed: u64, mut on_record: F) -> Result<EnsembleResult>
where
    F: FnMut(&RunRecord) -> Result<()>,
{
    if n_runs == 0 {
        return Err(Error::config("an ensemble needs at least one run"));
    }
    params.validate()?;
    let exo = Arc::new(Exogenous::new(drivers, params)?);
    let shared = Arc::new(params.clone());
    let seeds = derive_seeds(master_seed, n_runs);
    let mut acc = EnsembleAccumulator::new(params.timeline.start_year, params.timeline.years());
    for chunk in seeds.chunks(chunk_size()) {
        let records: Vec<RunRecord> = chunk
            .par_iter()
            .map(|&seed| {
                Simulation::with_exogenous(shared.clone(), exo.clone(), seed)
                    .and_then(Simulation::run_to_end)
                    .map_err(|e| Error::Run {
                        seed,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;
        for r in &records {
            on_record(r)?;
            acc.add(r);
        }
    }
    Ok(acc.finish())
}

/// Ensembles for several policy variants that agree up to the policy
/// year. Each seed's run is simulated once up to the policy year and then
/// continued separately under every variant, so all variants share the
/// same landscapes and random streams.
pub fn run_branched(base: &ModelParams, variants: &[(ModelParams, Drivers)], n_runs: usize, master_seed: u64) -> Result<Vec<EnsembleResult>> {
    if n_runs == 0 {
        return Err(Error::config("an ensemble needs at least one run"));
    }
    if variants.is_empty() {
        return Ok(Vec::new());
    }
    base.validate()?;
    let mut trunk_params = base.clone();
    trunk_params.policy = Default::default();
    let trunk_params = Arc::new(trunk_params);
    let policy_year = base.timeline.policy_year;

    let mut branches = Vec::with_capacity(variants.len());
    for (params, drivers) in variants {
        params.validate()?;
        let exo = Exogenous::new(drivers, params)?;
        branches.push((Arc::new(params.clone()), Arc::new(exo)));
    }
    let trunk_exo = branches[0].1.clone();
    for (params, exo) in &branches {
        let mut pre = params.as_ref().clone();
        pre.policy = Default::default();
        if pre != *trunk_params {
            return Err(Error::config("policy variants differ from the base parameters before the policy year"));
        }
        for year in base.timeline.start_year..=policy_year {
            if exo.demand(year) != trunk_exo.demand(year) || exo.organic_shares(year) != trunk_exo.organic_shares(year) {
                return Err(Error::config(format!("policy variants differ in driver inputs in {year}, before the policy year")));
            }
        }
    }

    let seeds = derive_seeds(master_seed, n_runs);
    let t = &base.timeline;
    let mut accs: Vec<EnsembleAccumulator> = (0..branches.len()).map(|_| EnsembleAccumulator::new(t.start_year, t.years())).collect();
    for chunk in seeds.chunks(chunk_size()) {
        let per_seed: Vec<Vec<RunRecord>> = chunk
            .par_iter()
            .map(|&seed| {
                let wrap = |e: Error| Error::Run {
                    seed,
                    source: Box::new(e),
                };
                let mut trunk = Simulation::with_exogenous(trunk_params.clone(), trunk_exo.clone(), seed).map_err(wrap)?;
                trunk.run_until(policy_year).map_err(wrap)?;
                branches
                    .par_iter()
                    .map(|(p, exo)| trunk.branch(p.clone(), exo.clone()).and_then(Simulation::run_to_end).map_err(wrap))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for records in &per_seed {
            for (acc, r) in accs.iter_mut().zip(records) {
                acc.add(r);
            }
        }
    }
    Ok(accs.into_iter().map(EnsembleAccumulator::finish).collect())
}

/// Percentage change of `scenario` over `baseline`; undefined for a zero
/// baseline.
pub fn delta_pct(scenario: f64, baseline: f64) -> Option<f64> {
    (baseline != 0.0).then(|| 100.0 * (scenario - baseline) / baseline)
}

/// Percentage changes in forest and degraded area in `year`.
pub fn delta_vs_baseline(scenario: &EnsembleResult, baseline: &EnsembleResult, year: i32) -> (Option<f64>, Option<f64>) {
    let d = |col: &str| delta_pct(scenario.mean(year, col)?, baseline.mean(year, col)?);
    (d("area_forest"), d("area_degraded"))
}
