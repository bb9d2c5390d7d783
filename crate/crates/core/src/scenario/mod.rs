//! Policy transforms, scenario ensembles, demand-reduction sweeps and
//! portfolio enumeration.
//!
//! Every experiment shares one protocol: the same parameters, drivers, run
//! count and master seed for the baseline and every policy variant, so
//! differences isolate the policy effect from landscape randomness.

mod file;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use file::{load_scenarios, parse_scenarios, ScenarioFile};

use crate::demand::Drivers;
use crate::engine::{delta_vs_baseline, derive_seeds, run_branched, run_ensemble, EnsembleResult};
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;
use crate::params::ModelParams;

/// Largest policy pool that [`enumerate_and_rank`] accepts.
pub const MAX_POOL: usize = 12;

/// Default policy magnitude: a 10% shift of the targeted quantity.
pub const DEFAULT_MAGNITUDE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    ChemicalReduction,
    OrganicCropExpansion,
    OrganicMeatExpansion,
    LivestockDensityReduction,
    DeforestationRestrictionCrop,
    DeforestationRestrictionMeat,
    CropDemandReduction,
    MeatDemandReduction,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::ChemicalReduction,
        PolicyKind::OrganicCropExpansion,
        PolicyKind::OrganicMeatExpansion,
        PolicyKind::LivestockDensityReduction,
        PolicyKind::DeforestationRestrictionCrop,
        PolicyKind::DeforestationRestrictionMeat,
        PolicyKind::CropDemandReduction,
        PolicyKind::MeatDemandReduction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::ChemicalReduction => "chemical_reduction",
            PolicyKind::OrganicCropExpansion => "organic_crop_expansion",
            PolicyKind::OrganicMeatExpansion => "organic_meat_expansion",
            PolicyKind::LivestockDensityReduction => "livestock_density_reduction",
            PolicyKind::DeforestationRestrictionCrop => "deforestation_restriction_crop",
            PolicyKind::DeforestationRestrictionMeat => "deforestation_restriction_meat",
            PolicyKind::CropDemandReduction => "crop_demand_reduction",
            PolicyKind::MeatDemandReduction => "meat_demand_reduction",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    /// Accepts `snake_case` and `CamelCase` names.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.trim().chars().filter(|c| *c != '_' && *c != '-').flat_map(char::to_lowercase).collect();
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str().replace('_', "") == key)
            .ok_or_else(|| Error::config(format!("unknown policy kind `{s}`")))
    }
}

/// One intervention and its magnitude in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    #[serde(default = "default_magnitude")]
    pub magnitude: f64,
}

fn default_magnitude() -> f64 {
    DEFAULT_MAGNITUDE
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, magnitude: f64) -> Result<Self> {
        let spec = Self { kind, magnitude };
        spec.validate()?;
        Ok(spec)
    }

    /// `kind` at the default magnitude.
    pub fn default_for(kind: PolicyKind) -> Self {
        Self {
            kind,
            magnitude: DEFAULT_MAGNITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.magnitude) {
            Ok(())
        } else {
            Err(Error::config(format!("{} magnitude {} outside [0, 1]", self.kind, self.magnitude)))
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, fmt_sig(self.magnitude))
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    /// `kind` or `kind:magnitude`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, magnitude) = match s.split_once(':') {
            Some((k, m)) => {
                let m = m.trim().parse::<f64>().map_err(|_| Error::config(format!("bad magnitude in policy `{s}`")))?;
                (k, m)
            }
            None => (s, DEFAULT_MAGNITUDE),
        };
        PolicySpec::new(kind.parse()?, magnitude)
    }
}

/// A set of simultaneous interventions, at most one per kind, kept sorted
/// by kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Portfolio {
    policies: Vec<PolicySpec>,
}

impl Portfolio {
    pub fn new(policies: impl IntoIterator<Item = PolicySpec>) -> Result<Self> {
        let mut policies: Vec<PolicySpec> = policies.into_iter().collect();
        for p in &policies {
            p.validate()?;
        }
        policies.sort_by_key(|p| p.kind);
        if let Some(w) = policies.windows(2).find(|w| w[0].kind == w[1].kind) {
            return Err(Error::config(format!("portfolio lists {} twice", w[0].kind)));
        }
        Ok(Self { policies })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(spec: PolicySpec) -> Result<Self> {
        Self::new([spec])
    }

    /// This portfolio with `spec` added, replacing any spec of the same kind.
    pub fn with(&self, spec: PolicySpec) -> Result<Self> {
        let rest = self.policies.iter().copied().filter(|p| p.kind != spec.kind);
        Self::new(rest.chain([spec]))
    }

    pub fn policies(&self) -> &[PolicySpec] {
        &self.policies
    }

    pub fn contains(&self, kind: PolicyKind) -> bool {
        self.get(kind).is_some()
    }

    pub fn get(&self, kind: PolicyKind) -> Option<&PolicySpec> {
        self.policies.iter().find(|p| p.kind == kind)
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }
}

impl fmt::Display for Portfolio {
    /// `kind:magnitude` terms joined by `+`; `baseline` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.policies.is_empty() {
            return f.write_str("baseline");
        }
        let terms: Vec<String> = self.policies.iter().map(ToString::to_string).collect();
        f.write_str(&terms.join("+"))
    }
}

/// Apply one intervention. Levers and adjustments are assigned, not
/// accumulated, so applying a spec twice equals applying it once.
pub fn apply_policy(params: &ModelParams, drivers: &Drivers, spec: &PolicySpec) -> Result<(ModelParams, Drivers)> {
    spec.validate()?;
    let mut params = params.clone();
    let mut drivers = drivers.clone();
    let m = spec.magnitude;
    let adj = &mut drivers.adjustments;
    adj.anchor_year = params.timeline.policy_year;
    match spec.kind {
        PolicyKind::ChemicalReduction => params.policy.chemical_reduction = m,
        PolicyKind::LivestockDensityReduction => params.policy.livestock_density_reduction = m,
        PolicyKind::DeforestationRestrictionCrop => params.policy.deforestation_restriction_crop = m,
        PolicyKind::DeforestationRestrictionMeat => params.policy.deforestation_restriction_meat = m,
        PolicyKind::OrganicCropExpansion => adj.organic_crop_expansion = m,
        PolicyKind::OrganicMeatExpansion => adj.organic_meat_expansion = m,
        PolicyKind::CropDemandReduction => adj.crop_demand_reduction = m,
        PolicyKind::MeatDemandReduction => adj.meat_demand_reduction = m,
    }
    Ok((params, drivers))
}

/// Apply every intervention of a portfolio.
pub fn apply_portfolio(params: &ModelParams, drivers: &Drivers, portfolio: &Portfolio) -> Result<(ModelParams, Drivers)> {
    let mut out = (params.clone(), drivers.clone());
    for spec in portfolio.policies() {
        out = apply_policy(&out.0, &out.1, spec)?;
    }
    Ok(out)
}

/// Outcome of one portfolio against the shared baseline at the end year.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub id: String,
    pub portfolio: Portfolio,
    pub delta_forest_pct: Option<f64>,
    pub delta_degraded_pct: Option<f64>,
    pub ensemble: Arc<EnsembleResult>,
}

impl ScenarioResult {
    fn new(id: String, portfolio: Portfolio, ensemble: EnsembleResult, baseline: &EnsembleResult) -> Self {
        let (delta_forest_pct, delta_degraded_pct) = delta_vs_baseline(&ensemble, baseline, baseline.end_year());
        Self {
            id,
            portfolio,
            delta_forest_pct,
            delta_degraded_pct,
            ensemble: Arc::new(ensemble),
        }
    }

    /// More forest and less degraded land than the baseline.
    pub fn improves_both(&self) -> bool {
        matches!((self.delta_forest_pct, self.delta_degraded_pct), (Some(f), Some(d)) if f > 0.0 && d < 0.0)
    }
}

/// Baseline and scenario ensembles from one experiment.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub baseline: Arc<EnsembleResult>,
    pub scenarios: Vec<ScenarioResult>,
}

/// Shared settings for every ensemble of an experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub params: ModelParams,
    pub drivers: Drivers,
    pub n_runs: usize,
    pub master_seed: u64,
}

impl Experiment {
    pub fn new(params: ModelParams, drivers: Drivers, n_runs: usize, master_seed: u64) -> Self {
        Self {
            params,
            drivers,
            n_runs,
            master_seed,
        }
    }

    pub fn baseline(&self) -> Result<EnsembleResult> {
        run_ensemble(&self.params, &self.drivers, self.n_runs, self.master_seed)
    }

    /// One portfolio against a baseline computed under this experiment's
    /// protocol.
    pub fn run_scenario(&self, portfolio: &Portfolio, baseline: &EnsembleResult) -> Result<ScenarioResult> {
        if baseline.seeds != derive_seeds(self.master_seed, self.n_runs) {
            return Err(Error::config("baseline was computed with a different seed protocol"));
        }
        let (params, drivers) = apply_portfolio(&self.params, &self.drivers, portfolio)?;
        let ensemble = run_ensemble(&params, &drivers, self.n_runs, self.master_seed)?;
        Ok(ScenarioResult::new(portfolio.to_string(), portfolio.clone(), ensemble, baseline))
    }

    /// Baseline plus every `(id, portfolio)`, simulated together: each seed
    /// runs once up to the policy year and then branches.
    pub fn evaluate(&self, portfolios: &[(String, Portfolio)]) -> Result<Evaluation> {
        let mut variants = Vec::with_capacity(portfolios.len() + 1);
        variants.push((self.params.clone(), self.drivers.clone()));
        for (_, p) in portfolios {
            variants.push(apply_portfolio(&self.params, &self.drivers, p)?);
        }
        let mut results = run_branched(&self.params, &variants, self.n_runs, self.master_seed)?.into_iter();
        let baseline = results.next().expect("baseline ensemble");
        let scenarios = portfolios
            .iter()
            .zip(results)
            .map(|((id, p), ens)| ScenarioResult::new(id.clone(), p.clone(), ens, &baseline))
            .collect();
        Ok(Evaluation {
            baseline: Arc::new(baseline),
            scenarios,
        })
    }
}

/// One grid point of a demand-reduction sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub rho: f64,
    pub result: ScenarioResult,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub baseline: Arc<EnsembleResult>,
    pub points: Vec<SweepPoint>,
    /// Smallest grid value improving both forest and degraded area.
    pub rho_star: Option<f64>,
    /// Threshold linearly interpolated between the last failing and the
    /// first passing grid value.
    pub rho_star_interpolated: Option<f64>,
}

/// Portfolio `base` with crop and meat demand reductions of `rho`.
pub fn sweep_portfolio(base: &Portfolio, rho: f64) -> Result<Portfolio> {
    base.with(PolicySpec::new(PolicyKind::CropDemandReduction, rho)?)?
        .with(PolicySpec::new(PolicyKind::MeatDemandReduction, rho)?)
}

/// Evaluate `base` combined with each demand reduction in `rho_grid`.
pub fn demand_sweep(exp: &Experiment, base: &Portfolio, rho_grid: &[f64]) -> Result<SweepResult> {
    if rho_grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    if rho_grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::config("sweep grid values must lie in [0, 1]"));
    }
    if rho_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sweep grid must be strictly ascending"));
    }
    let portfolios = rho_grid
        .iter()
        .map(|&rho| Ok((format!("rho_{}", fmt_sig(rho)), sweep_portfolio(base, rho)?)))
        .collect::<Result<Vec<_>>>()?;
    let eval = exp.evaluate(&portfolios)?;
    let points: Vec<SweepPoint> = rho_grid
        .iter()
        .zip(eval.scenarios)
        .map(|(&rho, result)| SweepPoint { rho, result })
        .collect();
    let (rho_star, rho_star_interpolated) = sweep_threshold(&points);
    Ok(SweepResult {
        baseline: eval.baseline,
        points,
        rho_star,
        rho_star_interpolated,
    })
}

/// Grid and interpolated thresholds of ascending sweep points, as in
/// [`SweepResult`].
pub fn sweep_threshold(points: &[SweepPoint]) -> (Option<f64>, Option<f64>) {
    let Some(k) = points.iter().position(|p| p.result.improves_both()) else {
        return (None, None);
    };
    let hit = &points[k];
    if k == 0 {
        return (Some(hit.rho), Some(hit.rho));
    }
    let prev = &points[k - 1];
    // Root of the linear interpolant of `f` where it crosses into the
    // passing side; the earlier grid value if it was already there.
    let cross = |fa: Option<f64>, fb: Option<f64>, passes: fn(f64) -> bool| match (fa, fb) {
        (Some(a), _) if passes(a) => prev.rho,
        (Some(a), Some(b)) => prev.rho + (hit.rho - prev.rho) * a / (a - b),
        _ => hit.rho,
    };
    let forest = cross(prev.result.delta_forest_pct, hit.result.delta_forest_pct, |v| v > 0.0);
    let degraded = cross(prev.result.delta_degraded_pct, hit.result.delta_degraded_pct, |v| v < 0.0);
    (Some(hit.rho), Some(forest.max(degraded)))
}

/// Parse a grid written `start:stop:step`, both ends included.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::config(format!("grid `{s}` is not `start:stop:step`"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    // Rounded so that 0:1:0.1 yields 0.3 rather than 0.30000000000000004.
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Parse a comma-separated list of `kind[:magnitude]` terms.
pub fn parse_policy_list(s: &str) -> Result<Vec<PolicySpec>> {
    s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
}

/// Every nonempty subset of a policy pool, ranked by forest gain and by
/// degraded-area reduction.
#[derive(Debug, Clone)]
pub struct Ranking {
    pub pool: Vec<PolicySpec>,
    pub baseline: Arc<EnsembleResult>,
    /// In enumeration order: subset bit masks 1, 2, 3, ...
    pub results: Vec<ScenarioResult>,
    /// Indices into `results`, best first.
    pub by_forest: Vec<usize>,
    pub by_degraded: Vec<usize>,
    pub top_k: usize,
}

impl Ranking {
    pub fn top_forest(&self) -> &[usize] {
        &self.by_forest[..self.top_k.min(self.by_forest.len())]
    }

    pub fn top_degraded(&self) -> &[usize] {
        &self.by_degraded[..self.top_k.min(self.by_degraded.len())]
    }

    /// Whether result `i` is in both top lists.
    pub fn in_both(&self, i: usize) -> bool {
        self.top_forest().contains(&i) && self.top_degraded().contains(&i)
    }
}

/// Subset portfolios of `pool` in bit-mask order, with ids `p<mask>`.
pub fn enumerate_portfolios(pool: &[PolicySpec]) -> Result<Vec<(String, Portfolio)>> {
    if pool.len() > MAX_POOL {
        return Err(Error::Budget(format!(
            "a pool of {} policies needs {} ensembles; use at most {MAX_POOL} policies or evaluate portfolios individually",
            pool.len(),
            (1u64 << pool.len()) - 1
        )));
    }
    Portfolio::new(pool.iter().copied())?;
    let width = format!("{}", (1u32 << pool.len()) - 1).len();
    (1u32..(1 << pool.len()))
        .map(|mask| {
            let specs = pool.iter().enumerate().filter(|(j, _)| mask & (1 << j) != 0).map(|(_, s)| *s);
            Ok((format!("p{mask:0width$}"), Portfolio::new(specs)?))
        })
        .collect()
}

pub fn enumerate_and_rank(exp: &Experiment, pool: &[PolicySpec], top_k: usize) -> Result<Ranking> {
    if pool.is_empty() {
        return Err(Error::config("policy pool is empty"));
    }
    let portfolios = enumerate_portfolios(pool)?;
    let eval = exp.evaluate(&portfolios)?;
    let results = eval.scenarios;
    let order = |key: fn(&ScenarioResult) -> Option<f64>| {
        let mut idx: Vec<usize> = (0..results.len()).collect();
        // Undefined deltas rank last; ties keep enumeration order.
        idx.sort_by(|&a, &b| match (key(&results[a]), key(&results[b])) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
        idx
    };
    let by_forest = order(|r| r.delta_forest_pct);
    let by_degraded = order(|r| r.delta_degraded_pct.map(|d| -d));
    Ok(Ranking {
        pool: pool.to_vec(),
        baseline: eval.baseline,
        results,
        by_forest,
        by_degraded,
        top_k,
    })
}
