//! The gridded landscape: land cover, management, ecosystem integrity and
//! the mechanics of conversion, abandonment and organic adoption.
//!
//! Cells are stored column-wise (one vector per attribute). Site-specific
//! degradation and restoration rates never change after initialization and
//! are shared between clones, so forking a landscape copies only the
//! mutable state.

mod field;
mod snapshot;

use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use field::{gaussian_field, generate_correlated_mask, morans_i};

use crate::error::{Error, Result};
use crate::params::{LandscapeParams, NaturalSign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandUse {
    Natural,
    Crop,
    Pasture,
}

impl LandUse {
    pub fn as_str(self) -> &'static str {
        match self {
            LandUse::Natural => "natural",
            LandUse::Crop => "crop",
            LandUse::Pasture => "pasture",
        }
    }

    pub fn is_agricultural(self) -> bool {
        self != LandUse::Natural
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Management {
    Conventional,
    Organic,
}

impl Management {
    pub fn as_str(self) -> &'static str {
        match self {
            Management::Conventional => "conventional",
            Management::Organic => "organic",
        }
    }
}

/// A value view of one grid site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub land_use: LandUse,
    /// `None` for natural cells.
    pub management: Option<Management>,
    pub epsilon: f64,
    pub theta_n: f64,
    pub theta_c: f64,
    pub theta_m: f64,
}

/// Per-step degradation pressure felt by each agricultural subset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pressures {
    pub crop_conventional: f64,
    pub crop_organic: f64,
    pub pasture_conventional: f64,
    pub pasture_organic: f64,
}

impl Pressures {
    /// Pressures from the current input intensities. With `organic_relief`
    /// organic crop cells carry no chemical load and organic pasture sees
    /// the capped livestock density.
    pub fn from_inputs(lambda: f64, m: f64, phi: f64, lambda_max: f64, organic_relief: bool) -> Self {
        if organic_relief {
            Self {
                crop_conventional: m + phi,
                crop_organic: m,
                pasture_conventional: lambda,
                pasture_organic: lambda.min(lambda_max),
            }
        } else {
            Self::uniform(lambda, m, phi)
        }
    }

    /// Identical pressure for both management regimes.
    pub fn uniform(lambda: f64, m: f64, phi: f64) -> Self {
        Self {
            crop_conventional: m + phi,
            crop_organic: m + phi,
            pasture_conventional: lambda,
            pasture_organic: lambda,
        }
    }
}

/// Aggregate land-class statistics. Means over empty classes are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeMetrics {
    pub area_natural: usize,
    pub area_crop: usize,
    pub area_pasture: usize,
    pub area_crop_organic: usize,
    pub area_pasture_organic: usize,
    pub area_forest: usize,
    pub area_degraded: usize,
    pub mean_eps_natural: Option<f64>,
    pub mean_eps_crop_conv: Option<f64>,
    pub mean_eps_crop_org: Option<f64>,
    pub mean_eps_pasture_conv: Option<f64>,
    pub mean_eps_pasture_org: Option<f64>,
}

#[derive(Debug)]
struct Rates {
    n: Vec<f64>,
    c: Vec<f64>,
    m: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Landscape {
    width: usize,
    height: usize,
    land_use: Vec<LandUse>,
    organic: Vec<bool>,
    eps: Vec<f64>,
    rates: Arc<Rates>,
    eps0_natural_sum: f64,
    counts: [usize; 3],
    organic_counts: [usize; 3],
    /// Integrity sums per class slot (see [`Landscape::slot`]), kept in step
    /// with every mutation.
    sums: [f64; 5],
    saturation_events: u64,
}

/// Draw a restoration or degradation rate as the reciprocal of a lognormal
/// lifespan with median `sigma` and log-scale standard deviation `mu`.
pub fn sample_theta<R: Rng + ?Sized>(mu: f64, sigma: f64, rng: &mut R) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::config(format!("lifespan scale {sigma} must be positive")));
    }
    if !(mu >= 0.0) {
        return Err(Error::config(format!("lifespan spread {mu} must be non-negative")));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(1.0 / (sigma * (mu * z).exp()))
}

impl Landscape {
    /// Build the initial landscape: a correlated natural-land mask, the
    /// remainder split at random between pasture and cropland in the
    /// configured ratio, site rates drawn once, all agriculture conventional.
    pub fn generate<R: Rng + ?Sized>(params: &LandscapeParams, rng: &mut R) -> Result<Self> {
        let (w, h) = (params.width, params.height);
        if w == 0 || h == 0 {
            return Err(Error::config("grid dimensions must be positive"));
        }
        let shares = params.share_natural + params.share_pasture + params.share_crop;
        if (shares - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("land shares sum to {shares}, expected 1")));
        }
        let n = w * h;
        let mask = generate_correlated_mask(w, h, params.xi, params.share_natural, rng)?;

        let mut land_use = vec![LandUse::Natural; n];
        let mut rest: Vec<usize> = (0..n).filter(|&i| !mask[i]).collect();
        rest.shuffle(rng);
        let agri = params.share_pasture + params.share_crop;
        let n_pasture = if agri > 0.0 {
            ((params.share_pasture / agri) * rest.len() as f64).round() as usize
        } else {
            0
        };
        for (k, &i) in rest.iter().enumerate() {
            land_use[i] = if k < n_pasture { LandUse::Pasture } else { LandUse::Crop };
        }

        let draw = |mu: f64, sigma: f64, rng: &mut R| -> Result<Vec<f64>> {
            (0..n).map(|_| sample_theta(mu, sigma, rng)).collect()
        };
        let rates = Rates {
            n: draw(params.mu_n, params.sigma_n, rng)?,
            c: draw(params.mu_c, params.sigma_c, rng)?,
            m: draw(params.mu_m, params.sigma_m, rng)?,
        };

        let eps = land_use
            .iter()
            .map(|lu| match lu {
                LandUse::Natural => params.eps_init_natural,
                _ => params.eps_init_agricultural,
            })
            .collect();
        Ok(Self::assemble(w, h, land_use, vec![false; n], eps, rates))
    }

    /// Build a landscape from explicit cells (row-major). The initial
    /// natural-integrity reference is taken from these cells.
    pub fn from_cells(width: usize, height: usize, cells: &[Cell]) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::config(format!(
                "expected {} cells for a {width}x{height} grid, got {}",
                width * height,
                cells.len()
            )));
        }
        let land_use = cells.iter().map(|c| c.land_use).collect();
        let organic = cells
            .iter()
            .map(|c| c.land_use.is_agricultural() && c.management == Some(Management::Organic))
            .collect();
        let eps = cells.iter().map(|c| c.epsilon).collect();
        let rates = Rates {
            n: cells.iter().map(|c| c.theta_n).collect(),
            c: cells.iter().map(|c| c.theta_c).collect(),
            m: cells.iter().map(|c| c.theta_m).collect(),
        };
        Ok(Self::assemble(width, height, land_use, organic, eps, rates))
    }

    fn assemble(width: usize, height: usize, land_use: Vec<LandUse>, organic: Vec<bool>, eps: Vec<f64>, rates: Rates) -> Self {
        let mut ls = Self {
            width,
            height,
            land_use,
            organic,
            eps,
            rates: Arc::new(rates),
            eps0_natural_sum: 0.0,
            counts: [0; 3],
            organic_counts: [0; 3],
            sums: [0.0; 5],
            saturation_events: 0,
        };
        ls.eps0_natural_sum = ls.natural_eps_sum();
        (ls.counts, ls.organic_counts) = ls.recount();
        ls.sums = ls.resum();
        ls
    }

    /// Class slot of a cell: natural, crop (conventional, organic), pasture
    /// (conventional, organic).
    fn slot(&self, i: usize) -> usize {
        match self.land_use[i] {
            LandUse::Natural => 0,
            LandUse::Crop => 1 + self.organic[i] as usize,
            LandUse::Pasture => 3 + self.organic[i] as usize,
        }
    }

    fn resum(&self) -> [f64; 5] {
        let mut sums = [0.0; 5];
        for i in 0..self.len() {
            sums[self.slot(i)] += self.eps[i];
        }
        sums
    }

    /// Mean integrity of one agricultural management subset, or of natural
    /// land when `management` is `None`. `None` for an empty subset.
    pub fn mean_eps(&self, lu: LandUse, management: Option<Management>) -> Option<f64> {
        let org = management == Some(Management::Organic);
        let (slot, n) = match lu {
            LandUse::Natural => (0, self.area(lu)),
            _ => {
                let n_org = self.organic_area(lu);
                let n = if org { n_org } else { self.area(lu) - n_org };
                (2 * lu.slot() - 1 + org as usize, n)
            }
        };
        (n > 0).then(|| self.sums[slot] / n as f64)
    }

    #[cfg(test)]
    fn set_eps(&mut self, i: usize, value: f64) {
        let slot = self.slot(i);
        self.sums[slot] += value - self.eps[i];
        self.eps[i] = value;
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.land_use.len()
    }

    pub fn is_empty(&self) -> bool {
        self.land_use.is_empty()
    }

    pub fn cell(&self, i: usize) -> Cell {
        let land_use = self.land_use[i];
        let management = land_use.is_agricultural().then(|| {
            if self.organic[i] {
                Management::Organic
            } else {
                Management::Conventional
            }
        });
        Cell {
            land_use,
            management,
            epsilon: self.eps[i],
            theta_n: self.rates.n[i],
            theta_c: self.rates.c[i],
            theta_m: self.rates.m[i],
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell(i))
    }

    /// Sum of initial integrity over initially natural cells.
    pub fn eps0_natural_sum(&self) -> f64 {
        self.eps0_natural_sum
    }

    pub fn area(&self, lu: LandUse) -> usize {
        self.counts[lu.slot()]
    }

    pub fn organic_area(&self, lu: LandUse) -> usize {
        self.organic_counts[lu.slot()]
    }

    /// Number of integrity updates that would have driven a cell to or
    /// below zero and were clamped to the floor instead.
    pub fn saturation_events(&self) -> u64 {
        self.saturation_events
    }

    pub fn natural_eps_sum(&self) -> f64 {
        self.land_use
            .iter()
            .zip(&self.eps)
            .filter(|(lu, _)| **lu == LandUse::Natural)
            .map(|(_, e)| e)
            .sum()
    }

    /// Direct recount of (land-use, organic) areas from the grid.
    pub fn recount(&self) -> ([usize; 3], [usize; 3]) {
        let mut counts = [0; 3];
        let mut organic = [0; 3];
        for (lu, org) in self.land_use.iter().zip(&self.organic) {
            counts[lu.slot()] += 1;
            if *org {
                organic[lu.slot()] += 1;
            }
        }
        (counts, organic)
    }

    /// Ecosystem-service index: current natural integrity relative to the
    /// initial natural integrity, raised to `p`. With no natural land left
    /// the index is evaluated at a single residual cell of integrity
    /// `eps_min`. A landscape that started without natural land has no
    /// reference and reports 1.
    pub fn ecosystem_service(&self, p: f64, eps_min: f64) -> f64 {
        if !(self.eps0_natural_sum > 0.0) {
            return 1.0;
        }
        let numerator = if self.area(LandUse::Natural) == 0 {
            eps_min
        } else {
            self.sums[0].max(eps_min)
        };
        (numerator / self.eps0_natural_sum).powf(p)
    }

    /// One integrity step for every cell: exponential decay on agricultural
    /// land scaled by pressure over ecosystem services, logistic recovery on
    /// natural land scaled by ecosystem services. Returns the metrics of the
    /// updated grid.
    pub fn update_integrity(&mut self, pressures: &Pressures, e: f64, params: &LandscapeParams) -> LandscapeMetrics {
        assert!(e > 0.0, "ecosystem service index must be positive, got {e}");
        let eps_min = params.eps_min;
        let eps_max = params.eps_max;
        let sign = match params.natural_sign {
            NaturalSign::Growth => 1.0,
            NaturalSign::Literal => -1.0,
        };
        // Per-slot pressure over services; natural cells use the growth term.
        let load = [
            0.0,
            pressures.crop_conventional / e,
            pressures.crop_organic / e,
            pressures.pasture_conventional / e,
            pressures.pasture_organic / e,
        ];
        let growth = sign * e;
        let rates = &*self.rates;
        let mut saturated = 0u64;
        let mut acc = Tally::default();
        for i in 0..self.eps.len() {
            let eps = self.eps[i];
            let slot = self.slot(i);
            let (mult, upper) = match slot {
                0 => (1.0 + growth * rates.n[i] * (1.0 - eps / eps_max), eps_max),
                1 | 2 => (1.0 - rates.c[i] * load[slot], 1.0),
                _ => (1.0 - rates.m[i] * load[slot], 1.0),
            };
            let next = if mult <= 0.0 {
                saturated += 1;
                eps_min
            } else {
                (eps * mult).clamp(eps_min, upper)
            };
            self.eps[i] = next;
            acc.add(slot, next, params);
        }
        self.saturation_events += saturated;
        self.sums = acc.sums;
        acc.finish()
    }

    /// Convert up to `count` natural cells with the highest integrity into
    /// conventional `target` land. Integrity is clipped to the agricultural
    /// ceiling of 1. Returns the number converted.
    pub fn convert_cells<R: Rng + ?Sized>(&mut self, target: LandUse, count: usize, rng: &mut R) -> usize {
        assert!(target.is_agricultural(), "conversion target must be agricultural");
        if count == 0 {
            return 0;
        }
        let chosen = self.select(LandUse::Natural, count, Extreme::Highest, rng);
        let to = 2 * target.slot() - 1;
        for &i in &chosen {
            let eps = self.eps[i];
            self.sums[0] -= eps;
            self.land_use[i] = target;
            self.organic[i] = false;
            self.eps[i] = eps.min(1.0);
            self.sums[to] += self.eps[i];
        }
        self.counts[LandUse::Natural.slot()] -= chosen.len();
        self.counts[target.slot()] += chosen.len();
        chosen.len()
    }

    /// Return up to `count` cells of `source` with the lowest integrity to
    /// natural land; they keep their integrity. Returns the number abandoned.
    pub fn abandon_cells<R: Rng + ?Sized>(&mut self, source: LandUse, count: usize, rng: &mut R) -> usize {
        assert!(source.is_agricultural(), "abandonment source must be agricultural");
        if count == 0 {
            return 0;
        }
        let chosen = self.select(source, count, Extreme::Lowest, rng);
        for &i in &chosen {
            if self.organic[i] {
                self.organic_counts[source.slot()] -= 1;
            }
            self.sums[self.slot(i)] -= self.eps[i];
            self.sums[0] += self.eps[i];
            self.land_use[i] = LandUse::Natural;
            self.organic[i] = false;
        }
        self.counts[source.slot()] -= chosen.len();
        self.counts[LandUse::Natural.slot()] += chosen.len();
        chosen.len()
    }

    /// Bring the organic cell count of each agricultural class to
    /// `round(share * class area)`, promoting (or demoting) cells chosen
    /// uniformly at random.
    pub fn set_organic_share<R: Rng + ?Sized>(&mut self, share_crop: f64, share_pasture: f64, rng: &mut R) {
        self.set_class_organic(LandUse::Crop, share_crop, rng);
        self.set_class_organic(LandUse::Pasture, share_pasture, rng);
    }

    fn set_class_organic<R: Rng + ?Sized>(&mut self, lu: LandUse, share: f64, rng: &mut R) {
        let share = share.clamp(0.0, 1.0);
        let target = (share * self.area(lu) as f64).round() as usize;
        let current = self.organic_area(lu);
        if target == current {
            return;
        }
        let promote = target > current;
        let available = if promote { self.area(lu) - current } else { current };
        let k = target.abs_diff(current).min(available);
        let conv = 2 * lu.slot() - 1;
        let (from, to) = if promote { (conv, conv + 1) } else { (conv + 1, conv) };
        let eligible = |ls: &Self, i: usize| ls.land_use[i] == lu && ls.organic[i] != promote;
        let flip = |ls: &mut Self, i: usize| {
            ls.organic[i] = promote;
            ls.sums[from] -= ls.eps[i];
            ls.sums[to] += ls.eps[i];
        };
        if k * 8 <= available {
            // Rejection sampling: a flipped cell is no longer eligible, so
            // draws are without replacement.
            let mut done = 0;
            while done < k {
                let i = rng.random_range(0..self.len());
                if eligible(self, i) {
                    flip(self, i);
                    done += 1;
                }
            }
        } else {
            let pool: Vec<usize> = (0..self.len()).filter(|&i| eligible(self, i)).collect();
            for j in index::sample(rng, pool.len(), k) {
                flip(self, pool[j]);
            }
        }
        if promote {
            self.organic_counts[lu.slot()] += k;
        } else {
            self.organic_counts[lu.slot()] -= k;
        }
    }

    /// Exact metrics from a single pass over the grid.
    pub fn metrics(&self, params: &LandscapeParams) -> LandscapeMetrics {
        let mut acc = Tally::default();
        for i in 0..self.len() {
            acc.add(self.slot(i), self.eps[i], params);
        }
        acc.finish()
    }

    /// Check cached counts against the grid and every integrity value
    /// against its class bounds. Returns a description of the first breach.
    pub fn check_invariants(&self, params: &LandscapeParams) -> std::result::Result<(), String> {
        let (counts, organic) = self.recount();
        if counts != self.counts || organic != self.organic_counts {
            return Err(format!(
                "cached areas {:?}/{:?} differ from recount {:?}/{:?}",
                self.counts, self.organic_counts, counts, organic
            ));
        }
        if counts.iter().sum::<usize>() != self.width * self.height {
            return Err("cell count not conserved".into());
        }
        let exact = self.resum();
        for (k, (cached, exact)) in self.sums.iter().zip(exact).enumerate() {
            if (cached - exact).abs() > 1e-9 * exact.abs().max(1.0) {
                return Err(format!("cached integrity sum {cached} of class slot {k} differs from recount {exact}"));
            }
        }
        for (i, (&lu, &eps)) in self.land_use.iter().zip(&self.eps).enumerate() {
            let upper = if lu.is_agricultural() { 1.0 } else { params.eps_max };
            if !(eps >= params.eps_min && eps <= upper) {
                return Err(format!("cell {i} ({}) integrity {eps} outside [{}, {upper}]", lu.as_str(), params.eps_min));
            }
            if lu == LandUse::Natural && self.organic[i] {
                return Err(format!("natural cell {i} carries organic management"));
            }
        }
        Ok(())
    }

    /// Indices of up to `k` cells of class `lu` with extreme integrity,
    /// ties at the cut broken uniformly at random.
    fn select<R: Rng + ?Sized>(&self, lu: LandUse, k: usize, which: Extreme, rng: &mut R) -> Vec<usize> {
        let key = |v: f64| match which {
            Extreme::Highest => -v,
            Extreme::Lowest => v,
        };
        let members = || self.land_use.iter().zip(&self.eps).enumerate().filter(move |(_, (l, _))| **l == lu);
        let available = self.area(lu);
        if k >= available {
            return members().map(|(i, _)| i).collect();
        }
        // Most calls hit a large block of cells sharing the extreme value.
        let (mut best, mut n_best) = (f64::INFINITY, 0usize);
        for (_, (_, &e)) in members() {
            let v = key(e);
            if v < best {
                best = v;
                n_best = 1;
            } else if v == best {
                n_best += 1;
            }
        }
        if n_best >= k {
            // Only ties at the extreme are chosen: pick them by rank.
            let mut ranks = index::sample(rng, n_best, k).into_vec();
            ranks.sort_unstable();
            let mut chosen = Vec::with_capacity(k);
            let mut next = ranks.iter().peekable();
            let ties = members().filter(|(_, (_, &e))| key(e) == best).map(|(i, _)| i);
            for (rank, i) in ties.enumerate() {
                match next.peek() {
                    Some(&&r) if r == rank => {
                        chosen.push(i);
                        next.next();
                    }
                    Some(_) => {}
                    None => break,
                }
            }
            return chosen;
        }
        let mut vals: Vec<f64> = members().map(|(_, (_, &e))| key(e)).collect();
        let cut = *vals.select_nth_unstable_by(k - 1, f64::total_cmp).1;
        let mut chosen = Vec::with_capacity(k);
        let mut tied = Vec::new();
        for (i, (_, &e)) in members() {
            let v = key(e);
            if v < cut {
                chosen.push(i);
            } else if v == cut {
                tied.push(i);
            }
        }
        let need = k - chosen.len();
        for j in index::sample(rng, tied.len(), need) {
            chosen.push(tied[j]);
        }
        chosen
    }
}

#[derive(Default)]
struct Tally {
    sums: [f64; 5],
    ns: [usize; 5],
    forest: usize,
    degraded: usize,
}

impl Tally {
    #[inline]
    fn add(&mut self, slot: usize, eps: f64, params: &LandscapeParams) {
        self.sums[slot] += eps;
        self.ns[slot] += 1;
        self.degraded += (eps < params.degraded_threshold) as usize;
        self.forest += (slot == 0 && eps > params.forest_threshold) as usize;
    }

    fn finish(self) -> LandscapeMetrics {
        let ns = self.ns;
        let mean = |k: usize| (ns[k] > 0).then(|| self.sums[k] / ns[k] as f64);
        LandscapeMetrics {
            area_natural: ns[0],
            area_crop: ns[1] + ns[2],
            area_pasture: ns[3] + ns[4],
            area_crop_organic: ns[2],
            area_pasture_organic: ns[4],
            area_forest: self.forest,
            area_degraded: self.degraded,
            mean_eps_natural: mean(0),
            mean_eps_crop_conv: mean(1),
            mean_eps_crop_org: mean(2),
            mean_eps_pasture_conv: mean(3),
            mean_eps_pasture_org: mean(4),
        }
    }
}

#[derive(Clone, Copy)]
enum Extreme {
    Highest,
    Lowest,
}
