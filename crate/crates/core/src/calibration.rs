//! Least-squares calibration of the demand functions and the trend forms
//! used to extend driver series past their last data year.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DemandParams;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub rss: f64,
    pub residuals: Vec<f64>,
}

impl LinearFit {
    fn evaluate(x: &[f64], y: &[f64], intercept: f64, slope: f64) -> Self {
        let residuals: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - intercept - slope * xi).collect();
        let rss = residuals.iter().map(|r| r * r).sum();
        Self {
            intercept,
            slope,
            rss,
            residuals,
        }
    }
}

/// Closed-interval bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Bounds {
    pub const FREE: Bounds = Bounds { lo: None, hi: None };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    fn contains(&self, v: f64) -> bool {
        self.lo.is_none_or(|lo| v >= lo) && self.hi.is_none_or(|hi| v <= hi)
    }

    fn clamp(&self, v: f64) -> f64 {
        let v = self.lo.map_or(v, |lo| v.max(lo));
        self.hi.map_or(v, |hi| v.min(hi))
    }

    fn ends(&self) -> impl Iterator<Item = f64> {
        self.lo.into_iter().chain(self.hi)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Bounds {
        Bounds {
            lo: self.lo.map(&f),
            hi: self.hi.map(&f),
        }
    }
}

/// Unconstrained simple linear regression.
pub fn fit_linear(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    fit_linear_bounded(x, y, Bounds::FREE, Bounds::FREE)
}

/// Least squares for `y = intercept + slope * x` with box constraints.
///
/// The objective is a convex quadratic, so the constrained optimum is the
/// unconstrained one if feasible, otherwise it lies on an edge of the box
/// where the problem reduces to a clamped one-dimensional fit.
pub fn fit_linear_bounded(x: &[f64], y: &[f64], intercept: Bounds, slope: Bounds) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("{} abscissae but {} ordinates", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    if sxx <= 1e-12 * (1.0 + mx * mx) * n {
        return Err(Error::Fit("degenerate design: abscissae are constant".into()));
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    if intercept.contains(a) && slope.contains(b) {
        return Ok(LinearFit::evaluate(x, y, a, b));
    }

    let sx: f64 = x.iter().sum();
    let sxx_raw: f64 = x.iter().map(|v| v * v).sum();
    let sxy_raw: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let mut candidates = Vec::new();
    for a in intercept.ends() {
        let b = slope.clamp((sxy_raw - a * sx) / sxx_raw);
        candidates.push((a, b));
    }
    for b in slope.ends() {
        let a = intercept.clamp(my - b * mx);
        candidates.push((a, b));
    }
    candidates
        .into_iter()
        .map(|(a, b)| LinearFit::evaluate(x, y, a, b))
        .min_by(|p, q| p.rss.total_cmp(&q.rss))
        .ok_or_else(|| Error::Fit("empty feasible set".into()))
}

/// Per-capita observations for demand calibration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandSeries {
    pub income: Vec<f64>,
    pub calories: Vec<f64>,
    pub meat: Vec<f64>,
}

/// CSV columns of a demand calibration series.
pub const SERIES_HEADER: [&str; 3] = ["income", "calories", "meat"];

impl DemandSeries {
    /// Read `income,calories,meat` rows.
    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::config(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != SERIES_HEADER {
            return Err(Error::config(format!("calibration header must be `{}`", SERIES_HEADER.join(","))));
        }
        let mut out = Self::default();
        for row in rdr.deserialize::<(f64, f64, f64)>() {
            let (i, c, m) = row.map_err(|e| Error::config(e.to_string()))?;
            out.income.push(i);
            out.calories.push(c);
            out.meat.push(m);
        }
        Ok(out)
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            Error::Config(msg) => Error::parse(path, msg),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DemandBounds {
    pub a: Bounds,
    pub b: Bounds,
    pub c: Bounds,
    pub d: Bounds,
}

/// Fitted Engel and meat coefficients. Calorie residuals are in calorie
/// units; meat residuals are on the log scale where the fit is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub calories: LinearFit,
    pub log_meat: LinearFit,
}

impl DemandFit {
    pub fn rss(&self) -> f64 {
        self.calories.rss + self.log_meat.rss
    }

    /// Copy the fitted coefficients into a parameter set.
    pub fn apply(&self, params: &mut DemandParams) {
        params.a = self.a;
        params.b = self.b;
        params.c = self.c;
        params.d = self.d;
    }
}

/// Fit `calories = a + b ln I` and `ln meat = ln c + d ln I`.
pub fn fit_demand_params(series: &DemandSeries, bounds: &DemandBounds) -> Result<DemandFit> {
    let DemandSeries { income, calories, meat } = series;
    if income.len() != calories.len() || income.len() != meat.len() {
        return Err(Error::Fit("income, calorie and meat series differ in length".into()));
    }
    if let Some(bad) = income.iter().find(|i| !(**i > 0.0)) {
        return Err(Error::Fit(format!("income must be positive, got {bad}")));
    }
    if let Some(bad) = meat.iter().find(|m| !(**m > 0.0)) {
        return Err(Error::Fit(format!("meat consumption must be positive, got {bad}")));
    }
    let ln_i: Vec<f64> = income.iter().map(|v| v.ln()).collect();
    let ln_m: Vec<f64> = meat.iter().map(|v| v.ln()).collect();

    let cal = fit_linear_bounded(&ln_i, calories, bounds.a, bounds.b)?;
    if let Some(bad) = bounds.c.lo.into_iter().chain(bounds.c.hi).find(|v| !(*v > 0.0)) {
        return Err(Error::Fit(format!("bounds on c must be positive, got {bad}")));
    }
    let log_meat = fit_linear_bounded(&ln_i, &ln_m, bounds.c.map(f64::ln), bounds.d)?;
    Ok(DemandFit {
        a: cal.intercept,
        b: cal.slope,
        c: log_meat.intercept.exp(),
        d: log_meat.slope,
        calories: cal,
        log_meat,
    })
}

/// `K / (1 + exp(-r (t - t_mid)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub k: f64,
    pub r: f64,
    pub t_mid: f64,
}

impl Logistic {
    pub fn eval(&self, t: f64) -> f64 {
        self.k / (1.0 + (-self.r * (t - self.t_mid)).exp())
    }
}

/// `a * exp(g (t - t0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponential {
    pub a: f64,
    pub g: f64,
    pub t0: f64,
}

impl Exponential {
    pub fn eval(&self, t: f64) -> f64 {
        self.a * (self.g * (t - self.t0)).exp()
    }
}

/// Log-linear least squares for an exponential trend.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<Exponential> {
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("exponential fit needs positive values".into()));
    }
    let t0 = t.first().copied().unwrap_or(0.0);
    let dt: Vec<f64> = t.iter().map(|v| v - t0).collect();
    let ln_y: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = fit_linear(&dt, &ln_y)?;
    Ok(Exponential {
        a: fit.intercept.exp(),
        g: fit.slope,
        t0,
    })
}

/// Logistic trend by profile least squares: for each carrying capacity on
/// a log-spaced grid above the data maximum the logit transform is linear
/// in time; the capacity with the smallest residual in the original scale
/// wins.
pub fn fit_logistic(t: &[f64], y: &[f64]) -> Result<Logistic> {
    if t.len() < 3 {
        return Err(Error::Fit(format!("logistic fit needs at least 3 points, got {}", t.len())));
    }
    if y.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Fit("logistic fit needs positive values".into()));
    }
    let ymax = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, Logistic)> = None;
    const STEPS: usize = 400;
    for s in 0..STEPS {
        let k = ymax * (1.0005f64.ln() + (20.0f64.ln() - 1.0005f64.ln()) * s as f64 / (STEPS - 1) as f64).exp();
        let z: Vec<f64> = y.iter().map(|v| (k / v - 1.0).ln()).collect();
        let Ok(line) = fit_linear(t, &z) else { continue };
        let r = -line.slope;
        if !(r > 0.0) {
            continue;
        }
        let cand = Logistic {
            k,
            r,
            t_mid: line.intercept / r,
        };
        let rss: f64 = t.iter().zip(y).map(|(ti, yi)| (yi - cand.eval(*ti)).powi(2)).sum();
        if best.as_ref().is_none_or(|(b, _)| rss < *b) {
            best = Some((rss, cand));
        }
    }
    best.map(|(_, l)| l)
        .ok_or_else(|| Error::Fit("no increasing logistic trend fits the data".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(n: usize) -> DemandSeries {
        let income: Vec<f64> = (0..n).map(|i| 1.5 + 60.0 * i as f64 / (n - 1) as f64).collect();
        DemandSeries {
            calories: income.iter().map(|i| -138.2 + 744.4 * i.ln()).collect(),
            meat: income.iter().map(|i| 210.0 * i.powf(0.65)).collect(),
            income,
        }
    }

    #[test]
    fn noiseless_recovery() {
        let fit = fit_demand_params(&synthetic(20), &DemandBounds::default()).unwrap();
        assert!((fit.a + 138.2).abs() < 1e-9);
        assert!((fit.b - 744.4).abs() < 1e-9);
        assert!((fit.c - 210.0).abs() < 1e-9);
        assert!((fit.d - 0.65).abs() < 1e-9);
    }

    #[test]
    fn two_points_interpolate() {
        let fit = fit_linear(&[0.0, 2.0], &[1.0, 5.0]).unwrap();
        assert_eq!((fit.intercept, fit.slope), (1.0, 2.0));
        assert!(fit.rss.abs() < 1e-24);
    }

    #[test]
    fn constant_income_is_degenerate() {
        let s = DemandSeries {
            income: vec![3.0; 5],
            calories: vec![600.0; 5],
            meat: vec![200.0; 5],
        };
        assert!(matches!(fit_demand_params(&s, &DemandBounds::default()), Err(Error::Fit(_))));
    }

    #[test]
    fn bounds_are_respected() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 2.0, 4.0, 6.0];
        let fit = fit_linear_bounded(&x, &y, Bounds::FREE, Bounds::new(0.0, 1.0)).unwrap();
        assert_eq!(fit.slope, 1.0);
        // With the slope pinned at 1, the best intercept is mean(y - x).
        assert!((fit.intercept - 1.5).abs() < 1e-12);

        let fit = fit_linear_bounded(&x, &y, Bounds::new(0.5, 0.5), Bounds::new(0.0, 1.0)).unwrap();
        assert_eq!((fit.intercept, fit.slope), (0.5, 1.0));
    }

    #[test]
    fn bounded_fit_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = x.iter().map(|v| 2.0 - 1.5 * v + rng.random_range(-0.5..0.5)).collect();
            let ib = Bounds::new(-1.0, 1.0);
            let sb = Bounds::new(-1.0, 0.5);
            let fit = fit_linear_bounded(&x, &y, ib, sb).unwrap();
            let mut brute = f64::INFINITY;
            for i in 0..=200 {
                for j in 0..=150 {
                    let a = -1.0 + 2.0 * i as f64 / 200.0;
                    let b = -1.0 + 1.5 * j as f64 / 150.0;
                    let rss: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
                    brute = brute.min(rss);
                }
            }
            assert!(fit.rss <= brute + 1e-9, "{} vs {}", fit.rss, brute);
        }
    }

    #[test]
    fn logistic_and_exponential_round_trip() {
        let truth = Logistic {
            k: 11e9,
            r: 0.031,
            t_mid: 1991.0,
        };
        let t: Vec<f64> = (1960..=2022).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|v| truth.eval(*v)).collect();
        let fit = fit_logistic(&t, &y).unwrap();
        assert!((fit.eval(2100.0) - truth.eval(2100.0)).abs() / truth.eval(2100.0) < 0.01);

        let e = Exponential { a: 2.0, g: 0.02, t0: 1960.0 };
        let y: Vec<f64> = t.iter().map(|v| e.eval(*v)).collect();
        let fit = fit_exponential(&t, &y).unwrap();
        assert!((fit.g - 0.02).abs() < 1e-9);
    }
}
