//! Exogenous driver series: population, per-capita income and organic
//! land shares on a common year axis.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibration::{fit_exponential, fit_logistic, Exponential, Logistic};
use crate::error::{Error, Result};
use crate::numfmt::fmt_sig;

/// Driver values for one year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverPoint {
    pub year: i32,
    pub population: f64,
    /// Thousands of constant dollars per capita per year.
    pub income_per_capita: f64,
    pub organic_share_crop: f64,
    pub organic_share_pasture: f64,
}

/// Policy adjustments to the exogenous trajectories, effective strictly
/// after `anchor_year`. Each field is a magnitude in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverAdjustments {
    pub anchor_year: i32,
    /// Fraction of the post-anchor increase in crop-food demand removed.
    pub crop_demand_reduction: f64,
    /// Fraction of the post-anchor increase in meat demand removed.
    pub meat_demand_reduction: f64,
    /// Post-anchor growth of the organic cropland share scaled by `1 + m`.
    pub organic_crop_expansion: f64,
    /// Post-anchor growth of the organic pasture share scaled by `1 + m`.
    pub organic_meat_expansion: f64,
}

impl Default for DriverAdjustments {
    fn default() -> Self {
        Self {
            anchor_year: 2022,
            crop_demand_reduction: 0.0,
            meat_demand_reduction: 0.0,
            organic_crop_expansion: 0.0,
            organic_meat_expansion: 0.0,
        }
    }
}

impl DriverAdjustments {
    pub fn is_empty(&self) -> bool {
        self.crop_demand_reduction == 0.0
            && self.meat_demand_reduction == 0.0
            && self.organic_crop_expansion == 0.0
            && self.organic_meat_expansion == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trend {
    Logistic(Logistic),
    Exponential(Exponential),
    Linear { slope: f64 },
    Flat,
}

/// Trend used past the last data year, anchored so the series stays
/// continuous: multiplicative forms are rescaled to pass through the last
/// observation, the linear form starts from it.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tail {
    trend: Trend,
    last_year: f64,
    last: f64,
}

impl Tail {
    fn eval(&self, year: f64) -> f64 {
        match self.trend {
            Trend::Logistic(l) => self.last * l.eval(year) / l.eval(self.last_year),
            Trend::Exponential(e) => self.last * e.eval(year) / e.eval(self.last_year),
            Trend::Linear { slope } => (self.last + slope * (year - self.last_year)).clamp(self.last, 1.0),
            Trend::Flat => self.last,
        }
    }
}

/// Parameters of the smooth built-in trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuiltinCurves {
    pub start_year: i32,
    pub end_year: i32,
    /// Logistic population: capacity, rate, midpoint year.
    pub population_capacity: f64,
    pub population_rate: f64,
    pub population_midpoint: f64,
    /// Exponential income anchored at the start year.
    pub income_start: f64,
    pub income_growth: f64,
    /// Organic share: zero until `organic_onset`, linear to
    /// `organic_share_ref` at `organic_ref_year`, then logistic towards
    /// `organic_ceiling` at rate `organic_rate`.
    pub organic_onset: i32,
    pub organic_ref_year: i32,
    pub organic_share_ref: f64,
    pub organic_ceiling: f64,
    pub organic_rate: f64,
    /// Pasture share as a multiple of the crop share.
    pub organic_pasture_ratio: f64,
}

impl Default for BuiltinCurves {
    fn default() -> Self {
        Self {
            start_year: 1960,
            end_year: 2100,
            population_capacity: 11.0e9,
            population_rate: 0.03105,
            population_midpoint: 1991.1,
            income_start: 3.5,
            income_growth: 0.01988,
            organic_onset: 1985,
            organic_ref_year: 2022,
            organic_share_ref: 0.015,
            organic_ceiling: 0.40,
            organic_rate: 0.06,
            organic_pasture_ratio: 1.0,
        }
    }
}

impl BuiltinCurves {
    pub fn point(&self, year: i32) -> DriverPoint {
        let t = f64::from(year);
        let population = self.population_capacity / (1.0 + (-self.population_rate * (t - self.population_midpoint)).exp());
        let income = self.income_start * (self.income_growth * (t - f64::from(self.start_year))).exp();
        let share = self.organic_share(t);
        DriverPoint {
            year,
            population,
            income_per_capita: income,
            organic_share_crop: share,
            organic_share_pasture: (share * self.organic_pasture_ratio).min(1.0),
        }
    }

    fn organic_share(&self, t: f64) -> f64 {
        let onset = f64::from(self.organic_onset);
        let reference = f64::from(self.organic_ref_year);
        if t <= onset {
            0.0
        } else if t <= reference {
            self.organic_share_ref * (t - onset) / (reference - onset)
        } else {
            let s0 = self.organic_share_ref;
            let k = self.organic_ceiling;
            k / (1.0 + (k / s0 - 1.0) * (-self.organic_rate * (t - reference)).exp())
        }
    }

    pub fn build(&self) -> Drivers {
        let points = (self.start_year..=self.end_year).map(|y| self.point(y)).collect();
        Drivers::from_points(points).expect("built-in curves are valid")
    }
}

/// Driver series on a strictly increasing year axis. Values between data
/// years are linearly interpolated; past the last year each series follows
/// a fitted trend (logistic population, exponential income, linear organic
/// shares held between the last value and 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Drivers {
    points: Vec<DriverPoint>,
    tails: [Tail; 4],
    pub adjustments: DriverAdjustments,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    year: i32,
    population: f64,
    income_per_capita: f64,
    organic_share_crop: f64,
    organic_share_pasture: f64,
}

const HEADER: [&str; 5] = ["year", "population", "income_per_capita", "organic_share_crop", "organic_share_pasture"];

/// Observations used for trend fitting: at most this many trailing years.
const TAIL_WINDOW: usize = 30;

impl Drivers {
    /// The built-in smooth trajectories for 1960–2100.
    pub fn builtin() -> Self {
        BuiltinCurves::default().build()
    }

    pub fn from_points(points: Vec<DriverPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("driver series is empty"));
        }
        for w in points.windows(2) {
            if w[1].year <= w[0].year {
                return Err(Error::config(format!("driver years must be strictly increasing ({} then {})", w[0].year, w[1].year)));
            }
            if w[1].organic_share_crop < w[0].organic_share_crop || w[1].organic_share_pasture < w[0].organic_share_pasture {
                return Err(Error::config(format!("organic shares decrease between {} and {}", w[0].year, w[1].year)));
            }
        }
        for p in &points {
            if !(p.population > 0.0 && p.population.is_finite()) {
                return Err(Error::config(format!("population in {} must be positive", p.year)));
            }
            if !(p.income_per_capita > 0.0 && p.income_per_capita.is_finite()) {
                return Err(Error::config(format!("income in {} must be positive", p.year)));
            }
            for s in [p.organic_share_crop, p.organic_share_pasture] {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::config(format!("organic share {s} in {} outside [0, 1]", p.year)));
                }
            }
        }
        let tails = Self::fit_tails(&points);
        Ok(Self {
            points,
            tails,
            adjustments: DriverAdjustments::default(),
        })
    }

    fn fit_tails(points: &[DriverPoint]) -> [Tail; 4] {
        let window = &points[points.len().saturating_sub(TAIL_WINDOW)..];
        let t: Vec<f64> = window.iter().map(|p| f64::from(p.year)).collect();
        let last = points.last().unwrap();
        let last_year = f64::from(last.year);
        let series = |f: fn(&DriverPoint) -> f64| -> Vec<f64> { window.iter().map(f).collect() };

        let pop = series(|p| p.population);
        let pop_trend = fit_logistic(&t, &pop)
            .map(Trend::Logistic)
            .or_else(|_| fit_exponential(&t, &pop).map(Trend::Exponential))
            .unwrap_or(Trend::Flat);
        let inc = series(|p| p.income_per_capita);
        let inc_trend = fit_exponential(&t, &inc).map(Trend::Exponential).unwrap_or(Trend::Flat);

        let linear = |s: Vec<f64>| {
            crate::calibration::fit_linear(&t, &s)
                .map(|f| Trend::Linear { slope: f.slope.max(0.0) })
                .unwrap_or(Trend::Flat)
        };
        let crop = linear(series(|p| p.organic_share_crop));
        let pasture = linear(series(|p| p.organic_share_pasture));
        [
            Tail {
                trend: pop_trend,
                last_year,
                last: last.population,
            },
            Tail {
                trend: inc_trend,
                last_year,
                last: last.income_per_capita,
            },
            Tail {
                trend: crop,
                last_year,
                last: last.organic_share_crop,
            },
            Tail {
                trend: pasture,
                last_year,
                last: last.organic_share_pasture,
            },
        ]
    }

    pub fn first_year(&self) -> i32 {
        self.points[0].year
    }

    pub fn last_data_year(&self) -> i32 {
        self.points.last().unwrap().year
    }

    pub fn points(&self) -> &[DriverPoint] {
        &self.points
    }

    /// Unadjusted driver values in `year`.
    pub fn raw_at(&self, year: i32) -> Result<DriverPoint> {
        if year < self.first_year() {
            return Err(Error::DriverDomain(format!(
                "year {year} precedes the first driver year {}",
                self.first_year()
            )));
        }
        if year > self.last_data_year() {
            let t = f64::from(year);
            return Ok(DriverPoint {
                year,
                population: self.tails[0].eval(t),
                income_per_capita: self.tails[1].eval(t),
                organic_share_crop: self.tails[2].eval(t),
                organic_share_pasture: self.tails[3].eval(t),
            });
        }
        let k = self.points.partition_point(|p| p.year < year);
        let hi = self.points[k];
        if hi.year == year {
            return Ok(hi);
        }
        let lo = self.points[k - 1];
        let w = f64::from(year - lo.year) / f64::from(hi.year - lo.year);
        let lerp = |a: f64, b: f64| a + w * (b - a);
        Ok(DriverPoint {
            year,
            population: lerp(lo.population, hi.population),
            income_per_capita: lerp(lo.income_per_capita, hi.income_per_capita),
            organic_share_crop: lerp(lo.organic_share_crop, hi.organic_share_crop),
            organic_share_pasture: lerp(lo.organic_share_pasture, hi.organic_share_pasture),
        })
    }

    /// Driver values in `year` with organic-expansion adjustments applied.
    /// Demand reductions act on demand, not on the drivers; see
    /// [`crate::demand::exogenous_demand`].
    pub fn at(&self, year: i32) -> Result<DriverPoint> {
        let mut p = self.raw_at(year)?;
        let adj = &self.adjustments;
        if year > adj.anchor_year && (adj.organic_crop_expansion > 0.0 || adj.organic_meat_expansion > 0.0) {
            let base = self.raw_at(adj.anchor_year)?;
            let grow = |s: f64, s0: f64, m: f64| (s0 + (1.0 + m) * (s - s0)).clamp(0.0, 1.0);
            p.organic_share_crop = grow(p.organic_share_crop, base.organic_share_crop, adj.organic_crop_expansion);
            p.organic_share_pasture = grow(p.organic_share_pasture, base.organic_share_pasture, adj.organic_meat_expansion);
        }
        Ok(p)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file).map_err(|e| match e {
            Error::Config(msg) => Error::parse(path, msg),
            other => other,
        })
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::config(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::config(format!(
                "driver header must be `{}`, found `{}`",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::config(e.to_string()))?;
            points.push(DriverPoint {
                year: row.year,
                population: row.population,
                income_per_capita: row.income_per_capita,
                organic_share_crop: row.organic_share_crop,
                organic_share_pasture: row.organic_share_pasture,
            });
        }
        Self::from_points(points)
    }

    /// Write the data points (not the extrapolated tail).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(HEADER)?;
        for p in &self.points {
            w.write_record([
                p.year.to_string(),
                fmt_sig(p.population),
                fmt_sig(p.income_per_capita),
                fmt_sig(p.organic_share_crop),
                fmt_sig(p.organic_share_pasture),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_anchor_values() {
        let d = Drivers::builtin();
        let p60 = d.at(1960).unwrap();
        let p22 = d.at(2022).unwrap();
        let p100 = d.at(2100).unwrap();
        assert!((p60.population / 3.03e9 - 1.0).abs() < 0.02);
        assert!((p22.population / 7.95e9 - 1.0).abs() < 0.02);
        assert!(p100.population > p22.population);
        assert!((p22.income_per_capita / 12.0 - 1.0).abs() < 0.01);
        assert_eq!(p60.organic_share_crop, 0.0);
        assert!((p22.organic_share_crop - 0.015).abs() < 1e-12);
        assert!(p100.organic_share_crop > p22.organic_share_crop);
    }

    #[test]
    fn interpolation_between_data_years() {
        let pts = vec![
            DriverPoint {
                year: 2000,
                population: 100.0,
                income_per_capita: 2.0,
                organic_share_crop: 0.0,
                organic_share_pasture: 0.0,
            },
            DriverPoint {
                year: 2010,
                population: 200.0,
                income_per_capita: 4.0,
                organic_share_crop: 0.1,
                organic_share_pasture: 0.2,
            },
        ];
        let d = Drivers::from_points(pts).unwrap();
        let p = d.at(2004).unwrap();
        assert!((p.population - 140.0).abs() < 1e-12);
        assert!((p.income_per_capita - 2.8).abs() < 1e-12);
        assert!((p.organic_share_pasture - 0.08).abs() < 1e-12);
        assert!(d.at(1999).is_err());
        // Two points: exponential tail through the last observation.
        let p = d.at(2020).unwrap();
        assert!((p.income_per_capita - 8.0).abs() < 1e-9);
        assert!((p.organic_share_crop - 0.2).abs() < 1e-12);
    }

    #[test]
    fn tail_is_continuous() {
        let full = Drivers::builtin();
        let cut: Vec<DriverPoint> = full.points().iter().copied().filter(|p| p.year <= 2022).collect();
        let d = Drivers::from_points(cut).unwrap();
        let a = d.at(2022).unwrap();
        let b = d.at(2023).unwrap();
        assert!((b.population / a.population - 1.0).abs() < 0.02);
        assert!((b.income_per_capita / a.income_per_capita - 1.0).abs() < 0.03);
        let far = d.at(2100).unwrap();
        assert!((far.population / full.at(2100).unwrap().population - 1.0).abs() < 0.05);
        assert!(far.organic_share_crop <= 1.0 && far.organic_share_crop >= a.organic_share_crop);
    }

    #[test]
    fn rejects_bad_series() {
        let p = DriverPoint {
            year: 2000,
            population: 1.0,
            income_per_capita: 1.0,
            organic_share_crop: 0.0,
            organic_share_pasture: 0.0,
        };
        assert!(Drivers::from_points(vec![p, p]).is_err());
        assert!(Drivers::from_points(vec![DriverPoint { population: 0.0, ..p }]).is_err());
        assert!(Drivers::from_points(vec![DriverPoint { organic_share_crop: 1.5, ..p }]).is_err());
        let q = DriverPoint { year: 2001, ..p };
        assert!(Drivers::from_points(vec![DriverPoint { organic_share_crop: 0.2, ..p }, q]).is_err());
    }

    #[test]
    fn csv_round_trip_and_header_check() {
        let d = Drivers::builtin();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = Drivers::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back.points().len(), 141);
        for (a, b) in d.points().iter().zip(back.points()) {
            assert!((a.population / b.population - 1.0).abs() < 1e-8);
        }
        let bad = "year,pop,income_per_capita,organic_share_crop,organic_share_pasture\n2000,1,1,0,0\n";
        assert!(matches!(Drivers::from_reader(bad.as_bytes()), Err(Error::Config(_))));
    }

    #[test]
    fn organic_expansion_scales_post_anchor_growth() {
        let mut d = Drivers::builtin();
        let s22 = d.at(2022).unwrap().organic_share_crop;
        let s50 = d.at(2050).unwrap().organic_share_crop;
        d.adjustments.organic_crop_expansion = 0.1;
        assert_eq!(d.at(2022).unwrap().organic_share_crop, s22);
        let adj = d.at(2050).unwrap().organic_share_crop;
        assert!((adj - (s22 + 1.1 * (s50 - s22))).abs() < 1e-12);
        assert_eq!(d.at(2050).unwrap().organic_share_pasture, Drivers::builtin().at(2050).unwrap().organic_share_pasture);
    }
}
