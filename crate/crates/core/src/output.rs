//! CSV exports and their validation.
//!
//! Every writer prints floats with [`fmt_sig`] and absent values as `NA`,
//! so identical inputs give byte-identical files. [`validate`] recognizes
//! each file by its header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::calibration::{DemandFit, DemandSeries, SERIES_HEADER};
use crate::demand::Drivers;
use crate::engine::{EnsembleResult, RunRecord, Simulation, COLUMNS};
use crate::error::{Error, Result};
use crate::landscape::{LandUse, Management};
use crate::numfmt::{fmt_opt, fmt_sig, parse_opt};
use crate::params::ModelParams;
use crate::scenario::{PolicyKind, PolicySpec, Portfolio, Ranking, ScenarioResult, SweepResult};

pub const TIMESERIES_HEADER: [&str; 4] = ["year", "variable", "mean", "stderr"];
pub const SCENARIOS_HEADER: [&str; 4] = ["portfolio_id", "policies", "delta_forest_pct", "delta_degraded_pct"];
pub const SWEEP_HEADER: [&str; 6] = ["rho", "portfolio_id", "policies", "delta_forest_pct", "delta_degraded_pct", "improves_both"];
pub const THRESHOLD_HEADER: [&str; 2] = ["rho_star", "rho_star_interpolated"];
pub const RANKING_HEADER: [&str; 7] = ["objective", "rank", "portfolio_id", "policies", "delta_forest_pct", "delta_degraded_pct", "in_both"];
pub const SNAPSHOT_HEADER: [&str; 5] = ["x", "y", "land_use", "management", "epsilon"];
pub const FIT_HEADER: [&str; 2] = ["parameter", "value"];
pub const RESIDUALS_HEADER: [&str; 4] = ["index", "income", "calorie_residual", "log_meat_residual"];
const DRIVER_HEADER: [&str; 5] = ["year", "population", "income_per_capita", "organic_share_crop", "organic_share_pasture"];
const FIT_PARAMETERS: [&str; 6] = ["a", "b", "c", "d", "rss_calories", "rss_log_meat"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path, format!("{other:?}")),
    }
}

/// Create `path` and hand a buffered writer to `fill`.
fn write_file<F>(path: &Path, fill: F) -> Result<PathBuf>
where
    F: FnOnce(BufWriter<File>) -> csv::Result<()>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    fill(BufWriter::new(file)).map_err(|e| csv_error(path, e))?;
    Ok(path.to_path_buf())
}

fn policies_field(p: &Portfolio) -> String {
    p.to_string()
}

fn parse_policies(s: &str) -> Result<Portfolio> {
    if s == "baseline" {
        return Ok(Portfolio::empty());
    }
    Portfolio::new(s.split('+').map(str::parse::<PolicySpec>).collect::<Result<Vec<_>>>()?)
}

/// Long format: one row per year and record column.
pub fn write_timeseries<W: Write>(out: W, ens: &EnsembleResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMESERIES_HEADER)?;
    for year in ens.year_range() {
        let y = year.to_string();
        for (k, name) in COLUMNS.iter().enumerate() {
            let s = ens.stats(year, k).expect("year in range");
            w.write_record([y.as_str(), name, &fmt_opt(s.mean), &fmt_opt(s.stderr)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_scenarios<W: Write>(out: W, results: &[&ScenarioResult]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCENARIOS_HEADER)?;
    for r in results {
        w.write_record([
            r.id.clone(),
            policies_field(&r.portfolio),
            fmt_opt(r.delta_forest_pct),
            fmt_opt(r.delta_degraded_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Composition matrix: one 0/1 column per policy kind.
pub fn write_legend<W: Write>(out: W, results: &[&ScenarioResult]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once("portfolio_id").chain(PolicyKind::ALL.iter().map(|k| k.as_str())))?;
    for r in results {
        let flags = PolicyKind::ALL.iter().map(|k| if r.portfolio.contains(*k) { "1" } else { "0" });
        w.write_record(std::iter::once(r.id.as_str()).chain(flags))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep<W: Write>(out: W, sweep: &SweepResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for p in &sweep.points {
        let r = &p.result;
        w.write_record([
            fmt_sig(p.rho),
            r.id.clone(),
            policies_field(&r.portfolio),
            fmt_opt(r.delta_forest_pct),
            fmt_opt(r.delta_degraded_pct),
            u8::from(r.improves_both()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_threshold<W: Write>(out: W, sweep: &SweepResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(THRESHOLD_HEADER)?;
    w.write_record([fmt_opt(sweep.rho_star), fmt_opt(sweep.rho_star_interpolated)])?;
    w.flush()?;
    Ok(())
}

/// Top-k rows for each objective.
pub fn write_ranking<W: Write>(out: W, ranking: &Ranking) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RANKING_HEADER)?;
    for (objective, top) in [("forest", ranking.top_forest()), ("degraded", ranking.top_degraded())] {
        for (rank, &i) in top.iter().enumerate() {
            let r = &ranking.results[i];
            w.write_record([
                objective.to_string(),
                (rank + 1).to_string(),
                r.id.clone(),
                policies_field(&r.portfolio),
                fmt_opt(r.delta_forest_pct),
                fmt_opt(r.delta_degraded_pct),
                u8::from(ranking.in_both(i)).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_fit<W: Write>(out: W, fit: &DemandFit) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIT_HEADER)?;
    let values = [fit.a, fit.b, fit.c, fit.d, fit.calories.rss, fit.log_meat.rss];
    for (name, v) in FIT_PARAMETERS.iter().zip(values) {
        w.write_record([name.to_string(), fmt_sig(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_residuals<W: Write>(out: W, series: &DemandSeries, fit: &DemandFit) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESIDUALS_HEADER)?;
    for (i, income) in series.income.iter().enumerate() {
        w.write_record([
            i.to_string(),
            fmt_sig(*income),
            fmt_sig(fit.calories.residuals[i]),
            fmt_sig(fit.log_meat.residuals[i]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Streams run records to `runs.csv`: `seed, year` and every record column.
pub struct RunsWriter {
    path: PathBuf,
    w: csv::Writer<BufWriter<File>>,
}

impl RunsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        w.write_record(["seed", "year"].into_iter().chain(COLUMNS)).map_err(|e| csv_error(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            w,
        })
    }

    pub fn write(&mut self, record: &RunRecord) -> Result<()> {
        let seed = record.seed.to_string();
        for row in &record.rows {
            let fields = [seed.clone(), row.year.to_string()].into_iter().chain(row.values().into_iter().map(fmt_opt));
            self.w.write_record(fields).map_err(|e| csv_error(&self.path, e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.w.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Results to export in one call of [`emit_results`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Results<'a> {
    pub baseline: Option<&'a EnsembleResult>,
    pub scenarios: &'a [ScenarioResult],
    pub sweep: Option<&'a SweepResult>,
    pub ranking: Option<&'a Ranking>,
    /// Also write `timeseries_<id>.csv` for every scenario.
    pub scenario_timeseries: bool,
}

/// Write every result file into `dir`, creating it if needed. Scenario
/// files are only written when some scenario was evaluated.
pub fn emit_results(dir: &Path, results: &Results<'_>) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if let Some(b) = results.baseline {
        written.push(write_file(&dir.join("timeseries.csv"), |w| write_timeseries(w, b))?);
    }
    let mut all: Vec<&ScenarioResult> = results.scenarios.iter().collect();
    if let Some(s) = results.sweep {
        all.extend(s.points.iter().map(|p| &p.result));
    }
    if let Some(r) = results.ranking {
        all.extend(&r.results);
    }
    if !all.is_empty() {
        written.push(write_file(&dir.join("scenarios.csv"), |w| write_scenarios(w, &all))?);
        written.push(write_file(&dir.join("portfolio_legend.csv"), |w| write_legend(w, &all))?);
    }
    if let Some(s) = results.sweep {
        written.push(write_file(&dir.join("sweep.csv"), |w| write_sweep(w, s))?);
        written.push(write_file(&dir.join("sweep_threshold.csv"), |w| write_threshold(w, s))?);
    }
    if let Some(r) = results.ranking {
        written.push(write_file(&dir.join("ranking.csv"), |w| write_ranking(w, r))?);
    }
    if results.scenario_timeseries {
        for r in &all {
            let path = dir.join(format!("timeseries_{}.csv", r.id));
            written.push(write_file(&path, |w| write_timeseries(w, &r.ensemble))?);
        }
    }
    Ok(written)
}

pub fn emit_fit(dir: &Path, series: &DemandSeries, fit: &DemandFit) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(vec![
        write_file(&dir.join("fit.csv"), |w| write_fit(w, fit))?,
        write_file(&dir.join("fit_residuals.csv"), |w| write_residuals(w, series, fit))?,
    ])
}

/// Run seed `seed` and write `snapshot_<year>.csv` for each requested
/// year; the start year gives the initial landscape.
pub fn export_snapshots(dir: &Path, params: &ModelParams, drivers: &Drivers, seed: u64, years: &[i32]) -> Result<Vec<PathBuf>> {
    let t = &params.timeline;
    let mut years = years.to_vec();
    years.sort_unstable();
    years.dedup();
    if let Some(bad) = years.iter().find(|y| !(t.start_year..=t.end_year).contains(*y)) {
        return Err(Error::config(format!("snapshot year {bad} outside {}-{}", t.start_year, t.end_year)));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sim = Simulation::new(params, drivers, seed)?;
    let mut written = Vec::new();
    for year in years {
        sim.run_until(year)?;
        let path = dir.join(format!("snapshot_{year}.csv"));
        sim.state().landscape.save_snapshot(&path)?;
        written.push(path);
    }
    Ok(written)
}

/// Kinds of file [`validate`] recognizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Timeseries,
    Scenarios,
    Legend,
    Sweep,
    Threshold,
    Ranking,
    Runs,
    Snapshot,
    Drivers,
    CalibrationSeries,
    Fit,
    Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Validation {
    pub kind: FileKind,
    pub rows: usize,
}

fn header_is(header: &[&str], expected: &[&str]) -> bool {
    header == expected
}

fn detect(header: &[&str]) -> Option<FileKind> {
    let legend: Vec<&str> = std::iter::once("portfolio_id").chain(PolicyKind::ALL.iter().map(|k| k.as_str())).collect();
    let runs: Vec<&str> = ["seed", "year"].into_iter().chain(COLUMNS).collect();
    let table: [(&[&str], FileKind); 12] = [
        (&TIMESERIES_HEADER, FileKind::Timeseries),
        (&SCENARIOS_HEADER, FileKind::Scenarios),
        (&legend, FileKind::Legend),
        (&SWEEP_HEADER, FileKind::Sweep),
        (&THRESHOLD_HEADER, FileKind::Threshold),
        (&RANKING_HEADER, FileKind::Ranking),
        (&runs, FileKind::Runs),
        (&SNAPSHOT_HEADER, FileKind::Snapshot),
        (&DRIVER_HEADER, FileKind::Drivers),
        (&SERIES_HEADER, FileKind::CalibrationSeries),
        (&FIT_HEADER, FileKind::Fit),
        (&RESIDUALS_HEADER, FileKind::Residuals),
    ];
    table.iter().find(|(h, _)| header_is(header, h)).map(|(_, k)| *k)
}

fn num(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{s}` is not a number"))
}

fn opt(s: &str) -> std::result::Result<Option<f64>, String> {
    parse_opt(s).ok_or_else(|| format!("`{s}` is neither a number nor NA"))
}

fn int(s: &str) -> std::result::Result<i64, String> {
    s.parse::<i64>().map_err(|_| format!("`{s}` is not an integer"))
}

fn flag(s: &str) -> std::result::Result<(), String> {
    matches!(s, "0" | "1").then_some(()).ok_or_else(|| format!("`{s}` is not 0 or 1"))
}

fn portfolio(s: &str) -> std::result::Result<(), String> {
    parse_policies(s).map(|_| ()).map_err(|e| e.to_string())
}

fn check_row(kind: FileKind, f: &[&str]) -> std::result::Result<(), String> {
    match kind {
        FileKind::Timeseries => {
            int(f[0])?;
            if !COLUMNS.contains(&f[1]) {
                return Err(format!("unknown variable `{}`", f[1]));
            }
            opt(f[2])?;
            if opt(f[3])?.is_some_and(|se| se < 0.0) {
                return Err("negative standard error".into());
            }
        }
        FileKind::Scenarios => {
            portfolio(f[1])?;
            opt(f[2])?;
            opt(f[3])?;
        }
        FileKind::Legend => f[1..].iter().try_for_each(|v| flag(v))?,
        FileKind::Sweep => {
            let rho = num(f[0])?;
            if !(0.0..=1.0).contains(&rho) {
                return Err(format!("rho {rho} outside [0, 1]"));
            }
            portfolio(f[2])?;
            opt(f[3])?;
            opt(f[4])?;
            flag(f[5])?;
        }
        FileKind::Threshold => {
            opt(f[0])?;
            opt(f[1])?;
        }
        FileKind::Ranking => {
            if !matches!(f[0], "forest" | "degraded") {
                return Err(format!("unknown objective `{}`", f[0]));
            }
            if int(f[1])? < 1 {
                return Err("rank must be positive".into());
            }
            portfolio(f[3])?;
            opt(f[4])?;
            opt(f[5])?;
            flag(f[6])?;
        }
        FileKind::Runs => {
            f[0].parse::<u64>().map_err(|_| format!("`{}` is not a seed", f[0]))?;
            int(f[1])?;
            f[2..].iter().try_for_each(|v| opt(v).map(|_| ()))?;
        }
        FileKind::Snapshot => {
            int(f[0])?;
            int(f[1])?;
            let lu = [LandUse::Natural, LandUse::Crop, LandUse::Pasture].into_iter().find(|l| l.as_str() == f[2]);
            let Some(lu) = lu else {
                return Err(format!("unknown land use `{}`", f[2]));
            };
            let managed = [Management::Conventional, Management::Organic].iter().any(|m| m.as_str() == f[3]);
            if lu.is_agricultural() != managed {
                return Err(format!("management `{}` does not fit land use `{}`", f[3], f[2]));
            }
            if !(num(f[4])? > 0.0) {
                return Err("integrity must be positive".into());
            }
        }
        FileKind::Fit => {
            if !FIT_PARAMETERS.contains(&f[0]) {
                return Err(format!("unknown parameter `{}`", f[0]));
            }
            num(f[1])?;
        }
        FileKind::Residuals => {
            int(f[0])?;
            f[1..].iter().try_for_each(|v| num(v).map(|_| ()))?;
        }
        FileKind::Drivers | FileKind::CalibrationSeries => unreachable!("validated by their readers"),
    }
    Ok(())
}

/// Check that `path` is a well-formed file of a kind this crate reads or
/// writes.
pub fn validate(path: &Path) -> Result<Validation> {
    let bad = |msg: String| Error::parse(path, msg);
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = rdr.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let kind = detect(&header).ok_or_else(|| bad(format!("unrecognized header `{}`", header.join(","))))?;
    match kind {
        FileKind::Drivers => {
            let d = Drivers::read_csv(path)?;
            return Ok(Validation { kind, rows: d.points().len() });
        }
        FileKind::CalibrationSeries => {
            let s = DemandSeries::read_csv(path)?;
            return Ok(Validation { kind, rows: s.income.len() });
        }
        _ => {}
    }
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let fields: Vec<&str> = rec.iter().collect();
        check_row(kind, &fields).map_err(|m| bad(format!("row {}: {m}", i + 2)))?;
        rows += 1;
    }
    Ok(Validation { kind, rows })
}
