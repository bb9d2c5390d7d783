use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use foodland::calibration::{fit_demand_params, DemandBounds, DemandSeries};
use foodland::config::{load_config, RunConfig};
use foodland::engine::{derive_seeds, run_ensemble_with};
use foodland::numfmt::{fmt_opt, fmt_sig};
use foodland::output::{emit_fit, emit_results, export_snapshots, validate, Results, RunsWriter};
use foodland::scenario::{self, demand_sweep, enumerate_and_rank, load_scenarios, Experiment, Portfolio};
use foodland::{Error, Result};

#[derive(Parser)]
#[command(name = "foodland", version, about = "Food-land system simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Driver CSV, or `builtin`.
    #[arg(long, global = true)]
    drivers: Option<String>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Baseline ensemble.
    Run,
    /// Portfolios from a scenario file against the baseline.
    Scenario {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Demand-reduction sweep on top of a base portfolio.
    Sweep {
        /// `start:stop:step`.
        #[arg(long)]
        sweep_grid: Option<String>,
        /// Base policies, `kind[:magnitude]` separated by commas.
        #[arg(long)]
        base: Option<String>,
    },
    /// Rank every subset of a policy pool.
    Portfolio {
        /// `kind[:magnitude]` separated by commas.
        #[arg(long)]
        pool: Option<String>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Fit demand coefficients to an `income,calories,meat` CSV.
    Fit { series: PathBuf },
    /// Check CSV files written or read by this tool.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Landscape snapshots of the first ensemble run.
    Snapshot {
        /// Comma-separated years.
        #[arg(long, value_delimiter = ',')]
        years: Vec<i32>,
    },
}

fn effective_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &common.drivers {
        cfg.drivers = d.clone();
    }
    if let Some(n) = common.runs {
        cfg.runs = n;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn experiment(cfg: &RunConfig) -> Result<Experiment> {
    Ok(Experiment::new(cfg.params.clone(), cfg.load_drivers()?, cfg.runs, cfg.seed))
}

fn run_baseline(cfg: &RunConfig) -> Result<()> {
    let drivers = cfg.load_drivers()?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| Error::Io { path: cfg.out.clone(), source: e })?;
    let mut runs = if cfg.export.per_run_records {
        Some(RunsWriter::create(&cfg.out.join("runs.csv"))?)
    } else {
        None
    };
    let ens = run_ensemble_with(&cfg.params, &drivers, cfg.runs, cfg.seed, |r| runs.as_mut().map_or(Ok(()), |w| w.write(r)))?;
    let mut files = emit_results(&cfg.out, &Results { baseline: Some(&ens), ..Default::default() })?;
    if let Some(w) = runs {
        files.push(w.finish()?);
    }
    if !cfg.export.snapshot_years.is_empty() {
        let seed = derive_seeds(cfg.seed, 1)[0];
        files.extend(export_snapshots(&cfg.out, &cfg.params, &drivers, seed, &cfg.export.snapshot_years)?);
    }
    let end = ens.end_year();
    println!(
        "baseline {} runs: forest {} -> {}, degraded {}",
        cfg.runs,
        fmt_opt(ens.mean(ens.start_year, "area_forest")),
        fmt_opt(ens.mean(end, "area_forest")),
        fmt_opt(ens.mean(end, "area_degraded"))
    );
    report(&files);
    Ok(())
}

fn print_result(r: &scenario::ScenarioResult) {
    println!("{:<12} forest {:>10}%  degraded {:>10}%  {}", r.id, fmt_opt(r.delta_forest_pct), fmt_opt(r.delta_degraded_pct), r.portfolio);
}

fn run_scenarios(cfg: &RunConfig, path: Option<&Path>) -> Result<()> {
    let path = path.or(cfg.scenario.as_deref()).ok_or_else(|| Error::config("no scenario file given (--scenario or `scenario` in the config)"))?;
    let file = load_scenarios(path)?;
    let eval = experiment(cfg)?.evaluate(&file.portfolios)?;
    eval.scenarios.iter().for_each(print_result);
    let res = Results {
        baseline: Some(&eval.baseline),
        scenarios: &eval.scenarios,
        scenario_timeseries: cfg.export.scenario_timeseries,
        ..Default::default()
    };
    report(&emit_results(&cfg.out, &res)?);
    Ok(())
}

fn run_sweep(cfg: &RunConfig, grid: Option<&str>, base: Option<&str>) -> Result<()> {
    let grid = grid.map_or_else(|| Ok(cfg.sweep.grid.clone()), scenario::parse_grid)?;
    let base = match base {
        Some(b) => Portfolio::new(scenario::parse_policy_list(b)?)?,
        None => Portfolio::new(cfg.sweep.base.iter().copied())?,
    };
    let sweep = demand_sweep(&experiment(cfg)?, &base, &grid)?;
    for p in &sweep.points {
        print_result(&p.result);
    }
    println!("rho* = {} (interpolated {})", fmt_opt(sweep.rho_star), fmt_opt(sweep.rho_star_interpolated));
    let res = Results {
        baseline: Some(&sweep.baseline),
        sweep: Some(&sweep),
        scenario_timeseries: cfg.export.scenario_timeseries,
        ..Default::default()
    };
    report(&emit_results(&cfg.out, &res)?);
    Ok(())
}

fn run_portfolio(cfg: &RunConfig, pool: Option<&str>, top: Option<usize>) -> Result<()> {
    let pool = pool.map_or_else(|| Ok(cfg.portfolio.pool.clone()), scenario::parse_policy_list)?;
    let ranking = enumerate_and_rank(&experiment(cfg)?, &pool, top.unwrap_or(cfg.portfolio.top))?;
    for (name, top) in [("forest", ranking.top_forest()), ("degraded", ranking.top_degraded())] {
        println!("top by {name}:");
        for &i in top {
            let mark = if ranking.in_both(i) { "*" } else { " " };
            print!("{mark} ");
            print_result(&ranking.results[i]);
        }
    }
    let res = Results {
        baseline: Some(&ranking.baseline),
        ranking: Some(&ranking),
        scenario_timeseries: cfg.export.scenario_timeseries,
        ..Default::default()
    };
    report(&emit_results(&cfg.out, &res)?);
    Ok(())
}

fn run_fit(cfg: &RunConfig, series: &Path) -> Result<()> {
    let data = DemandSeries::read_csv(series)?;
    let fit = fit_demand_params(&data, &DemandBounds::default())?;
    println!("a = {}  b = {}  c = {}  d = {}  rss = {}", fmt_sig(fit.a), fmt_sig(fit.b), fmt_sig(fit.c), fmt_sig(fit.d), fmt_sig(fit.rss()));
    report(&emit_fit(&cfg.out, &data, &fit)?);
    Ok(())
}

fn run_validate(files: &[PathBuf]) -> Result<()> {
    for f in files {
        let v = validate(f)?;
        println!("{}: {:?}, {} rows", f.display(), v.kind, v.rows);
    }
    Ok(())
}

fn run_snapshot(cfg: &RunConfig, years: &[i32]) -> Result<()> {
    let years = if years.is_empty() { &cfg.export.snapshot_years[..] } else { years };
    if years.is_empty() {
        return Err(Error::config("no snapshot years given (--years or export.snapshot_years)"));
    }
    let seed = derive_seeds(cfg.seed, 1)[0];
    report(&export_snapshots(&cfg.out, &cfg.params, &cfg.load_drivers()?, seed, years)?);
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    if let Command::Validate { files } = &cli.command {
        return run_validate(files);
    }
    let cfg = effective_config(&cli.common)?;
    match &cli.command {
        Command::Run => run_baseline(&cfg),
        Command::Scenario { scenario } => run_scenarios(&cfg, scenario.as_deref()),
        Command::Sweep { sweep_grid, base } => run_sweep(&cfg, sweep_grid.as_deref(), base.as_deref()),
        Command::Portfolio { pool, top } => run_portfolio(&cfg, pool.as_deref(), *top),
        Command::Fit { series } => run_fit(&cfg, series),
        Command::Snapshot { years } => run_snapshot(&cfg, years),
        Command::Validate { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
