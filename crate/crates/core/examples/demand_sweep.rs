//! How much demand reduction a supply-side policy needs before both forest
//! and degraded land improve.
//!
//! `cargo run --release --example demand_sweep -- [runs]`

use foodland::demand::Drivers;
use foodland::numfmt::fmt_opt;
use foodland::scenario::{demand_sweep, parse_grid, Experiment, PolicyKind, PolicySpec, Portfolio};
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let runs: usize = std::env::args().nth(1).map_or(20, |s| s.parse().expect("runs must be an integer"));
    let exp = Experiment::new(ModelParams::default(), Drivers::builtin(), runs, 42);
    let base = Portfolio::single(PolicySpec::default_for(PolicyKind::OrganicCropExpansion))?;
    let sweep = demand_sweep(&exp, &base, &parse_grid("0:0.5:0.05")?)?;

    println!("base portfolio: {base}");
    println!("{:>5} {:>12} {:>12}", "rho", "forest %", "degraded %");
    for p in &sweep.points {
        let r = &p.result;
        println!("{:>5.2} {:>12} {:>12}", p.rho, fmt_opt(r.delta_forest_pct), fmt_opt(r.delta_degraded_pct));
    }
    println!("first grid point improving both: {}", fmt_opt(sweep.rho_star));
    println!("interpolated crossing: {}", fmt_opt(sweep.rho_star_interpolated));
    Ok(())
}
