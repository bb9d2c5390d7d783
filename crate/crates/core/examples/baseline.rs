//! Business-as-usual trajectory: one seeded run, then an ensemble mean.
//!
//! `cargo run --release --example baseline -- [runs]`

use foodland::demand::Drivers;
use foodland::engine::{self, run_ensemble};
use foodland::numfmt::fmt_opt;
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let runs: usize = std::env::args().nth(1).map_or(20, |s| s.parse().expect("runs must be an integer"));
    let params = ModelParams::default();
    let drivers = Drivers::builtin();

    let record = engine::run(&params, &drivers, 1)?;
    println!("{:>5} {:>8} {:>8} {:>8} {:>8} {:>7} {:>7}", "year", "forest", "degraded", "crop", "pasture", "D_c", "D_m");
    for row in record.rows.iter().filter(|r| r.year % 10 == 0) {
        let m = &row.metrics;
        println!(
            "{:>5} {:>8} {:>8} {:>8} {:>8} {:>7.0} {:>7.0}",
            row.year,
            m.area_forest,
            m.area_degraded,
            m.area_crop,
            m.area_pasture,
            row.demand_crop(),
            row.demand_meat
        );
    }

    let ens = run_ensemble(&params, &drivers, runs, 42)?;
    let end = ens.end_year();
    println!("\nensemble of {runs} runs, {end}:");
    for name in ["area_forest", "area_degraded", "area_crop", "area_pasture", "mean_eps_natural"] {
        println!("  {name:<18} {} ± {}", fmt_opt(ens.mean(end, name)), fmt_opt(ens.stderr(end, name)));
    }
    Ok(())
}
