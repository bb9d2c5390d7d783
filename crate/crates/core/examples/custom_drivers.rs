//! Run under a slower-growth driver trajectory loaded from CSV.
//!
//! `cargo run --release --example custom_drivers`

use foodland::demand::{BuiltinCurves, Drivers};
use foodland::engine::run_ensemble;
use foodland::numfmt::fmt_opt;
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let slow = BuiltinCurves { population_capacity: 9.0e9, income_growth: 0.015, ..Default::default() }.build();
    let path = std::env::temp_dir().join("foodland-slow-drivers.csv");
    let file = std::fs::File::create(&path).map_err(|e| foodland::Error::Io { path: path.clone(), source: e })?;
    slow.write_csv(file).map_err(|e| foodland::Error::Io { path: path.clone(), source: e.into() })?;
    let loaded = Drivers::read_csv(&path)?;
    println!("drivers: {} ({} years)", path.display(), loaded.points().len());

    let params = ModelParams::default();
    for (name, drivers) in [("default", Drivers::builtin()), ("slow growth", loaded)] {
        let ens = run_ensemble(&params, &drivers, 10, 42)?;
        let end = ens.end_year();
        println!(
            "{name:<12} forest {:>8}  degraded {:>8}  crop {:>8}  pasture {:>8}",
            fmt_opt(ens.mean(end, "area_forest")),
            fmt_opt(ens.mean(end, "area_degraded")),
            fmt_opt(ens.mean(end, "area_crop")),
            fmt_opt(ens.mean(end, "area_pasture"))
        );
    }
    Ok(())
}
