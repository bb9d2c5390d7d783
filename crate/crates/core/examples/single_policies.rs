//! Each policy on its own at the default magnitude, against the baseline.
//!
//! `cargo run --release --example single_policies -- [runs]`

use foodland::demand::Drivers;
use foodland::numfmt::fmt_opt;
use foodland::scenario::{Experiment, PolicyKind, PolicySpec, Portfolio};
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let runs: usize = std::env::args().nth(1).map_or(20, |s| s.parse().expect("runs must be an integer"));
    let exp = Experiment::new(ModelParams::default(), Drivers::builtin(), runs, 42);
    let portfolios = PolicyKind::ALL
        .iter()
        .map(|&k| Ok((k.as_str().to_string(), Portfolio::single(PolicySpec::default_for(k))?)))
        .collect::<foodland::Result<Vec<_>>>()?;
    let mut ban = Portfolio::single(PolicySpec::new(PolicyKind::DeforestationRestrictionCrop, 1.0)?)?;
    ban = ban.with(PolicySpec::new(PolicyKind::DeforestationRestrictionMeat, 1.0)?)?;
    let mut all = portfolios;
    all.push(("full_deforestation_ban".into(), ban));

    let eval = exp.evaluate(&all)?;
    println!("{:<32} {:>12} {:>12}", "policy", "forest %", "degraded %");
    for r in &eval.scenarios {
        let mark = if r.improves_both() { "  both" } else { "" };
        println!("{:<32} {:>12} {:>12}{mark}", r.id, fmt_opt(r.delta_forest_pct), fmt_opt(r.delta_degraded_pct));
    }
    Ok(())
}
