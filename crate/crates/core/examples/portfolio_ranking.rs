//! Every combination of a policy pool, ranked by forest gain and by
//! degraded-land reduction.
//!
//! `cargo run --release --example portfolio_ranking -- [runs]`

use foodland::demand::Drivers;
use foodland::numfmt::fmt_opt;
use foodland::scenario::{enumerate_and_rank, parse_policy_list, Experiment};
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let runs: usize = std::env::args().nth(1).map_or(10, |s| s.parse().expect("runs must be an integer"));
    let exp = Experiment::new(ModelParams::default(), Drivers::builtin(), runs, 42);
    let pool = parse_policy_list(
        "meat_demand_reduction,crop_demand_reduction,deforestation_restriction_crop,deforestation_restriction_meat,livestock_density_reduction",
    )?;
    let ranking = enumerate_and_rank(&exp, &pool, 5)?;
    println!("{} portfolios from a pool of {}", ranking.results.len(), pool.len());

    for (title, top) in [("forest gain", ranking.top_forest()), ("degraded reduction", ranking.top_degraded())] {
        println!("\ntop by {title}:");
        for (rank, &i) in top.iter().enumerate() {
            let r = &ranking.results[i];
            let both = if ranking.in_both(i) { "*" } else { " " };
            println!(
                "{both} {:>2}. {:>9}% {:>9}%  {}",
                rank + 1,
                fmt_opt(r.delta_forest_pct),
                fmt_opt(r.delta_degraded_pct),
                r.portfolio
            );
        }
    }
    println!("\n* appears in both lists");
    Ok(())
}
