//! Recover demand coefficients from a noisy synthetic income series.
//!
//! `cargo run --release --example calibrate_demand`

use foodland::calibration::{fit_demand_params, DemandBounds, DemandSeries};
use foodland::params::DemandParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> foodland::Result<()> {
    let truth = DemandParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.01).unwrap();

    let income: Vec<f64> = (0..200).map(|i| 2.0 + 58.0 * i as f64 / 199.0).collect();
    let calories = income
        .iter()
        .map(|i| (truth.a + truth.b * i.ln()) * (1.0 + noise.sample(&mut rng)))
        .collect();
    let meat = income.iter().map(|i| truth.c * i.powf(truth.d) * (1.0 + noise.sample(&mut rng))).collect();
    let series = DemandSeries { income, calories, meat };

    let fit = fit_demand_params(&series, &DemandBounds::default())?;
    println!("{:<3} {:>10} {:>10} {:>8}", "", "true", "fitted", "error %");
    for (name, t, f) in [("a", truth.a, fit.a), ("b", truth.b, fit.b), ("c", truth.c, fit.c), ("d", truth.d, fit.d)] {
        println!("{name:<3} {t:>10.4} {f:>10.4} {:>8.3}", 100.0 * (f / t - 1.0).abs());
    }
    println!("residual sum of squares: {:.4e}", fit.rss());
    Ok(())
}
