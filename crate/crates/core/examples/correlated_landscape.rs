//! Initial landscapes at several correlation lengths.
//!
//! `cargo run --release --example correlated_landscape`

use foodland::landscape::{LandUse, Landscape};
use foodland::params::LandscapeParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn glyph(lu: LandUse) -> char {
    match lu {
        LandUse::Natural => '#',
        LandUse::Crop => '.',
        LandUse::Pasture => ',',
    }
}

/// Share of the four neighbours of natural cells that are natural too.
fn natural_adjacency(l: &Landscape) -> f64 {
    let (w, h) = (l.width(), l.height());
    let (mut same, mut total) = (0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if l.cell(y * w + x).land_use != LandUse::Natural {
                continue;
            }
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                total += 1;
                same += usize::from(l.cell(ny as usize * w + nx as usize).land_use == LandUse::Natural);
            }
        }
    }
    same as f64 / total as f64
}

fn main() -> foodland::Result<()> {
    for xi in [1.0, 5.0, 10.0, 25.0] {
        let params = LandscapeParams { width: 60, height: 24, xi, ..Default::default() };
        let l = Landscape::generate(&params, &mut ChaCha8Rng::seed_from_u64(3))?;
        println!(
            "xi = {xi}: natural {}, crop {}, pasture {}, natural-natural adjacency {:.3}",
            l.area(LandUse::Natural),
            l.area(LandUse::Crop),
            l.area(LandUse::Pasture),
            natural_adjacency(&l)
        );
        for y in 0..l.height() {
            let line: String = (0..l.width()).map(|x| glyph(l.cell(y * l.width() + x).land_use)).collect();
            println!("  {line}");
        }
        println!();
    }
    Ok(())
}
