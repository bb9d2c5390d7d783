//! Write per-cell landscape snapshots and summarise them.
//!
//! `cargo run --release --example snapshot_export -- [out_dir]`

use std::path::PathBuf;

use foodland::demand::Drivers;
use foodland::output::{export_snapshots, validate};
use foodland::ModelParams;

fn main() -> foodland::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("foodland-snapshots"), PathBuf::from);
    std::fs::create_dir_all(&dir).map_err(|e| foodland::Error::Io { path: dir.clone(), source: e })?;
    let files = export_snapshots(&dir, &ModelParams::default(), &Drivers::builtin(), 9, &[1960, 2022, 2100])?;

    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| foodland::Error::Io { path: f.clone(), source: e })?;
        let (mut natural, mut organic, mut eps) = (0usize, 0usize, 0.0);
        for line in text.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            natural += usize::from(cols[2] == "natural");
            organic += usize::from(cols[3] == "organic");
            eps += cols[4].parse::<f64>().unwrap_or(0.0);
        }
        let rows = validate(f)?.rows;
        println!(
            "{}: {rows} cells, {natural} natural, {organic} organic, mean integrity {:.3}",
            f.display(),
            eps / rows as f64
        );
    }
    Ok(())
}
