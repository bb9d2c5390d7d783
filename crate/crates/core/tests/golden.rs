//! The first ten years of seed 7 under default parameters, pinned to a
//! committed file. Set `UPDATE_GOLDEN=1` to rewrite it after an intended
//! model change.

use std::path::PathBuf;

use foodland::demand::Drivers;
use foodland::engine::Simulation;
use foodland::output::RunsWriter;
use foodland::params::ModelParams;

const SEED: u64 = 7;
const LAST_YEAR: i32 = 1970;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/golden_seed7_1960_1970.csv")
}

#[test]
fn golden_ten_year_record() {
    let mut sim = Simulation::new(&ModelParams::default(), &Drivers::builtin(), SEED).unwrap();
    sim.run_until(LAST_YEAR).unwrap();
    let record = sim.into_record();
    assert_eq!(record.rows.len(), 11);

    let dir = tempfile::tempdir().unwrap();
    let mut w = RunsWriter::create(&dir.path().join("runs.csv")).unwrap();
    w.write(&record).unwrap();
    let fresh = std::fs::read_to_string(w.finish().unwrap()).unwrap();

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(golden_path(), &fresh).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).expect("golden file missing; run with UPDATE_GOLDEN=1");
    for (i, (a, b)) in fresh.lines().zip(golden.lines()).enumerate() {
        assert_eq!(a, b, "line {} differs from the golden record", i + 1);
    }
    assert_eq!(fresh.lines().count(), golden.lines().count());
}
