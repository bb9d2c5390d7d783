use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_foodland");

const CONFIG: &str = r#"
runs = 2
seed = 5

[export]
per_run_records = true
scenario_timeseries = true

[params.timeline]
end_year = 2030
"#;

fn foodland(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
    dir
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn run_writes_timeseries_and_records() {
    let dir = setup();
    ok(&foodland(dir.path(), &["run", "--config", "run.toml", "--out", "o"]));
    let out = dir.path().join("o");
    assert_eq!(header(&out.join("timeseries.csv")), "year,variable,mean,stderr");
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 2 * 71);
    let v = ok(&foodland(dir.path(), &["validate", "o/runs.csv", "o/timeseries.csv"]));
    assert!(v.contains("142 rows"));
}

#[test]
fn scenario_and_sweep() {
    let dir = setup();
    std::fs::write(
        dir.path().join("s.toml"),
        "[[portfolio]]\nid = \"meat\"\npolicies = [\"meat_demand_reduction:0.1\"]\n",
    )
    .unwrap();
    let s = ok(&foodland(dir.path(), &["scenario", "--config", "run.toml", "--scenario", "s.toml", "--out", "o"]));
    assert!(s.contains("meat"));
    let out = dir.path().join("o");
    assert_eq!(header(&out.join("scenarios.csv")), "portfolio_id,policies,delta_forest_pct,delta_degraded_pct");
    assert!(out.join("timeseries_meat.csv").exists());
    assert!(header(&out.join("portfolio_legend.csv")).starts_with("portfolio_id,"));

    ok(&foodland(dir.path(), &["sweep", "--config", "run.toml", "--sweep-grid", "0:0.5:0.25", "--out", "w"]));
    let sweep = std::fs::read_to_string(dir.path().join("w/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
    assert!(dir.path().join("w/sweep_threshold.csv").exists());
}

#[test]
fn portfolio_ranking() {
    let dir = setup();
    let args = ["portfolio", "--config", "run.toml", "--pool", "meat_demand_reduction,chemical_reduction:0.3", "--top", "2", "--out", "o"];
    ok(&foodland(dir.path(), &args));
    let ranking = std::fs::read_to_string(dir.path().join("o/ranking.csv")).unwrap();
    assert_eq!(ranking.lines().count(), 1 + 2 * 2);
    ok(&foodland(dir.path(), &["validate", "o/ranking.csv"]));
}

#[test]
fn fit_recovers_coefficients() {
    let dir = setup();
    let mut csv = String::from("income,calories,meat\n");
    for i in 0..40 {
        let inc = 2.0 + i as f64;
        csv += &format!("{inc},{},{}\n", 600.0 + 280.0 * inc.ln(), 20.0 * inc.powf(0.5));
    }
    std::fs::write(dir.path().join("series.csv"), csv).unwrap();
    let s = ok(&foodland(dir.path(), &["fit", "series.csv", "--out", "o"]));
    assert!(s.contains("a = 600"), "{s}");
    assert_eq!(header(&dir.path().join("o/fit.csv")), "parameter,value");
}

#[test]
fn snapshot_years() {
    let dir = setup();
    ok(&foodland(dir.path(), &["snapshot", "--config", "run.toml", "--years", "1960,2000", "--out", "o"]));
    let snap = dir.path().join("o/snapshot_2000.csv");
    assert_eq!(header(&snap), "x,y,land_use,management,epsilon");
    assert_eq!(std::fs::read_to_string(snap).unwrap().lines().count(), 10_001);
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(foodland(dir.path(), &["run", "--runs", "0"]).status.code(), Some(2));
    assert_eq!(foodland(dir.path(), &["run", "--drivers", "missing.csv"]).status.code(), Some(4));
    std::fs::write(dir.path().join("bad.toml"), "runs = \"many\"\n").unwrap();
    let bad = foodland(dir.path(), &["run", "--config", "bad.toml"]);
    assert_ne!(bad.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 1"));
    assert_ne!(foodland(dir.path(), &["scenario", "--config", "run.toml"]).status.code(), Some(0));
}
