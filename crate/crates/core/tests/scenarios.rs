use foodland::demand::Drivers;
use foodland::engine::run_ensemble;
use foodland::params::ModelParams;
use foodland::scenario::{
    apply_portfolio, demand_sweep, enumerate_and_rank, parse_scenarios, Experiment, PolicyKind, PolicySpec, Portfolio,
};

const RUNS: usize = 4;
const SEED: u64 = 2024;

fn experiment() -> Experiment {
    Experiment::new(ModelParams::default(), Drivers::builtin(), RUNS, SEED)
}

fn single(kind: PolicyKind, m: f64) -> Portfolio {
    Portfolio::single(PolicySpec::new(kind, m).unwrap()).unwrap()
}

#[test]
fn branched_scenarios_match_full_runs() {
    let exp = experiment();
    let portfolios = vec![
        ("meat".to_string(), single(PolicyKind::MeatDemandReduction, 0.1)),
        ("ban".to_string(), single(PolicyKind::DeforestationRestrictionCrop, 1.0)),
    ];
    let eval = exp.evaluate(&portfolios).unwrap();
    assert_eq!(*eval.baseline, exp.baseline().unwrap());
    for (r, (id, p)) in eval.scenarios.iter().zip(&portfolios) {
        assert_eq!(&r.id, id);
        let direct = exp.run_scenario(p, &eval.baseline).unwrap();
        assert_eq!(direct.ensemble, r.ensemble);
        assert_eq!(direct.delta_forest_pct, r.delta_forest_pct);

        let (params, drivers) = apply_portfolio(&exp.params, &exp.drivers, p).unwrap();
        assert_eq!(*r.ensemble, run_ensemble(&params, &drivers, RUNS, SEED).unwrap());
    }
}

#[test]
fn empty_portfolio_has_zero_deltas() {
    let exp = experiment();
    let eval = exp.evaluate(&[("none".to_string(), Portfolio::empty())]).unwrap();
    assert_eq!(eval.scenarios[0].delta_forest_pct, Some(0.0));
    assert_eq!(eval.scenarios[0].delta_degraded_pct, Some(0.0));
}

#[test]
fn zero_rho_equals_base_portfolio() {
    let exp = experiment();
    let base = single(PolicyKind::OrganicCropExpansion, 0.1);
    let sweep = demand_sweep(&exp, &base, &[0.0, 1.0]).unwrap();
    let direct = exp.run_scenario(&base, &sweep.baseline).unwrap();
    assert_eq!(sweep.points[0].result.ensemble, direct.ensemble);
    // Removing all growth in demand improves both objectives.
    assert!(sweep.points[1].result.improves_both());
    assert_eq!(sweep.rho_star, Some(1.0));
}

#[test]
fn single_policy_pool_tops_both_lists() {
    let pool = [PolicySpec::new(PolicyKind::MeatDemandReduction, 0.2).unwrap()];
    let ranking = enumerate_and_rank(&experiment(), &pool, 10).unwrap();
    assert_eq!(ranking.results.len(), 1);
    assert_eq!(ranking.top_forest(), &[0]);
    assert_eq!(ranking.top_degraded(), &[0]);
    assert!(ranking.in_both(0));
}

#[test]
fn scenario_file_drives_evaluation() {
    let file = parse_scenarios(
        r#"
[[portfolio]]
id = "combo"
policies = ["chemical_reduction:0.2", { kind = "crop_demand_reduction", magnitude = 0.3 }]
"#,
    )
    .unwrap();
    let (id, p) = &file.portfolios[0];
    assert_eq!(id, "combo");
    assert_eq!(p.len(), 2);
    assert_eq!(p.get(PolicyKind::ChemicalReduction).unwrap().magnitude, 0.2);
    let eval = experiment().evaluate(&file.portfolios).unwrap();
    assert!(eval.scenarios[0].delta_forest_pct.is_some());
}
