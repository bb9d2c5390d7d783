use foodland::demand::Drivers;
use foodland::engine::{self, run_ensemble, RunRecord};
use foodland::params::ModelParams;
use proptest::prelude::*;

fn decoupled() -> ModelParams {
    let mut p = ModelParams::default();
    p.production.feed_coeff = 0.0;
    p.demand.alpha_c = 0.0;
    p.demand.alpha_m = 0.0;
    p.land.zeta_plus_c = 0.0;
    p.land.zeta_plus_m = 0.0;
    p.land.zeta_minus_c = 0.0;
    p.land.zeta_minus_m = 0.0;
    p.timeline.end_year = 2030;
    p.timeline.policy_year = 2022;
    p
}

fn column(r: &RunRecord, name: &str) -> Vec<f64> {
    r.column(name).unwrap().into_iter().map(Option::unwrap).collect()
}

#[test]
fn factorization_gives_pure_churn() {
    let p = decoupled();
    let r = engine::run(&p, &Drivers::builtin(), 3).unwrap();
    let quantum = (p.land.phi * p.landscape.cell_count() as f64).round();
    for name in ["cells_converted_crop", "cells_converted_pasture", "cells_abandoned_crop", "cells_abandoned_pasture"] {
        assert!(column(&r, name)[1..].iter().all(|v| *v == quantum), "{name}");
    }
    assert!(column(&r, "area_crop").iter().all(|v| *v == 1500.0));
    assert!(column(&r, "area_pasture").iter().all(|v| *v == 3500.0));
    assert!(column(&r, "demand_feed").iter().all(|v| *v == 0.0));
    // Without feed, meat is still scaled back when crops fall short of food demand.
    let (q, d) = (column(&r, "output_crop"), column(&r, "demand_crop_food"));
    for ((s, q), d) in column(&r, "feed_scaling").iter().zip(q).zip(d) {
        assert_eq!(*s, (q / d).min(1.0));
    }
}

#[test]
fn factorization_isolates_crops_from_meat_production() {
    // p = 0 holds ecosystem services at 1. The shared natural pool is the
    // remaining link: abandoned pasture carries Λ-dependent integrity into
    // the cells crops later convert.
    let mut p = decoupled();
    p.landscape.p = 0.0;
    let mut q = p.clone();
    q.production.gamma *= 0.5;
    q.production.h *= 0.5;
    let a = engine::run(&p, &Drivers::builtin(), 5).unwrap();
    let b = engine::run(&q, &Drivers::builtin(), 5).unwrap();
    assert_eq!(column(&a, "demand_crop_food"), column(&b, "demand_crop_food"));
    for name in ["output_crop", "mechanization", "chemicals", "mean_eps_crop_conv"] {
        for (x, y) in column(&a, name).iter().zip(column(&b, name)) {
            assert!((x - y).abs() <= 1e-3 * x.abs(), "{name}: {x} vs {y}");
        }
    }
    let (ma, mb) = (column(&a, "output_meat"), column(&b, "output_meat"));
    assert!((ma.last().unwrap() / mb.last().unwrap() - 1.0).abs() > 0.01);
}

#[test]
fn same_seed_same_record() {
    let p = decoupled();
    let a = engine::run(&p, &Drivers::builtin(), 11).unwrap();
    let b = engine::run(&p, &Drivers::builtin(), 11).unwrap();
    let c = engine::run(&p, &Drivers::builtin(), 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.rows, c.rows);
}

#[test]
fn ensemble_independent_of_thread_count() {
    let mut p = ModelParams::default();
    p.timeline.end_year = 1990;
    p.timeline.policy_year = 1990;
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_ensemble(&p, &Drivers::builtin(), 9, 4).unwrap())
    };
    assert_eq!(run_with(1), run_with(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn land_changes_bounded(seed in any::<u64>(), zeta in 0.0f64..2000.0, phi in 0.0f64..0.01) {
        let mut p = ModelParams::default();
        p.landscape.width = 30;
        p.landscape.height = 30;
        p.land.zeta_plus_c = zeta;
        p.land.zeta_plus_m = zeta;
        p.land.phi = phi;
        p.timeline.end_year = 2000;
        p.timeline.policy_year = 2000;
        let r = engine::run(&p, &Drivers::builtin(), seed).unwrap();
        for row in &r.rows {
            let c = &row.change;
            prop_assert!(c.converted_crop + c.converted_pasture + c.abandoned_crop + c.abandoned_pasture <= 900);
            let m = &row.metrics;
            prop_assert_eq!(m.area_natural + m.area_crop + m.area_pasture, 900);
        }
    }
}
