//! Crop and meat production, feed coupling, input adaptation and
//! technology.

use serde::{Deserialize, Serialize};

use crate::params::ProductionParams;

/// Technology and input intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub technology: f64,
    pub mechanization: f64,
    pub chemicals: f64,
    pub livestock_density: f64,
}

impl InputState {
    pub fn initial(params: &ProductionParams) -> Self {
        Self {
            technology: params.t0,
            mechanization: 1.0,
            chemicals: 1.0,
            livestock_density: 1.0,
        }
    }
}

/// Outputs of one step in model units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProductionOutput {
    pub q_c: f64,
    pub q_c_org: f64,
    /// Planned (pre-scaling) meat output by regime.
    pub q_m: f64,
    pub q_m_org: f64,
    pub crop_total: f64,
    /// Meat output after feed scaling.
    pub meat_total: f64,
    pub feed_demand: f64,
    pub feed_scaling: f64,
}

fn checked_mean(area: usize, mean: Option<f64>) -> f64 {
    match mean {
        Some(m) => m,
        None => {
            assert_eq!(area, 0, "mean integrity missing for a non-empty subset");
            0.0
        }
    }
}

/// Conventional and organic crop output. Each regime produces on its own
/// area; organic production has no chemical term.
pub fn crop_output(
    area_conv: usize,
    area_org: usize,
    inputs: &InputState,
    eps_conv: Option<f64>,
    eps_org: Option<f64>,
    params: &ProductionParams,
) -> (f64, f64) {
    let e = 1.0 - params.k - params.f;
    let tech = 1.0 + inputs.technology;
    let mech = inputs.mechanization.powf(params.f);
    let q_c = if area_conv == 0 {
        0.0
    } else {
        area_conv as f64 * tech * inputs.chemicals.powf(params.k) * mech * checked_mean(area_conv, eps_conv).powf(e)
    };
    let q_org = if area_org == 0 {
        0.0
    } else {
        area_org as f64 * tech * mech * checked_mean(area_org, eps_org).powf(e)
    };
    (q_c, q_org)
}

/// Conventional and organic meat output; organic density is capped.
pub fn meat_output(
    area_conv: usize,
    area_org: usize,
    inputs: &InputState,
    eps_conv: Option<f64>,
    eps_org: Option<f64>,
    params: &ProductionParams,
) -> (f64, f64) {
    let e = 1.0 - params.h;
    let tech = 1.0 + inputs.technology;
    let q_m = if area_conv == 0 {
        0.0
    } else {
        area_conv as f64 * tech * inputs.livestock_density.powf(params.h) * checked_mean(area_conv, eps_conv).powf(e)
    };
    let q_org = if area_org == 0 {
        0.0
    } else {
        let lambda = inputs.livestock_density.min(params.lambda_max);
        area_org as f64 * tech * lambda.powf(params.h) * checked_mean(area_org, eps_org).powf(e)
    };
    (q_m, q_org)
}

/// Crop units required to feed the planned meat output.
pub fn feed_demand(planned_meat: f64, params: &ProductionParams) -> f64 {
    params.feed_coeff * planned_meat
}

/// Scale meat output down when crop output cannot cover food and feed.
/// Returns `(final meat, factor)`.
pub fn scale_meat_to_feed(planned_meat: f64, crop_output: f64, food: f64, feed: f64) -> (f64, f64) {
    let need = food + feed;
    let factor = if need > 0.0 { (crop_output / need).min(1.0) } else { 1.0 };
    (planned_meat * factor, factor)
}

/// Proportional correction of one intensity towards closing a demand gap,
/// floored at 1.
pub fn adjust_intensity(x: f64, speed: f64, demand: f64, supply: f64) -> f64 {
    (x + speed * x * (demand - supply) / demand).max(1.0)
}

/// Update mechanization, chemicals and livestock density from this step's
/// demands and last step's outputs.
pub fn update_inputs(inputs: &InputState, d_c: f64, q_c_prev: f64, d_m: f64, q_m_prev: f64, params: &ProductionParams) -> InputState {
    InputState {
        mechanization: adjust_intensity(inputs.mechanization, params.beta, d_c, q_c_prev),
        chemicals: adjust_intensity(inputs.chemicals, params.delta, d_c, q_c_prev),
        livestock_density: adjust_intensity(inputs.livestock_density, params.gamma, d_m, q_m_prev),
        ..*inputs
    }
}

/// Logistic technology growth towards its ceiling.
pub fn advance_technology(t: f64, params: &ProductionParams) -> f64 {
    (t + params.nu * t * (1.0 - t / params.t_max)).min(params.t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> InputState {
        InputState {
            technology: 0.0,
            mechanization: 1.0,
            chemicals: 1.0,
            livestock_density: 1.0,
        }
    }

    fn p() -> ProductionParams {
        ProductionParams::default()
    }

    #[test]
    fn crop_examples() {
        assert_eq!(crop_output(1500, 0, &unit(), Some(1.0), None, &p()), (1500.0, 0.0));
        let x = InputState {
            technology: 0.2,
            chemicals: 2.0,
            ..unit()
        };
        let (q, _) = crop_output(1500, 0, &x, Some(1.0), None, &p());
        assert!((q - 1500.0 * 1.2 * 2f64.powf(0.2)).abs() < 1e-9);
        assert!((q - 2067.7).abs() < 0.05);
        let (_, o) = crop_output(0, 100, &unit(), None, Some(0.5), &p());
        assert!((o - 81.23).abs() < 0.005);
    }

    #[test]
    fn meat_examples() {
        assert_eq!(meat_output(3500, 0, &unit(), Some(1.0), None, &p()).0, 3500.0);
        let x = InputState {
            livestock_density: 2.0,
            ..unit()
        };
        assert!((meat_output(3500, 0, &x, Some(1.0), None, &p()).0 - 6761.6).abs() < 0.05);
        let x = InputState {
            livestock_density: 5.0,
            ..unit()
        };
        assert!((meat_output(0, 100, &x, None, Some(1.0), &p()).1 - 283.9652).abs() < 1e-4);
    }

    #[test]
    #[should_panic]
    fn missing_mean_with_area_panics() {
        crop_output(5, 0, &unit(), None, None, &p());
    }

    #[test]
    fn feed_and_scaling() {
        assert_eq!(feed_demand(0.0, &p()), 0.0);
        assert!((feed_demand(3500.0, &p()) - 595.0).abs() < 1e-9);
        let none = ProductionParams { feed_coeff: 0.0, ..p() };
        assert_eq!(feed_demand(3500.0, &none), 0.0);
        let (m, f) = scale_meat_to_feed(100.0, 1200.0, 1000.0, 500.0);
        assert!((f - 0.8).abs() < 1e-12 && (m - 80.0).abs() < 1e-12);
        assert_eq!(scale_meat_to_feed(100.0, 2000.0, 1000.0, 500.0), (100.0, 1.0));
        assert_eq!(scale_meat_to_feed(100.0, 0.0, 1000.0, 500.0), (0.0, 0.0));
        assert_eq!(scale_meat_to_feed(100.0, 0.0, 0.0, 0.0), (100.0, 1.0));
    }

    #[test]
    fn input_examples() {
        let x = unit();
        assert_eq!(update_inputs(&x, 100.0, 100.0, 50.0, 50.0, &p()), x);
        let y = update_inputs(&x, 100.0, 90.0, 50.0, 50.0, &p());
        assert!((y.mechanization - 1.095).abs() < 1e-12);
        assert_eq!(adjust_intensity(1.0, 1.1, 100.0, 150.0), 1.0);
    }

    #[test]
    fn technology_examples() {
        assert_eq!(advance_technology(0.2, &p()), 0.2);
        assert!((advance_technology(0.001, &p()) - 0.0010995).abs() < 1e-15);
        assert!((advance_technology(0.1, &p()) - 0.105).abs() < 1e-15);
    }

    #[test]
    fn technology_converges_monotonically() {
        let mut t = 0.001;
        for _ in 0..10_000 {
            let next = advance_technology(t, &p());
            assert!(next >= t && next <= 0.2);
            t = next;
        }
        assert!((t - 0.2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn organic_never_beats_conventional(area in 1usize..5000, t in 0.0f64..0.2, m in 1.0f64..10.0, phi in 1.0f64..10.0, eps in 0.01f64..1.0) {
            let x = InputState { technology: t, mechanization: m, chemicals: phi, livestock_density: 1.0 };
            let (c, _) = crop_output(area, 0, &x, Some(eps), None, &p());
            let (_, o) = crop_output(0, area, &x, None, Some(eps), &p());
            prop_assert!(o <= c);
            if phi > 1.0 { prop_assert!(o < c); }
        }

        #[test]
        fn outputs_linear_in_area(area in 1usize..5000, l in 1.0f64..10.0, eps in 0.01f64..1.0) {
            let x = InputState { livestock_density: l, chemicals: l, ..unit() };
            let (a, b) = meat_output(area, area, &x, Some(eps), Some(eps), &p());
            let (a2, b2) = meat_output(2 * area, 2 * area, &x, Some(eps), Some(eps), &p());
            prop_assert!((a2 - 2.0 * a).abs() <= 1e-9 * a2 && (b2 - 2.0 * b).abs() <= 1e-9 * b2);
            let (c, d) = crop_output(area, area, &x, Some(eps), Some(eps), &p());
            let (c2, d2) = crop_output(2 * area, 2 * area, &x, Some(eps), Some(eps), &p());
            prop_assert!((c2 - 2.0 * c).abs() <= 1e-9 * c2 && (d2 - 2.0 * d).abs() <= 1e-9 * d2);
        }

        #[test]
        fn feed_scaling_bounded(q in 0.0f64..1e5, c in 0.0f64..1e5, food in 0.0f64..1e5, feed in 0.0f64..1e5) {
            let (m, f) = scale_meat_to_feed(q, c, food, feed);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(m <= q);
        }

        #[test]
        fn inputs_floored(m in 1.0f64..20.0, phi in 1.0f64..20.0, l in 1.0f64..20.0, d in 1.0f64..1e4, q in 0.0f64..1e5) {
            let x = InputState { technology: 0.1, mechanization: m, chemicals: phi, livestock_density: l };
            let y = update_inputs(&x, d, q, d, q, &p());
            prop_assert!(y.mechanization >= 1.0 && y.chemicals >= 1.0 && y.livestock_density >= 1.0);
        }

        #[test]
        fn chemical_elasticity(phi in 1.1f64..20.0, m in 1.0f64..5.0, eps in 0.1f64..1.0) {
            let x = InputState { chemicals: phi, mechanization: m, technology: 0.05, livestock_density: 1.0 };
            let h = 1e-6 * phi;
            let up = crop_output(100, 0, &InputState { chemicals: phi + h, ..x }, Some(eps), None, &p()).0;
            let down = crop_output(100, 0, &InputState { chemicals: phi - h, ..x }, Some(eps), None, &p()).0;
            let q = crop_output(100, 0, &x, Some(eps), None, &p()).0;
            let fd = (up - down) / (2.0 * h);
            let exact = 0.2 * q / phi;
            prop_assert!((fd - exact).abs() <= 1e-6 * exact);
        }
    }
}
