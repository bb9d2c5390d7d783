//! Spatially correlated random fields for the initial land-cover layout.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Gaussian white noise smoothed by an isotropic Gaussian kernel on a
/// periodic grid. The kernel width is `xi / sqrt(2)`, so the field's
/// autocorrelation falls off as `exp(-r^2 / (2 xi^2))`.
pub fn gaussian_field<R: Rng + ?Sized>(width: usize, height: usize, xi: f64, rng: &mut R) -> Vec<f64> {
    let n = width * height;
    let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    let sd = xi / std::f64::consts::SQRT_2;
    let radius = (3.0 * sd).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|o| (-(o * o) as f64 / (2.0 * sd * sd)).exp())
        .collect();

    let wrap = |i: isize, len: usize| i.rem_euclid(len as isize) as usize;

    let mut rows = vec![0.0; n];
    for y in 0..height {
        let line = &noise[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                acc += w * line[wrap(x as isize + j as isize - radius, width)];
            }
            rows[y * width + x] = acc;
        }
    }

    let mut out = vec![0.0; n];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                acc += w * rows[wrap(y as isize + j as isize - radius, height) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Binary mask with exactly `round(fraction * width * height)` set cells,
/// taken as the upper `fraction`-quantile of a correlated Gaussian field.
pub fn generate_correlated_mask<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    xi: f64,
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::config(format!("mask fraction {fraction} outside [0, 1]")));
    }
    if !(xi > 0.0) {
        return Err(Error::config(format!("correlation length {xi} must be positive")));
    }
    let n = width * height;
    let want = (fraction * n as f64).round() as usize;
    if want == 0 {
        return Ok(vec![false; n]);
    }
    if want == n {
        return Ok(vec![true; n]);
    }
    let field = gaussian_field(width, height, xi, rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&i, &j| field[j].total_cmp(&field[i]).then(i.cmp(&j)));
    let mut mask = vec![false; n];
    for &i in &order[..want] {
        mask[i] = true;
    }
    Ok(mask)
}

/// Moran's I of a scalar field on a periodic grid with rook adjacency.
pub fn morans_i(values: &[f64], width: usize, height: usize) -> f64 {
    let n = values.len();
    debug_assert_eq!(n, width * height);
    let mean = values.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let mut num = 0.0;
    let mut weight = 0.0;
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            let right = y * width + (x + 1) % width;
            let down = ((y + 1) % height) * width + x;
            // each undirected pair counted twice in the symmetric weight matrix
            num += 2.0 * dev[i] * (dev[right] + dev[down]);
            weight += 4.0;
        }
    }
    (n as f64 / weight) * num / denom
}
