#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soblab_core::model_spaces::{SampledFunction, WeightedGrid};

pub fn sphere(n: f64, nodes: usize) -> Arc<WeightedGrid> {
    Arc::new(WeightedGrid::sphere_model(n, nodes).unwrap())
}

/// Random non-negative piecewise linear function with `breaks` random knots.
pub fn random_piecewise_linear(grid: Arc<WeightedGrid>, breaks: usize, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (grid.left(), grid.right());
    let mut knots: Vec<f64> = (0..breaks).map(|_| rng.random_range(a..b)).collect();
    knots.push(a);
    knots.push(b);
    knots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let vals: Vec<f64> = knots.iter().map(|_| rng.random_range(0.0..1.0)).collect();
    SampledFunction::from_fn(grid, |x| {
        let i = knots.partition_point(|&k| k <= x).clamp(1, knots.len() - 1);
        let l = ((x - knots[i - 1]) / (knots[i] - knots[i - 1])).clamp(0.0, 1.0);
        vals[i - 1] * (1.0 - l) + vals[i] * l
    })
    .unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Probability grid on `[0, D]`, `D ∈ [0.5, π]`, whose density is the
/// exponential of a random trigonometric polynomial.
pub fn random_custom_grid(seed: u64, nodes: usize) -> WeightedGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.random_range(0.5..std::f64::consts::PI);
    let coef: Vec<(f64, f64)> = (1..=4).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let xs: Vec<f64> = (0..nodes).map(|i| d * i as f64 / (nodes - 1) as f64).collect();
    let density = move |t: f64| {
        let z = std::f64::consts::PI * t / d;
        coef.iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let k = (k + 1) as f64;
                (a * (k * z).cos() + b * (k * z).sin()) / k
            })
            .sum::<f64>()
            .exp()
    };
    WeightedGrid::from_density(xs, density, false).unwrap().normalized()
}
