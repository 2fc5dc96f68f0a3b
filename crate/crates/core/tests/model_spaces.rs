use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use soblab_core::constants::{comparison_volume, unit_sphere_volume};
use soblab_core::model_spaces::{
    build_cone_model, build_sphere_model, dirichlet_energy, lp_norm, SampledFunction, WeightedGrid,
};

fn cos_on(n: f64, nodes: usize) -> SampledFunction {
    SampledFunction::from_fn(Arc::new(build_sphere_model(n, nodes).unwrap()), f64::cos).unwrap()
}

#[test]
fn cosine_norm_and_energy_converge_at_second_order() {
    for n in [2.0, 3.0, 4.5] {
        // E[cos²] = 1/(N+1) and E[sin²] = N/(N+1) on the model
        let exact_l2 = 1.0 / (n + 1.0);
        let exact_energy = n / (n + 1.0);
        let mut prev: Option<(f64, f64)> = None;
        for nodes in [65, 129, 257] {
            let u = cos_on(n, nodes);
            let el = (lp_norm(&u, 2.0).unwrap().powi(2) - exact_l2).abs();
            let ee = (dirichlet_energy(&u, 2.0).unwrap() - exact_energy).abs();
            if let Some((pl, pe)) = prev {
                assert!((pl / el).log2() >= 1.8, "N = {n}: L2 order {}", (pl / el).log2());
                assert!((pe / ee).log2() >= 1.8, "N = {n}: energy order {}", (pe / ee).log2());
            }
            prev = Some((el, ee));
        }
    }
}

#[test]
fn cosine_energy_is_n_times_l2_norm_squared() {
    for n in [2.0, 3.0, 5.5] {
        let u = cos_on(n, 4097);
        let e = dirichlet_energy(&u, 2.0).unwrap();
        let l2 = lp_norm(&u, 2.0).unwrap().powi(2);
        let h = PI / 4096.0;
        assert!((e - n * l2).abs() < 10.0 * h * h, "N = {n}");
    }
}

#[test]
fn sphere_balls_match_comparison_volume() {
    for n in [2.0, 3.0, 5.5] {
        let g = build_sphere_model(n, 1025).unwrap();
        let sigma_n = unit_sphere_volume(n + 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=64 {
            let r = PI * k as f64 / 64.0;
            // the exact ratio is 1; comparison_volume is accurate to 1e-10
            let ratio = g.mass_between(0.0, r) / (comparison_volume(n - 1.0, n, r).unwrap() / sigma_n);
            assert!(ratio <= prev * (1.0 + 2e-10), "N = {n}, r = {r}: {ratio} after {prev}");
            assert!((ratio - 1.0).abs() < 1e-9);
            prev = ratio;
        }
    }
}

#[test]
fn cone_mass_telescopes() {
    let g = build_cone_model(3.0, 1.0, 333).unwrap();
    let sum: f64 = g.cell_mass().iter().sum();
    assert!((sum - 4.0 * PI / 3.0).abs() < 1e-13);
}

#[test]
fn tabulated_uniform_grid_is_probability() {
    let g = WeightedGrid::uniform(-1.0, 2.0, 31).unwrap();
    assert!((g.total_mass() - 1.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn norms_are_homogeneous(c in -5.0f64..5.0, p in 1.0f64..6.0, a in 0.1f64..2.0) {
        let g = Arc::new(build_sphere_model(3.0, 65).unwrap());
        let u = SampledFunction::from_fn(g, |t| 1.0 + a * t.cos()).unwrap();
        let lhs = lp_norm(&u.scaled(c), p).unwrap();
        let rhs = c.abs() * lp_norm(&u, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        if p > 1.0 {
            let e = dirichlet_energy(&u.scaled(c), p).unwrap();
            let e0 = c.abs().powf(p) * dirichlet_energy(&u, p).unwrap();
            prop_assert!((e - e0).abs() <= 1e-11 * e0.max(1e-12));
        }
    }

    #[test]
    fn lp_norms_increase_with_p_on_probability_space(p in 1.0f64..5.0, dp in 0.01f64..3.0, seed in 0u64..1000) {
        let g = Arc::new(build_sphere_model(2.5, 40).unwrap());
        let s = seed as f64;
        let u = SampledFunction::from_fn(g, |t| (t * (1.0 + s % 7.0)).sin() + 0.3 * (s % 3.0)).unwrap();
        prop_assert!(lp_norm(&u, p).unwrap() <= lp_norm(&u, p + dp).unwrap() * (1.0 + 1e-12));
    }
}
