mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use common::sphere;
use proptest::prelude::*;
use soblab_core::constants::unit_sphere_volume;
use soblab_core::model_spaces::{SampledFunction, WeightedGrid};
use soblab_core::yamabe::*;
use soblab_core::Extended;

fn field<F: Fn(f64) -> f64>(g: &Arc<WeightedGrid>, f: F) -> ScalarField {
    ScalarField::from_fn(g.clone(), f, 3.5).unwrap()
}

fn quick() -> YamabeOptions {
    YamabeOptions { n_restarts: 3, ..Default::default() }
}

/// `N(N−2)/4`, the sharp constant of the model `I_N`.
fn model_bound(n: f64) -> f64 {
    n * (n - 2.0) / 4.0
}

#[test]
fn positive_part_of_cosine_matches_closed_form() {
    // on I_4: ∫|u'|² dm = (8/15)/(4/3) and ∫u⁴ dm = (2/35)/(4/3)
    let oracle = 0.4 / (3.0f64 / 70.0).sqrt();
    let errs: Vec<f64> = [1025, 4097]
        .iter()
        .map(|&nodes| {
            let g = sphere(4.0, nodes);
            let u = SampledFunction::from_fn(g.clone(), |t| t.cos().max(0.0)).unwrap();
            let q = yamabe_quotient(&u, &field(&g, |_| 0.0), 4.0).unwrap();
            (q - oracle).abs()
        })
        .collect();
    assert!(errs[1] < 1e-5, "{errs:?}");
    assert!(errs[1] <= errs[0]);
}

#[test]
fn quotient_shifts_with_constant_potential() {
    let g = sphere(5.0, 513);
    let one = SampledFunction::constant(g.clone(), 1.0).unwrap();
    let s = field(&g, |t| (3.0 * t).sin() - t);
    let base = yamabe_quotient(&one, &s, 5.0).unwrap();
    for c in [-3.0, 0.5, 10.0] {
        let shifted = yamabe_quotient(&one, &s.shifted(c), 5.0).unwrap();
        assert!((shifted - base - c).abs() < 1e-12, "{c}");
    }
}

#[test]
fn zero_potential_has_constant_minimizer() {
    for n in [3.0, 4.0, 6.0] {
        let g = sphere(n, 4096);
        let s = ScalarField::constant(g.clone(), 0.0, n).unwrap();
        let r = minimize_yamabe(&g, &s, n, &quick()).unwrap();
        assert!(r.converged);
        assert!(r.lambda_estimate.abs() < 1e-12, "{}", r.lambda_estimate);
        assert!(r.el_residual <= 1e-8);
        let v = r.minimizer.values();
        let spread = v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6, "{spread}");
    }
}

#[test]
fn subcritical_constant_potential_is_attained_by_constants() {
    // Q_{s0} ≥ bound·(1 − ‖u‖²₂) + s0‖u‖²₂ ≥ s0 when s0 ≤ bound
    let n = 4.0;
    let g = sphere(n, 2048);
    for s0 in [0.3, 1.0, 1.9] {
        let s = field(&g, |_| s0);
        let r = minimize_yamabe(&g, &s, n, &quick()).unwrap();
        assert!(r.lambda_estimate <= s0 + 1e-12);
        assert!((r.lambda_estimate - s0).abs() < 1e-9, "{s0}: {}", r.lambda_estimate);
        assert!(yamabe_upper_bound_check(r.lambda_estimate, Extended::Finite(1.0 / unit_sphere_volume(n + 1.0).unwrap()), n)
            .unwrap()
            .passed);
    }
}

#[test]
fn supercritical_constant_potential_approaches_the_bound_from_above() {
    // for s0 above the bound the infimum equals the bound and is not attained:
    // minimizing sequences concentrate at an end point
    let n = 4.0;
    let s0 = 10.0 * model_bound(n);
    let opts = YamabeOptions { n_restarts: 3, max_iter: 3000, ..Default::default() };
    let lambdas: Vec<f64> = [512, 1024]
        .iter()
        .map(|&nodes| {
            let g = sphere(n, nodes);
            let r = minimize_yamabe(&g, &field(&g, |_| s0), n, &opts).unwrap();
            let v = r.minimizer.values();
            assert!(v[0].max(v[v.len() - 1]) > 10.0 * v[v.len() / 2]);
            r.lambda_estimate
        })
        .collect();
    let bound = model_bound(n);
    assert!(lambdas.iter().all(|l| *l >= bound * (1.0 - 1e-6) && *l < 1.1 * bound), "{lambdas:?}");
    assert!(lambdas[1] - bound < 0.6 * (lambdas[0] - bound), "{lambdas:?}");
}

#[test]
fn potential_well_attracts_the_minimizer() {
    let n = 4.0;
    let well = |t: f64| -5.0 * (-((t - 1.5) / 0.3f64).powi(2)).exp();
    let reports: Vec<YamabeReport> = [1024, 4096]
        .iter()
        .map(|&nodes| {
            let g = sphere(n, nodes);
            minimize_yamabe(&g, &field(&g, well), n, &YamabeOptions::default()).unwrap()
        })
        .collect();
    for r in &reports {
        assert!(r.lambda_estimate < 0.0);
        let v = r.minimizer.values();
        let i = v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
        let peak = r.minimizer.grid().nodes()[i];
        assert!((peak - 1.5).abs() < 0.05, "{peak}");
        assert!(v.iter().all(|x| *x >= 0.0));
    }
    assert!((reports[0].lambda_estimate - reports[1].lambda_estimate).abs() < 1e-4);
    assert!(reports[1].converged, "{:?}", reports[1].stop_reason);
    assert!(reports[1].el_residual <= 1e-5);
}

#[test]
fn minimizer_invariants() {
    let n = 5.0;
    let g = sphere(n, 1024);
    let s = field(&g, |t| 2.0 * t.cos() - 0.5);
    let r = minimize_yamabe(&g, &s, n, &YamabeOptions::default()).unwrap();
    let u = &r.minimizer;
    assert!(u.values().iter().all(|x| *x >= 0.0));
    let norm = soblab_core::model_spaces::lp_norm(u, r.critical_exponent).unwrap();
    assert!((norm - 1.0).abs() < 1e-10);
    assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0)));
    assert!((yamabe_quotient(u, &s, n).unwrap() - r.lambda_estimate).abs() < 1e-12);
    assert!(r.lambda_estimate >= -s.negative_part_norm());
    assert!(!r.unbounded_looking);
    assert!(r.converged && r.el_residual <= 1e-5);
}

#[test]
fn residual_grows_linearly_under_perturbation() {
    let n = 4.0;
    let g = sphere(n, 2048);
    let s = field(&g, |t| 1.0 + t.cos());
    let r = minimize_yamabe(&g, &s, n, &quick()).unwrap();
    let base = r.el_residual;
    let bump: Vec<f64> = g.nodes().iter().map(|t| (-(t - 1.0f64).powi(2) / 0.1).exp()).collect();
    let res: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|d| {
            let v = r.minimizer.values().iter().zip(&bump).map(|(u, b)| u + d * b).collect();
            euler_lagrange_residual(&r.minimizer.with_values(v).unwrap(), r.lambda_estimate, &s, n).unwrap()
        })
        .collect();
    assert!(res[2] > 100.0 * base, "{res:?} vs {base}");
    for w in res.windows(2) {
        assert!((w[0] / w[1] - 10.0).abs() < 0.5, "{res:?}");
    }
}

#[test]
fn constants_solve_the_equation_without_potential() {
    let g = sphere(3.0, 4096);
    let one = SampledFunction::constant(g.clone(), 1.0).unwrap();
    let zero = ScalarField::constant(g.clone(), 0.0, 2.0).unwrap();
    assert!(euler_lagrange_residual(&one, 0.0, &zero, 3.0).unwrap() <= 1e-14);
}

#[test]
fn upper_bound_on_the_model() {
    for n in [3.0, 4.0, 6.0, 9.5] {
        let theta = 1.0 / unit_sphere_volume(n + 1.0).unwrap();
        let rep = yamabe_upper_bound_check(0.0, Extended::Finite(theta), n).unwrap();
        assert!(rep.passed);
        let b = rep.bound.finite().unwrap();
        assert!((b / model_bound(n) - 1.0).abs() < 1e-12, "N {n}: {b}");
        assert!(!yamabe_upper_bound_check(b * (1.0 + 1e-6), Extended::Finite(theta), n).unwrap().passed);
    }
}

#[test]
fn rejected_inputs() {
    let g = sphere(4.0, 65);
    let s = field(&g, |_| 1.0);
    assert!(minimize_yamabe(&g, &s, 2.0, &quick()).is_err());
    let other = sphere(4.0, 66);
    assert!(minimize_yamabe(&other, &s, 4.0, &quick()).is_err());
    let xs: Vec<f64> = (0..65).map(|i| i as f64 / 32.0).collect();
    let heavy = Arc::new(WeightedGrid::from_density(xs, |_| 1.0, false).unwrap());
    let sh = ScalarField::constant(heavy.clone(), 1.0, 3.0).unwrap();
    assert!(minimize_yamabe(&heavy, &sh, 4.0, &quick()).is_err());
    assert!(minimize_yamabe(&g, &s, 4.0, &YamabeOptions { n_restarts: 0, ..Default::default() }).is_err());
    let a = vec![sphere(4.0, 65).as_ref().clone()];
    assert!(lambda_continuity_trend(&a, std::slice::from_ref(&s), 4.0, &quick()).is_err());
}

/// Probability grid on `[0, π]` with weight `sin^{e}`.
fn sine_power_grid(e: f64, nodes: usize) -> WeightedGrid {
    let xs: Vec<f64> = (0..nodes).map(|i| PI * i as f64 / (nodes - 1) as f64).collect();
    WeightedGrid::from_density(xs, move |t| t.sin().max(0.0).powf(e), false).unwrap().normalized()
}

#[test]
fn lambda_along_converging_weights() {
    // members have dimension 4 + 1/k, so the exponent is taken from N = 5
    let n = 5.0;
    let grids: Vec<WeightedGrid> = (1..=8).map(|k| sine_power_grid(3.0 + 1.0 / k as f64, 1024)).collect();
    let constant: Vec<ScalarField> =
        grids.iter().map(|g| ScalarField::constant(Arc::new(g.clone()), 1.0, 3.0).unwrap()).collect();
    let flat = lambda_continuity_trend(&grids, &constant, n, &quick()).unwrap();
    assert!(flat.passed);
    assert!(flat.lambdas.iter().all(|l| (l - 1.0).abs() < 1e-9), "{:?}", flat.lambdas);

    let varying: Vec<ScalarField> =
        grids.iter().map(|g| ScalarField::from_fn(Arc::new(g.clone()), |t| 1.0 + 3.0 * t.cos(), 3.0).unwrap()).collect();
    let rep = lambda_continuity_trend(&grids, &varying, n, &quick()).unwrap();
    assert!(rep.passed, "{:?}", rep.jumps);
    assert!(rep.lambdas.iter().all(|l| *l < 1.0 - 1e-3), "{:?}", rep.lambdas);
    assert!(rep.jumps.windows(2).all(|w| w[1] <= w[0] * 1.05 + 1e-9), "{:?}", rep.jumps);
}

#[test]
fn exponent_above_the_dimension_lets_bubbles_win() {
    // with N = 4 the weight sin^{3+1/k} has dimension above N: concentrating
    // at an end point drives the quotient down, limited only by the mesh
    let n = 4.0;
    let members: Vec<f64> = [1.0, 8.0]
        .iter()
        .map(|&k| {
            let g = Arc::new(sine_power_grid(3.0 + 1.0 / k, 1024));
            let s = ScalarField::constant(g.clone(), 1.0, 3.0).unwrap();
            minimize_yamabe(&g, &s, n, &quick()).unwrap().lambda_estimate
        })
        .collect();
    assert!(members[0] < 0.5, "{members:?}");
    assert!(members[1] <= 1.0 + 1e-12);
}

#[test]
fn identical_family_gives_identical_lambdas() {
    let g = sphere(4.0, 512);
    let s = field(&g, |t| 1.0 + t.cos());
    let grids = vec![g.as_ref().clone(); 3];
    let rep = lambda_continuity_trend(&grids, &vec![s; 3], 4.0, &quick()).unwrap();
    assert_eq!(rep.max_jump, 0.0);
    assert!(rep.passed);
}

#[test]
fn oscillating_potentials_converge_weakly() {
    // S_k = 1 + sin(k t) ⇀ 1 with bounded sup norm
    let n = 4.0;
    let g = sphere(n, 4096);
    let gaps: Vec<f64> = [4.0, 16.0, 64.0]
        .iter()
        .map(|&k| {
            let r = minimize_yamabe(&g, &field(&g, move |t| 1.0 + (k * t).sin()), n, &quick()).unwrap();
            (r.lambda_estimate - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(gaps[2] < 1e-2, "{gaps:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn lambda_is_monotone_in_the_potential(a in -1.0f64..1.0, b in -1.0f64..1.0, lift in 0.0f64..1.0) {
        let n = 4.0;
        let g = sphere(n, 257);
        let low = field(&g, move |t| a * t.cos() + b * (2.0 * t).sin());
        let high = low.shifted(lift);
        let l1 = minimize_yamabe(&g, &low, n, &quick()).unwrap();
        let l2 = minimize_yamabe(&g, &high, n, &quick()).unwrap();
        prop_assert!(l1.lambda_estimate <= l2.lambda_estimate + 2e-7);
        prop_assert!(l1.lambda_estimate >= -low.negative_part_norm());
        prop_assert!(l1.lambda_estimate <= model_bound(n) + 1e-9);
    }

    #[test]
    fn constant_test_function_sees_shifts_exactly(c in -5.0f64..5.0, a in -2.0f64..2.0) {
        let g = sphere(3.0, 129);
        let one = SampledFunction::constant(g.clone(), 1.0).unwrap();
        let s = ScalarField::from_fn(g.clone(), move |t| a * t.sin(), 2.0).unwrap();
        let d = yamabe_quotient(&one, &s.shifted(c), 3.0).unwrap() - yamabe_quotient(&one, &s, 3.0).unwrap();
        prop_assert!((d - c).abs() < 1e-12);
    }
}
