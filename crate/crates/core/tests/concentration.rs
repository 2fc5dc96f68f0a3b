mod common;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soblab_core::concentration::*;
use soblab_core::constants::{eucl_constant, unit_sphere_volume};
use soblab_core::model_spaces::{SampledFunction, WeightedGrid};
use soblab_core::{Error, Extended};

fn critical(n: f64) -> f64 {
    2.0 * n / (n - 2.0)
}

fn family<F: Fn(usize, f64) -> f64>(g: &Arc<WeightedGrid>, len: usize, f: F) -> Vec<SampledFunction> {
    (0..len).map(|k| SampledFunction::from_fn(g.clone(), |t| f(k, t)).unwrap()).collect()
}

/// `k^{(N-2)/2} φ(k t)` on the cone with `φ(s) = (1 − s^a)_+^b`.
fn bumps(g: &Arc<WeightedGrid>, n: f64, k0: f64, a: f64, b: f64) -> Vec<SampledFunction> {
    family(g, 6, |j, t| {
        let k = k0 * 2f64.powi(j as i32);
        k.powf(0.5 * (n - 2.0)) * (1.0 - (k * t).powf(a)).max(0.0).powf(b)
    })
}

fn classify(g: &WeightedGrid, seq: &[SampledFunction], n: f64) -> Classification {
    classify_sequence(g, seq, critical(n), &ConcentrationThresholds::default()).unwrap().classification
}

#[test]
fn trichotomy_on_synthetic_families() {
    for nodes in [1024, 4096] {
        for n in [3.0, 4.0, 6.0] {
            let sphere = Arc::new(WeightedGrid::sphere_model(n, nodes).unwrap());
            let constant = family(&sphere, 8, |k, t| 1.0 + t.cos() / (k + 1) as f64);
            assert_eq!(classify(&sphere, &constant, n), Classification::ConstantLimit, "N {n} nodes {nodes}");
            let fixed = family(&sphere, 6, |_, t| 1.0 + 2.0 * t.cos());
            assert_eq!(classify(&sphere, &fixed, n), Classification::NonConstantLimit);
            let cone = Arc::new(WeightedGrid::cone_model(n, 1.0, nodes).unwrap());
            match classify(&cone, &bumps(&cone, n, 2.0, 2.0, 2.0), n) {
                Classification::Concentration { location, mass_in_shrinking_balls } => {
                    assert!(location < 0.05, "{location}");
                    assert!(mass_in_shrinking_balls >= 0.9);
                }
                other => panic!("N {n} nodes {nodes}: {other:?}"),
            }
        }
    }
}

#[test]
fn concentration_traces_scale_as_expected() {
    let n = 4.0;
    let cone = Arc::new(WeightedGrid::cone_model(n, 1.0, 4096).unwrap());
    let d = classify_sequence(&cone, &bumps(&cone, n, 2.0, 2.0, 2.0), critical(n), &Default::default()).unwrap();
    // ‖u_k‖_2 ∝ 1/k after L^{2*} normalization, energies stay put
    for w in d.l2_norms.windows(2) {
        assert!((w[1] / w[0] - 0.5).abs() < 1e-2, "{w:?}");
    }
    for w in d.energy.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 5e-2);
    }
    assert!(d.lq_norms.iter().all(|v| (v - 1.0).abs() < 1e-12));
    assert!(d.ball_radii.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn classification_ignores_positive_rescaling() {
    let n = 3.0;
    let sphere = Arc::new(WeightedGrid::sphere_model(n, 1024).unwrap());
    let cone = Arc::new(WeightedGrid::cone_model(n, 1.0, 1024).unwrap());
    let cases = [
        (sphere.clone(), family(&sphere, 8, |k, t| 1.0 + t.cos() / (k + 1) as f64)),
        (sphere.clone(), family(&sphere, 5, |_, t| 1.0 + 2.0 * t.cos())),
        (cone.clone(), bumps(&cone, n, 2.0, 2.0, 2.0)),
    ];
    for (g, seq) in cases {
        let base = classify_sequence(&g, &seq, critical(n), &Default::default()).unwrap();
        let scaled: Vec<SampledFunction> = seq.iter().enumerate().map(|(k, u)| u.scaled(0.3 + 1.7 * k as f64)).collect();
        let other = classify_sequence(&g, &scaled, critical(n), &Default::default()).unwrap();
        match (&base.classification, &other.classification) {
            (
                Classification::Concentration { location: a, mass_in_shrinking_balls: ma },
                Classification::Concentration { location: b, mass_in_shrinking_balls: mb },
            ) => {
                assert_eq!(a, b);
                assert!((ma - mb).abs() < 1e-12);
            }
            (a, b) => assert_eq!(a, b),
        }
        assert!(!other.warnings.is_empty());
        for (a, b) in base.l2_norms.iter().zip(&other.l2_norms) {
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

#[test]
fn seeded_families_are_never_inconclusive() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut verdicts = Vec::new();
    for i in 0..50 {
        let n = [3.0, 4.0, 6.0][i % 3];
        let sphere = Arc::new(WeightedGrid::sphere_model(n, 1024).unwrap());
        let coef: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let trig = move |t: f64| coef.iter().enumerate().map(|(j, a)| a * ((j + 1) as f64 * t).cos()).sum::<f64>();
        let (expected, seq, grid) = match i % 3 {
            0 => {
                let c0 = rng.random_range(0.5..2.0);
                let alpha = rng.random_range(1.0..2.0);
                let s = rng.random_range(0.2..1.0);
                let seq = family(&sphere, 8, |k, t| c0 + s * trig(t) / ((k + 1) as f64).powf(alpha));
                ("constant", seq, sphere)
            }
            1 => {
                let amp = rng.random_range(0.5..2.0);
                let seq = family(&sphere, 6, |k, t| 1.0 + amp * t.cos() + 0.1 * trig(t) / ((k + 1) * (k + 1)) as f64);
                ("non_constant", seq, sphere)
            }
            _ => {
                let cone = Arc::new(WeightedGrid::cone_model(n, 1.0, 1024).unwrap());
                let seq = bumps(&cone, n, rng.random_range(1.5..3.0), rng.random_range(1.5..3.0), rng.random_range(2.0..3.0));
                ("concentration", seq, cone)
            }
        };
        let c = classify(&grid, &seq, n);
        let got = match c {
            Classification::ConstantLimit => "constant",
            Classification::NonConstantLimit => "non_constant",
            Classification::Concentration { .. } => "concentration",
            Classification::Inconclusive => "inconclusive",
        };
        verdicts.push((i, expected, got));
    }
    let wrong: Vec<_> = verdicts.iter().filter(|(_, e, g)| e != g).collect();
    assert!(wrong.is_empty(), "{wrong:?}");
}

#[test]
fn oscillating_family_is_inconclusive() {
    let sphere = Arc::new(WeightedGrid::sphere_model(3.0, 1024).unwrap());
    let seq = family(&sphere, 8, |k, t| 1.0 + if k % 2 == 0 { t.cos() } else { (2.0 * t).cos() });
    let d = classify_sequence(&sphere, &seq, 6.0, &Default::default()).unwrap();
    assert_eq!(d.classification, Classification::Inconclusive);
    assert_eq!(d.step_distances.len(), 7);
}

#[test]
fn classification_preconditions() {
    let sphere = Arc::new(WeightedGrid::sphere_model(3.0, 64).unwrap());
    let short = family(&sphere, 3, |_, t| t.cos());
    assert!(matches!(classify_sequence(&sphere, &short, 6.0, &Default::default()), Err(Error::Input(_))));
    let zero = family(&sphere, 4, |k, t| if k == 2 { 0.0 } else { t.cos() });
    assert!(matches!(classify_sequence(&sphere, &zero, 6.0, &Default::default()), Err(Error::Input(_))));
    let other = Arc::new(WeightedGrid::sphere_model(3.0, 65).unwrap());
    let mut mixed = family(&sphere, 4, |_, t| t.cos());
    mixed[1] = SampledFunction::from_fn(other, f64::cos).unwrap();
    assert!(classify_sequence(&sphere, &mixed, 6.0, &Default::default()).is_err());
}

/// `u_k = 1 + w_k` with `w_k` a bump of fixed `L^q` norm, narrowing by
/// half and sliding to the right at every step.
fn sliding_bumps(g: &Arc<WeightedGrid>, q: f64) -> Vec<SampledFunction> {
    family(g, 7, |j, t| {
        let k = 4.0 * 2f64.powi(j as i32);
        let c = 0.2 + 0.1 * j as f64;
        1.0 + k.powf(1.0 / q) * (1.0 - (k * (t - c)).powi(2)).max(0.0)
    })
}

#[test]
fn brezis_lieb_on_sliding_bumps() {
    let g = Arc::new(WeightedGrid::uniform(0.0, 1.0, 8193).unwrap());
    for (q, qp) in [(3.0, 1.5), (6.0, 2.0), (2.0, 1.2)] {
        let u = sliding_bumps(&g, q);
        let v = family(&g, 7, |_, _| 1.0);
        let rep = brezis_lieb_check(&g, &u, &v, q, qp).unwrap();
        assert!(rep.monotone && rep.decaying, "q {q}: {:?}", rep.defects);
        assert!(rep.defects[6] < 0.3 * rep.defects[0]);
    }
}

#[test]
fn brezis_lieb_hilbert_case_is_the_cross_term() {
    let g = Arc::new(WeightedGrid::uniform(0.0, 1.0, 8193).unwrap());
    let u = sliding_bumps(&g, 2.0);
    let v = family(&g, 7, |_, _| 1.0);
    let rep = brezis_lieb_check(&g, &u, &v, 2.0, 1.2).unwrap();
    for (k, d) in rep.defects.iter().enumerate() {
        let w: Vec<f64> = u[k].values().iter().map(|x| x - 1.0).collect();
        let cross = 2.0 * SampledFunction::new(g.clone(), w).unwrap().integral();
        assert!((d - cross.abs()).abs() < 1e-12, "{d} vs {cross}");
    }
}

#[test]
fn brezis_lieb_constant_sequences_and_violations() {
    let g = Arc::new(WeightedGrid::sphere_model(3.0, 513).unwrap());
    let same = family(&g, 5, |_, t| 1.0 + 0.5 * t.cos());
    let rep = brezis_lieb_check(&g, &same, &same, 3.0, 2.0).unwrap();
    assert!(rep.defects.iter().all(|d| *d == 0.0));
    assert!(rep.decaying);
    let drifting = family(&g, 5, |k, t| 1.0 + (k as f64) * t.cos());
    assert!(matches!(brezis_lieb_check(&g, &same, &drifting, 3.0, 2.0), Err(Error::Input(_))));
    assert!(matches!(brezis_lieb_check(&g, &drifting, &same, 3.0, 2.0), Err(Error::Input(_))));
    assert!(matches!(brezis_lieb_check(&g, &same, &same, 3.0, 3.0), Err(Error::Domain(_))));
}

#[test]
fn density_bound_examples() {
    let e = eucl_constant(3.0, 2.0).unwrap();
    let tip = concentration_density_bound(Extended::Finite(1.0), e * e, 3.0, 2.0).unwrap();
    assert!(tip.passed);
    assert!((tip.bound.finite().unwrap() - 1.0).abs() < 1e-12);
    assert!(!concentration_density_bound(Extended::Infinite, 0.1, 3.0, 2.0).unwrap().passed);
    for n in [3.0, 4.0, 7.0] {
        let theta = 1.0 / unit_sphere_volume(n + 1.0).unwrap();
        let a = (critical(n) - 2.0) / n;
        let rep = concentration_density_bound(Extended::Finite(theta), a, n, 2.0).unwrap();
        assert!(rep.passed);
        assert!((rep.bound.finite().unwrap() / theta - 1.0).abs() < 1e-10);
    }
}
