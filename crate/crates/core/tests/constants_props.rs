use proptest::prelude::*;
use soblab_core::constants::{
    comparison_volume, distortion_sigma, distortion_tau, eucl_constant, eucl_constant_2,
    unit_ball_volume,
};
use soblab_core::Extended;

proptest! {
    #[test]
    fn flat_sigma_is_linear(t in 0.0f64..=1.0, n in 0.0f64..20.0, theta in 0.0f64..50.0) {
        prop_assert_eq!(distortion_sigma(t, 0.0, n, theta), Extended::Finite(t));
    }

    #[test]
    fn one_dimensional_tau_nonpositive_curvature(t in 0.0f64..=1.0, k in -10.0f64..=0.0, theta in 0.0f64..10.0) {
        prop_assert_eq!(distortion_tau(t, k, 1.0, theta), Extended::Finite(t));
    }

    #[test]
    fn sigma_continuous_at_zero_curvature(t in 0.0f64..=1.0, n in 1.0f64..10.0, theta in 0.0f64..3.0) {
        let lo = distortion_sigma(t, -1e-6, n, theta).finite().unwrap();
        let mid = distortion_sigma(t, 0.0, n, theta).finite().unwrap();
        let hi = distortion_sigma(t, 1e-6, n, theta).finite().unwrap();
        prop_assert!((lo - mid).abs() < 1e-6);
        prop_assert!((hi - mid).abs() < 1e-6);
    }

    #[test]
    fn eucl_closure(n in 2.05f64..30.0) {
        let a = eucl_constant(n, 2.0).unwrap();
        let b = eucl_constant_2(n).unwrap();
        prop_assert!(((a - b) / b).abs() < 1e-12);
    }

    #[test]
    fn comparison_volume_is_euclidean_at_small_radius(k in -5.0f64..5.0, n in 1.5f64..8.0) {
        let mut prev = f64::INFINITY;
        for r in [1e-2, 1e-3, 1e-4] {
            let dev = (comparison_volume(k, n, r).unwrap() / (unit_ball_volume(n).unwrap() * r.powf(n)) - 1.0).abs();
            // deviation is O(K r^2); allow for rounding once it reaches ~1e-13
            prop_assert!(dev <= prev || dev < 1e-12, "r = {r}: {dev} after {prev}");
            prev = dev;
        }
        prop_assert!(prev < 1e-7);
    }
}
