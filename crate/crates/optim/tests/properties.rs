use nvdnp_optim::*;
use proptest::prelude::*;

fn a_list() -> impl Strategy<Value = Vec<f64>> {
    (0usize..4)
        .prop_flat_map(|n| prop::collection::vec(0.0..1.2f64, 2 * n + 1))
        .prop_filter("non-empty", |a| a.iter().sum::<f64>() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duration_covers_power(a in a_list()) {
        let (d, p) = accounting(&a);
        prop_assert!(d >= p - 1e-12);
        prop_assert!(p >= 0.0);
    }

    #[test]
    fn reflected_grid_scores_the_same(a in a_list(), thr in 0.5..0.999f64) {
        let grid = default_grid(10.0, 41, 1.5);
        let flipped: Vec<f64> = grid.iter().rev().map(|d| -d).collect();
        let x = objective(&a, 10.0, thr, &grid).unwrap();
        let y = objective(&a, 10.0, thr, &flipped).unwrap();
        prop_assert!((x - y).abs() < 1e-12);
        prop_assert!(x >= 0.0);
    }

    #[test]
    fn stricter_threshold_never_widens(a in a_list(), t1 in 0.5..0.99f64, dt in 0.0..0.05f64) {
        let grid = default_grid(10.0, 41, 1.5);
        let loose = objective(&a, 10.0, t1, &grid).unwrap();
        let strict = objective(&a, 10.0, (t1 + dt).min(0.9999), &grid).unwrap();
        prop_assert!(strict <= loose + 1e-9);
    }
}
