use nvdnp_analysis::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_is_scale_equivariant(k in 0.01..100.0f64, tc in 5.0..80.0f64, beta in 0.5..1.5f64) {
        let t: Vec<f64> = (1..30).map(|i| i as f64 * 5.0).collect();
        // deterministic ripple so the fit has a non-zero residual
        let y: Vec<f64> = t.iter().enumerate()
            .map(|(i, x)| 1.0 - (-(x / tc).powf(beta)).exp() + 0.01 * ((i * 7 % 5) as f64 - 2.0))
            .collect();
        let ys: Vec<f64> = y.iter().map(|v| k * v).collect();
        let a = fit_stretched_exp(&TimeSeries::new(t.clone(), y, None).unwrap(), FitMode::Saturation).unwrap();
        let b = fit_stretched_exp(&TimeSeries::new(t, ys, None).unwrap(), FitMode::Saturation).unwrap();
        prop_assert!((b.get("A").unwrap() / (k * a.get("A").unwrap()) - 1.0).abs() < 1e-6);
        prop_assert!((b.get("T").unwrap() / a.get("T").unwrap() - 1.0).abs() < 1e-6);
        prop_assert!((b.get("beta").unwrap() - a.get("beta").unwrap()).abs() < 1e-6);
    }

    #[test]
    fn signal_model_round_trip(p in 1e-7..1e-2f64, g in 1e-4..1.0f64, s_ref in 0.1..10.0f64, pth in 1e-8..1e-5f64) {
        // forward: thermal-referenced signal of a sample at polarization p
        let s_hp = p / pth * g * s_ref;
        let back = absolute_polarization(s_hp, s_ref, g, pth).unwrap();
        prop_assert!((back - p).abs() <= 1e-10 * p);
        let e = enhancement(back, pth).unwrap();
        prop_assert!((e * pth - p).abs() <= 1e-10 * p);
    }

    #[test]
    fn gamma_ref_homogeneity(m1 in 0.1..100.0f64, m2 in 0.1..100.0f64, k in 0.1..10.0f64) {
        let d = SampleSpec::diamond_13c(m1);
        let r = SampleSpec::water_1h(m2);
        let g = gamma_ref(&d, &r).unwrap();
        let gd = gamma_ref(&SampleSpec::diamond_13c(k * m1), &r).unwrap();
        let gr = gamma_ref(&d, &SampleSpec::water_1h(k * m2)).unwrap();
        prop_assert!((gd / g - k).abs() < 1e-12 * k);
        prop_assert!((gr * k / g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn estimator_power_laws(x in 1e-3..1e3f64, y in 1e-3..1e3f64) {
        let l = diffusion_length(x * 1e-15, y).unwrap();
        prop_assert!((diffusion_length(2.0 * x * 1e-15, 2.0 * y).unwrap() / l - 2.0).abs() < 1e-12);
        let r = nn_distance(x, DIAMOND_DENSITY).unwrap();
        prop_assert!((nn_distance(8.0 * x, DIAMOND_DENSITY).unwrap() * 2.0 / r - 1.0).abs() < 1e-12);
        let t = tumbling(x, y, 293.0, 0.05, 1.0).unwrap();
        let t2 = tumbling(2.0 * x, y, 293.0, 0.05, 1.0).unwrap();
        prop_assert!((t.d_r / t2.d_r - 8.0).abs() < 1e-9);
        let p = thermal_polarization(x, 293.0, 10.705).unwrap();
        prop_assert!((thermal_polarization(2.0 * x, 586.0, 10.705).unwrap() / p - 1.0).abs() < 1e-12);
    }
}
