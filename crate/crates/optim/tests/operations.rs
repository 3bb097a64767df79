use std::f64::consts::PI;

use nvdnp_optim::*;

const OM: f64 = 10.5;
const TWO_SIDEBANDS: [f64; 5] = [0.187, 0.251, 0.408, 0.253, 0.721];

/// τ/4 at n = 4.5 for ¹³C, in π times at Ω = 10.5 MHz.
fn pulsepol_cap() -> f64 {
    (4.5 / (2.0 * 3.072)) / 4.0 * 2.0 * OM
}

/// Rectangular-pulse fidelity from the Rabi formula, with the threshold
/// crossing found by bisection.
fn rabi_half_width(threshold: f64) -> f64 {
    let f = |d: f64| {
        let w2 = OM * OM + d * d;
        OM * OM / w2 * (PI * w2.sqrt() / (2.0 * OM)).sin().powi(2)
    };
    let (mut lo, mut hi) = (0.0, OM);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= threshold {
            lo = mid
        } else {
            hi = mid
        }
    }
    lo
}

#[test]
fn accounting_examples() {
    assert_eq!(accounting(&[0.5]), (1.0, 1.0));
    assert_eq!(accounting(&[0.0, 0.0, 0.0, 0.0, 0.5]), (1.0, 1.0));
    let (d, p) = accounting(&TWO_SIDEBANDS);
    assert!((d - 3.64).abs() < 1e-12);
    assert!((p - 2.632).abs() < 1e-12);
}

#[test]
fn rectangular_band_matches_rabi_oracle() {
    let grid = default_grid(OM, 2001, 1.5);
    for thr in [0.9, 0.97, 0.99] {
        let bw = objective(&[0.5], OM, thr, &grid).unwrap();
        let want = rabi_half_width(thr);
        assert!((bw - want).abs() < 2e-3 * OM, "thr {thr}: {bw} vs {want}");
    }
    // narrow compared with Ω at the default threshold
    assert!(objective(&[0.5], OM, 0.99, &default_grid(OM, 81, 1.5)).unwrap() < 0.2 * OM);
}

#[test]
fn reference_pulse_band_at_matched_threshold() {
    let grid = default_grid(OM, 81, 1.5);
    let c = evaluate(&TWO_SIDEBANDS, OM, 0.97, &grid).unwrap();
    assert!((c.bandwidth / OM - 0.7).abs() < 0.07, "{}", c.bandwidth / OM);
    assert!(c.min_fidelity_in_band >= 0.97);
}

#[test]
fn unit_threshold_gives_zero_band() {
    let grid = default_grid(OM, 81, 1.5);
    assert!(objective(&[0.5], OM, 1.0, &grid).unwrap() < 1e-9);
    assert!(objective(&TWO_SIDEBANDS, OM, 1.0, &grid).unwrap() < 1e-9);
}

#[test]
fn rejects_bad_grids_and_configs() {
    assert!(objective(&[0.5], OM, 0.9, &[-1.0, 0.0, 2.0]).is_err());
    assert!(objective(&[0.5], OM, 0.9, &[]).is_err());
    assert!(objective(&[0.5, 0.1], OM, 0.9, &[0.0]).is_err());
    let mut cfg = OptimizerConfig::new(1, OM);
    cfg.budget = 0;
    assert!(optimize(&cfg, OM).is_err());
    let mut cfg = OptimizerConfig::new(1, OM);
    cfg.fidelity_threshold = 1.0;
    assert!(optimize(&cfg, OM).is_err());
}

#[test]
fn no_sidebands_converges_to_rectangular() {
    let cfg = OptimizerConfig { restarts: 4, ..OptimizerConfig::new(0, OM) };
    let r = optimize(&cfg, OM).unwrap();
    assert!(r.feasible);
    assert!((r.best.a_list[0] - 0.5).abs() < 0.01, "{:?}", r.best.a_list);
}

fn run(n: usize, seed: u64) -> OptimResult {
    run_from(n, seed, Vec::new())
}

fn run_from(n: usize, seed: u64, warm_starts: Vec<Vec<f64>>) -> OptimResult {
    let cfg = OptimizerConfig {
        fidelity_threshold: 0.97,
        max_duration: Some(pulsepol_cap()),
        seed,
        warm_starts,
        ..OptimizerConfig::new(n, OM)
    };
    optimize(&cfg, OM).unwrap()
}

#[test]
fn two_sidebands_match_reference_pulse() {
    let grid = default_grid(OM, 81, 1.5);
    let reference = objective(&TWO_SIDEBANDS, OM, 0.97, &grid).unwrap();
    let r = run(2, 7);
    assert!(r.feasible);
    assert_eq!(r.best.a_list.len(), 5);
    assert!(r.best.a_list.iter().all(|a| (0.0..=A_MAX).contains(a)));
    assert!(accounting(&r.best.a_list).0 <= pulsepol_cap() + 1e-9);
    let ratio = r.best.bandwidth / reference;
    assert!((ratio - 1.0).abs() <= 0.10, "{} vs {reference}", r.best.bandwidth);
    for (s0, s) in &r.restarts {
        assert!(s >= s0);
    }
}

#[test]
fn more_sidebands_do_not_narrow_the_band() {
    let two = run(2, 7);
    let cold = run(5, 7);
    eprintln!("five sidebands from random starts: {}", cold.best.bandwidth / OM);
    let five = run_from(5, 7, vec![two.best.a_list.clone()]);
    assert!(five.best.bandwidth >= two.best.bandwidth - 1e-9, "{} < {}", five.best.bandwidth, two.best.bandwidth);
}

#[test]
fn same_seed_same_answer() {
    let a = run(1, 3);
    let b = run(1, 3);
    assert_eq!(a.best.a_list, b.best.a_list);
    assert_eq!(a.best.bandwidth, b.best.bandwidth);
}

#[test]
fn candidate_csv_layout() {
    let c = evaluate(&TWO_SIDEBANDS, OM, 0.97, &default_grid(OM, 81, 1.5)).unwrap();
    assert_eq!(c.csv_header(), "a_4,a_3,a_2,a_1,a_0,bandwidth,duration,power");
    let row = c.csv_row();
    assert_eq!(row.split(',').count(), 8);
    assert!(row.starts_with("0.187000,0.251000"));
}

#[test]
fn simplex_finds_quadratic_minimum() {
    let r = nelder_mead(|x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.1).powi(2), &[0.0, 0.0], 0.1, 2000);
    assert!((r.x[0] - 0.3).abs() < 1e-4 && (r.x[1] + 0.1).abs() < 1e-4, "{:?}", r.x);
}
