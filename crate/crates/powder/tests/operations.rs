use std::f64::consts::FRAC_PI_2;

use nvdnp_powder::*;
use nvdnp_spin::{resonance_fields, NvSystem, GAMMA_NV};

const D: f64 = 2869.0;
const NU: f64 = 9600.0;

fn sys() -> NvSystem {
    NvSystem::with_d(D).unwrap()
}

fn reference_request(n_points: usize) -> SpectrumRequest {
    let mut req = SpectrumRequest::field_swept(NU, 230.0, 460.0, n_points);
    req.n_theta = 360;
    req.n_phi = 6;
    req.n_strain = 5;
    req
}

#[test]
fn orientation_grid_basics() {
    let one = orientation_grid(1, 1);
    assert_eq!(one.len(), 1);
    assert!((one[0].weight - 1.0).abs() < 1e-15);
    for (nt, np) in [(1, 7), (13, 1), (50, 9)] {
        let s: f64 = orientation_grid(nt, np).iter().map(|o| o.weight).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
    // solid-angle mean of the second Legendre polynomial vanishes
    let mut prev = f64::MAX;
    for nt in [10, 20, 40, 80] {
        let m: f64 = orientation_grid(nt, 1).iter().map(|o| o.weight * (3.0 * o.theta.cos().powi(2) - 1.0)).sum();
        assert!(m.abs() < 2.0 / (nt * nt) as f64, "n {nt}: {m}");
        assert!(m.abs() < prev);
        prev = m.abs();
    }
}

#[test]
fn thermal_pake_doublet() {
    // 0.5 mT axis: broadened maxima sit about 0.2 mT inside the doublet edges
    let mut req = reference_request(461);
    req.n_theta = 720;
    req.n_phi = 8;
    req.n_strain = 7;
    let sp = simulate_spectrum(&sys(), &req, &BroadeningModel::lorentzian(0.4, 21.0)).unwrap();
    let (b12, b23) = resonance_fields(NU, D, GAMMA_NV).unwrap();
    let step = sp.step();
    let p1 = sp.argmax_in(260.0, 320.0).unwrap();
    let p2 = sp.argmax_in(360.0, 420.0).unwrap();
    assert!((p1 - b12).abs() <= step + 1e-9, "{p1} vs {b12}");
    assert!((p2 - b23).abs() <= step + 1e-9, "{p2} vs {b23}");
    assert!(sp.intensity.iter().all(|y| *y >= 0.0));
    // the two maxima dominate the spectrum
    let top = sp.intensity.iter().cloned().fold(f64::MIN, f64::max);
    let mid = sp.intensity[sp.axis.iter().position(|x| *x >= 340.0).unwrap()];
    assert!(mid < 0.5 * top);
}

#[test]
fn pumped_spectrum_changes_sign_near_free_electron_field() {
    let mut req = reference_request(576);
    req.p_nv = 0.3;
    let sp = simulate_spectrum(&sys(), &req, &BroadeningModel::lorentzian(0.4, 21.0)).unwrap();
    let (b12, b23) = resonance_fields(NU, D, GAMMA_NV).unwrap();
    let g2 = NU / GAMMA_NV;
    let inside: Vec<f64> = sp.zero_crossings().into_iter().filter(|x| *x > b12 && *x < b23).collect();
    assert_eq!(inside.len(), 1, "{inside:?}");
    assert!((inside[0] - g2).abs() < 0.02 * g2, "{} vs {g2}", inside[0]);
    let at = |b: f64| sp.intensity[sp.axis.iter().position(|x| *x >= b).unwrap()];
    assert!(at(b12) > 0.0 && at(b23) < 0.0);
}

#[test]
fn single_perpendicular_orientation_gives_delta_lines() {
    let grid = [Orientation { theta: FRAC_PI_2, phi: 0.0, weight: 1.0 }];
    let mut req = SpectrumRequest::field_swept(NU, 250.0, 420.0, 1701);
    req.n_strain = 1;
    let sp = simulate_spectrum_on(&sys(), &req, &BroadeningModel::none(), &grid).unwrap();
    let (b12, b23) = resonance_fields(NU, D, GAMMA_NV).unwrap();
    let hits: Vec<f64> = sp.axis.iter().zip(&sp.intensity).filter(|(_, y)| **y != 0.0).map(|(x, _)| *x).collect();
    assert_eq!(hits.len(), 2, "{hits:?}");
    assert!((hits[0] - b12).abs() <= 0.5 * sp.step() + 1e-9);
    assert!((hits[1] - b23).abs() <= 0.5 * sp.step() + 1e-9);
}

#[test]
fn peaks_converge_as_broadening_vanishes() {
    let (b12, b23) = resonance_fields(NU, D, GAMMA_NV).unwrap();
    let mut req = SpectrumRequest::field_swept(NU, 270.0, 410.0, 1401);
    req.n_theta = 2000;
    req.n_phi = 1;
    req.n_strain = 1;
    let sp = simulate_spectrum(&sys(), &req, &BroadeningModel::lorentzian(0.02, 0.0)).unwrap();
    let step = sp.step();
    assert!((sp.argmax_in(270.0, 320.0).unwrap() - b12).abs() <= step + 1e-9);
    assert!((sp.argmax_in(360.0, 410.0).unwrap() - b23).abs() <= step + 1e-9);
}

#[test]
fn integral_stable_under_refinement() {
    let br = BroadeningModel::lorentzian(0.4, 21.0);
    let a = simulate_spectrum(&sys(), &reference_request(401), &br).unwrap().integral();
    let b = simulate_spectrum(&sys(), &reference_request(801), &br).unwrap().integral();
    assert!(((a - b) / b).abs() < 0.01, "{a} {b}");
}

#[test]
fn affine_in_pumping() {
    let br = BroadeningModel::lorentzian(0.4, 21.0);
    let mut req = reference_request(300);
    req.n_theta = 120;
    let run = |p: f64| {
        let mut r = req;
        r.p_nv = p;
        simulate_spectrum(&sys(), &r, &br).unwrap().intensity
    };
    let (s0, s1, sm) = (run(0.0), run(1.0), run(0.37));
    let scale = s1.iter().map(|x| x.abs()).fold(0.0, f64::max);
    for k in 0..s0.len() {
        let lin = 0.63 * s0[k] + 0.37 * s1[k];
        assert!((sm[k] - lin).abs() < 1e-10 * scale);
    }
}

#[test]
fn deterministic_including_stochastic_strain() {
    let br = BroadeningModel::lorentzian(0.4, 21.0);
    let mut req = reference_request(200);
    req.n_theta = 60;
    req.sampling = StrainSampling::MonteCarlo;
    req.n_strain = 16;
    req.seed = 11;
    let a = simulate_spectrum(&sys(), &req, &br).unwrap();
    let b = simulate_spectrum(&sys(), &req, &br).unwrap();
    assert_eq!(a.intensity.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.intensity.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = one.install(|| simulate_spectrum(&sys(), &req, &br).unwrap());
    assert_eq!(a, c);
    req.seed = 12;
    let d = simulate_spectrum(&sys(), &req, &br).unwrap();
    assert_ne!(a.intensity, d.intensity);
}

#[test]
fn skipped_transitions_are_counted() {
    let mut req = SpectrumRequest::field_swept(NU, 500.0, 600.0, 101);
    req.n_theta = 10;
    req.n_phi = 1;
    req.n_strain = 1;
    let sp = simulate_spectrum(&sys(), &req, &BroadeningModel::none()).unwrap();
    assert_eq!(sp.meta.lines, 0);
    assert_eq!(sp.meta.skipped, 30);
    assert!(sp.intensity.iter().all(|y| *y == 0.0));
}

#[test]
fn request_validation() {
    let mut req = reference_request(100);
    req.axis_max = 100.0;
    assert!(simulate_spectrum(&sys(), &req, &BroadeningModel::none()).is_err());
    let mut req = reference_request(1);
    assert!(simulate_spectrum(&sys(), &req, &BroadeningModel::none()).is_err());
    req = reference_request(10);
    req.n_theta = 0;
    assert!(simulate_spectrum(&sys(), &req, &BroadeningModel::none()).is_err());
}

#[test]
fn csv_export() {
    let mut req = reference_request(3);
    req.n_theta = 4;
    let sp = simulate_spectrum(&sys(), &req, &BroadeningModel::lorentzian(0.4, 0.0)).unwrap();
    let csv = sp.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("axis,intensity"));
    assert_eq!(lines.next().unwrap().split(',').next(), Some("230"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn zero_field_distribution_is_one_line() {
    let req = FreqDistRequest { n_theta: 20, n_phi: 3, ..FreqDistRequest::new(2800.0, 2940.0, 141) };
    let sp = frequency_distribution(&sys(), 0.0, &BroadeningModel::none(), &req).unwrap();
    let hits: Vec<f64> = sp.axis.iter().zip(&sp.intensity).filter(|(_, y)| **y > 0.0).map(|(x, _)| *x).collect();
    assert_eq!(hits, vec![D]);
}

#[test]
fn distribution_support_at_290_mt() {
    let gb = GAMMA_NV * 290.0;
    let req = FreqDistRequest::new(4000.0, 12000.0, 801);
    let sp = frequency_distribution(&sys(), 290.0, &BroadeningModel::none(), &req).unwrap();
    let (lo, hi) = (gb - D, D + gb);
    let total: f64 = sp.intensity.iter().sum();
    let mut near_lo = 0.0;
    let mut near_hi = 0.0;
    for (x, y) in sp.axis.iter().zip(&sp.intensity) {
        if *y > 0.0 {
            assert!(*x >= lo - sp.step() && *x <= hi + sp.step(), "{x} outside [{lo}, {hi}]");
        }
        if (*x - lo).abs() < 150.0 {
            near_lo += y;
        }
        if (*x - hi).abs() < 150.0 {
            near_hi += y;
        }
    }
    assert!(near_lo > 0.0 && near_hi > 0.0);
    assert!(total > 0.0);
}

#[test]
fn distribution_at_15_mt_has_two_bands() {
    let gb = GAMMA_NV * 15.0;
    let req = FreqDistRequest::new(2200.0, 3540.0, 671);
    let sp = frequency_distribution(&sys(), 15.0, &BroadeningModel::none(), &req).unwrap();
    let total: f64 = sp.intensity.iter().sum();
    let below: f64 = sp.axis.iter().zip(&sp.intensity).filter(|(x, _)| **x < D - 20.0).map(|(_, y)| y).sum();
    let above: f64 = sp.axis.iter().zip(&sp.intensity).filter(|(x, _)| **x > D + 20.0).map(|(_, y)| y).sum();
    assert!(below > 0.25 * total && above > 0.25 * total, "{below} {above} {total}");
    for (x, y) in sp.axis.iter().zip(&sp.intensity) {
        if *y > 0.0 {
            assert!((x - D).abs() <= gb + 10.0);
        }
    }
}

#[test]
fn unbroadened_fraction_is_the_tilt_window() {
    let s = sys();
    let c = default_carrier(&s, 287.0, 15.0);
    let grid = FractionGrid { n_theta: 20000, n_phi: 1, n_strain: 1 };
    let f = bandwidth_fraction(&s, c, 287.0, 15.0, &BroadeningModel::none(), &grid).unwrap();
    assert!((f.s1s2 - 0.0608).abs() < 0.001, "{}", f.s1s2);
    let dm = nvdnp_spin::tilt_acceptance(15.0, D, 287.0, GAMMA_NV).unwrap();
    assert!((f.s1s2 - dm.sin()).abs() < 0.001);
    let tiny = bandwidth_fraction(&s, c + 7.5, 287.0, 1e-6, &BroadeningModel::none(), &grid).unwrap();
    assert!(tiny.s1s2 < 1e-4);
}

#[test]
fn broadened_fraction_is_bounded_and_monotone() {
    let s = sys();
    let br = BroadeningModel::lorentzian(0.4, 21.0);
    let grid = FractionGrid { n_theta: 1000, n_phi: 8, n_strain: 7 };
    let c = default_carrier(&s, 287.0, 15.0);
    let mut prev = 0.0;
    for w in [1.0, 5.0, 15.0, 30.0, 60.0] {
        let f = bandwidth_fraction(&s, c, 287.0, w, &br, &grid).unwrap();
        assert!(f.s1s2 >= prev);
        assert!(f.s1s2 <= 1.0 && f.s2s3 >= 0.0);
        prev = f.s1s2;
    }
    assert!(bandwidth_fraction(&s, c, 287.0, 0.0, &br, &grid).is_err());
}

#[test]
fn carrier_search_beats_the_default() {
    let s = sys();
    let br = BroadeningModel::lorentzian(0.4, 21.0);
    let grid = FractionGrid { n_theta: 800, n_phi: 6, n_strain: 5 };
    let c = default_carrier(&s, 287.0, 15.0);
    let base = bandwidth_fraction(&s, c, 287.0, 15.0, &br, &grid).unwrap();
    let (best_c, best) = optimize_carrier(&s, 287.0, 15.0, &br, &grid, c - 20.0, c + 10.0, 7).unwrap();
    assert!(best.s1s2 >= base.s1s2);
    assert!(best_c >= c - 20.0 && best_c <= c + 10.0);
}

fn synthetic_peaks(rate: f64, powers: &[f64]) -> Vec<(f64, f64)> {
    powers
        .iter()
        .map(|&p| {
            let d = D + nvdnp_spin::DD_DT * rate * p;
            (p, resonance_fields(NU, d, GAMMA_NV).unwrap().0)
        })
        .collect()
}

#[test]
fn heating_round_trip() {
    for rate in [0.122, 0.058] {
        let fit = heating_analysis(&synthetic_peaks(rate, &[0.0, 100.0, 250.0, 420.0]), NU, GAMMA_NV).unwrap();
        assert!((fit.rate - rate).abs() < 1e-3, "{}", fit.rate);
        assert!((fit.d0 - D).abs() < 1e-6);
    }
    let fit = heating_analysis(&synthetic_peaks(0.122, &[50.0, 420.0]), NU, GAMMA_NV).unwrap();
    assert!((fit.delta_t_at(420.0) - 51.0).abs() < 1.0);
    let fit = heating_analysis(&synthetic_peaks(0.058, &[50.0, 420.0]), NU, GAMMA_NV).unwrap();
    assert!((fit.delta_t_at(420.0) - 24.0).abs() < 0.5);
    assert!(matches!(heating_analysis(&[(10.0, 287.0), (10.0, 287.1)], NU, GAMMA_NV), Err(PowderError::Degenerate(_))));
    assert!(heating_analysis(&[(10.0, 287.0)], NU, GAMMA_NV).is_err());
}
