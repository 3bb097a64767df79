use std::f64::consts::PI;

use nvdnp_pulse::*;
use nvdnp_spin::NvSystem;

const F_C13: f64 = 3.072;
const TWO_SIDEBANDS: [f64; 5] = [0.187, 0.251, 0.408, 0.253, 0.721];

fn n14_model() -> SpinModel {
    SpinModel::FullN14 {
        sys: NvSystem::with_d(2869.0).unwrap(),
        b: 287.0,
        theta: PI / 2.0,
        omega_i: F_C13,
        params: N14Params::default(),
    }
}

#[test]
fn rectangular_inversion_matches_rabi_formula() {
    let om = 12.0;
    let ds: Vec<f64> = (-40..=40).map(|k| k as f64 * 0.75).collect();
    let sz = inversion_profile(&PulseShape::rectangular(), om, &ds).unwrap();
    for (d, s) in ds.iter().zip(&sz) {
        let w = (om * om + d * d).sqrt();
        let p = om * om / (w * w) * (PI * w / (2.0 * om)).sin().powi(2);
        assert!((s - (1.0 - 2.0 * p)).abs() < 1e-12, "d {d}: {s}");
    }
    assert!((sz[40] + 1.0).abs() < 1e-12);
}

#[test]
fn composite_pulse_is_a_pi_pulse_on_resonance() {
    let p = PulseShape::phase_alternating(TWO_SIDEBANDS.to_vec()).unwrap();
    let sz = inversion_profile(&p, 10.0, &[0.0]).unwrap();
    assert!(sz[0] < -0.99, "{}", sz[0]);
}

#[test]
fn composite_expansion_layout() {
    let p = PulseShape::phase_alternating(TWO_SIDEBANDS.to_vec()).unwrap();
    let full = p.full(0.3);
    assert_eq!(full.len(), 10);
    let total: f64 = full.iter().map(|s| s.0).sum();
    assert!((total - p.duration_units()).abs() < 1e-12);
    // a_4 keeps the phase, a_3 and a_1 are gaps, a_2 is flipped
    assert_eq!(full[0].1, Some(0.3));
    assert_eq!(full[1].1, None);
    assert_eq!(full[2].1, Some(0.3 + PI));
    assert_eq!(full[3].1, None);
    let open = p.opening_half(0.3);
    assert_eq!(open[0].0, 0.721);
    let close = p.closing_half(0.3);
    assert_eq!(close.last().unwrap().0, 0.721);
    assert!((p.duration_units() - 3.64).abs() < 1e-12);
    assert!((p.power_units() - 2.632).abs() < 1e-12);
    assert!(PulseShape::phase_alternating(vec![0.1, 0.2]).is_err());
    assert!(PulseShape::phase_alternating(vec![0.1, -0.2, 0.3]).is_err());
}

#[test]
fn block_timing_and_constraint() {
    let spec = SequenceSpec::new(Variant::PhaseOffset, 4.5, 20, 10.5);
    let seq = build_sequence(&spec, F_C13).unwrap();
    let tau = resonance_tau(4.5, F_C13).unwrap();
    assert!((seq.tau - tau).abs() < 1e-15);
    let sum: f64 = seq.block.iter().map(|s| s.duration).sum();
    assert!((sum - tau).abs() < 1e-12, "{sum} vs {tau}");
    assert!((seq.total_time() - 20.0 * tau).abs() < 1e-12);
    let phases: Vec<f64> = seq.block.iter().filter_map(|s| s.phase).collect();
    let phi = 0.75 * PI;
    let want = [PI / 2.0, PI, PI / 2.0, phi - PI / 2.0, phi, phi - PI / 2.0];
    assert_eq!(phases.len(), 6);
    for (a, b) in phases.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    // 1 µs π pulse cannot fit a quarter of a 0.16 µs block
    let bad = SequenceSpec::new(Variant::Standard, 1.0, 1, 0.5);
    assert!(matches!(build_sequence(&bad, F_C13), Err(PulseError::PulseTooLong { .. })));
}

#[test]
fn mixed_state_traces_stay_unit() {
    for model in [SpinModel::reduced(0.08, F_C13), n14_model()] {
        let spec = SequenceSpec::new(Variant::Standard, 3.0, 30, 10.5);
        let r = propagate(&model, &spec, &initial_state(&model)).unwrap();
        assert!(r.trace_error < 1e-12);
        assert!((r.nv_polarization[0] - 1.0).abs() < 1e-14);
        assert!(r.nuclear_polarization[0].abs() < 1e-14);
        let rho = &r.final_state;
        assert!((rho - rho.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn rejects_invalid_states() {
    let model = SpinModel::reduced(0.08, F_C13);
    let spec = SequenceSpec::new(Variant::Standard, 3.0, 5, 100.0);
    let two = initial_state(&model) * num_complex::Complex64::new(2.0, 0.0);
    assert!(propagate(&model, &spec, &two).is_err());
    assert!(propagate(&model, &spec, &initial_state(&n14_model())).is_err());
}

/// Scan n from 0.3 to 8 in steps of 0.02 and locate the deepest dip within
/// ±0.25 of each expected order.
fn check_dips(variant: Variant, orders: &[f64]) {
    let model = SpinModel::reduced(0.08, F_C13);
    let spec = SequenceSpec::new(variant, 1.0, 20, 100.0);
    let t = |n: f64| resonance_tau(n, F_C13).unwrap();
    let n_points = 386;
    let pts = scan_tau(&model, &spec, t(0.3), t(8.0), n_points).unwrap();
    let step = (t(8.0) - t(0.3)) / (n_points - 1) as f64;
    for &n in orders {
        let x = deepest_dip(&pts, t(n - 0.25), t(n + 0.25)).unwrap();
        assert!((x - t(n)).abs() <= step, "n {n}: dip at {x}, expected {}", t(n));
    }
    // well away from every order the NV keeps its polarization
    let far = pts.iter().filter(|p| {
        let nn = 2.0 * F_C13 * p.x;
        (1.5..=2.3).contains(&nn) || (5.7..=6.7).contains(&nn)
    });
    for p in far {
        assert!(p.nv_polarization > 0.99, "{p:?}");
    }
}

#[test]
fn standard_resonances_at_odd_orders() {
    let orders = Variant::Standard.resonances(8.0);
    assert_eq!(orders, vec![1.0, 3.0, 5.0, 7.0]);
    check_dips(Variant::Standard, &orders);
}

#[test]
fn phase_offset_resonances() {
    let orders = Variant::PhaseOffset.resonances(8.0);
    assert_eq!(orders, vec![0.5, 3.5, 4.5, 7.5]);
    check_dips(Variant::PhaseOffset, &orders);
}

#[test]
fn phase_offset_orders_3_5_and_4_5_dominate() {
    let model = SpinModel::reduced(0.08, F_C13);
    let depth = |n: f64| {
        let spec = SequenceSpec::new(Variant::PhaseOffset, n, 20, 100.0);
        1.0 - propagate(&model, &spec, &initial_state(&model)).unwrap().final_nv()
    };
    let (weak, strong) = (depth(0.5).max(depth(7.5)), depth(3.5).min(depth(4.5)));
    assert!(strong > 10.0 * weak, "{strong} vs {weak}");
}

#[test]
fn flip_flop_bookkeeping() {
    let model = SpinModel::reduced(0.005, F_C13);
    for (v, n) in [(Variant::Standard, 3.0), (Variant::PhaseOffset, 4.5)] {
        let spec = SequenceSpec::new(v, n, 20, 100.0);
        let r = propagate(&model, &spec, &initial_state(&model)).unwrap();
        let (loss, gain) = (1.0 - r.final_nv(), r.final_nuclear().abs());
        assert!(loss > 1e-3);
        assert!((loss - gain).abs() < 0.05 * loss, "{loss} vs {gain}");
    }
}

#[test]
fn nitrogen_mixing_spoils_the_low_order() {
    let model = n14_model();
    let loss = |n: f64| {
        let spec = SequenceSpec::new(Variant::PhaseOffset, n, 20, 10.5);
        1.0 - propagate(&model, &spec, &initial_state(&model)).unwrap().final_nv()
    };
    let (l35, l45) = (loss(3.5), loss(4.5));
    assert!((l35 - 0.271).abs() < 0.01, "{l35}");
    assert!((l45 - 0.160).abs() < 0.01, "{l45}");
}

#[test]
fn composite_pulses_widen_transfer() {
    let model = SpinModel::reduced(0.02, F_C13);
    let width = |pulse: PulseShape, om: f64| {
        let mut spec = SequenceSpec::new(Variant::PhaseOffset, 4.5, 20, om);
        spec.pulse = pulse;
        let bw = transfer_bandwidth(&model, &spec, 0.5, 1.5 * om, 61).unwrap();
        assert!(bw.bounded);
        assert!(bw.lower < 0.0 && bw.upper > 0.0);
        bw.width / om
    };
    let comp = width(PulseShape::phase_alternating(TWO_SIDEBANDS.to_vec()).unwrap(), 10.5);
    let rect = width(PulseShape::rectangular(), 10.5);
    assert!((comp - 1.4).abs() < 0.14, "{comp}");
    assert!(rect < comp / 1.3, "{rect} vs {comp}");
}

#[test]
fn near_ideal_pulses_reach_full_transfer_in_both_variants() {
    let model = SpinModel::reduced(0.08, F_C13);
    for (v, n) in [(Variant::Standard, 3.0), (Variant::PhaseOffset, 3.5), (Variant::PhaseOffset, 4.5)] {
        let spec = SequenceSpec::new(v, n, 80, 5000.0);
        let r = propagate(&model, &spec, &initial_state(&model)).unwrap();
        let nuc: Vec<f64> = r.nuclear_polarization.iter().map(|x| x.abs()).collect();
        // first maximum; growth is monotone up to it
        let peak = (2..nuc.len() - 1).find(|&k| nuc[k] > 0.5 && nuc[k + 1] < nuc[k]).unwrap();
        assert!(nuc[peak] > 0.97, "{v:?} {n}: {}", nuc[peak]);
        assert!(nuc[..=peak].windows(2).all(|w| w[1] >= w[0] - 5e-3), "{v:?} {n}: {nuc:?}");
    }
}

#[test]
fn phase_offset_tolerates_detuning_better() {
    let model = SpinModel::reduced(0.02, F_C13);
    let om = 10.5;
    // main lobe only; the far tails oscillate
    let ds: Vec<f64> = (-5..=5).map(|k| k as f64 * 0.1 * om).filter(|d| *d != 0.0).collect();
    let rel = |v: Variant, n: f64| {
        let spec = SequenceSpec::new(v, n, 20, om);
        let p0 = scan_detuning(&model, &spec, &[0.0]).unwrap()[0].nuclear_polarization;
        scan_detuning(&model, &spec, &ds).unwrap().iter().map(|p| p.nuclear_polarization / p0).collect::<Vec<_>>()
    };
    let (std, off) = (rel(Variant::Standard, 3.0), rel(Variant::PhaseOffset, 3.5));
    for ((d, s), o) in ds.iter().zip(&std).zip(&off) {
        assert!(o >= &(s - 0.02), "detuning {d}: {o} < {s}");
    }
    let width = |v: Variant, n: f64| {
        transfer_bandwidth(&model, &SequenceSpec::new(v, n, 20, om), 0.5, 1.5 * om, 61).unwrap().width
    };
    assert!(width(Variant::PhaseOffset, 3.5) > width(Variant::Standard, 3.0));
}

#[test]
fn two_sideband_inversion_plateau() {
    let p = PulseShape::phase_alternating(TWO_SIDEBANDS.to_vec()).unwrap();
    let om = 10.5;
    let ds: Vec<f64> = (-35..=35).map(|k| k as f64 * 0.01 * om * 2.0).filter(|d| d.abs() <= 0.7 * om).collect();
    let sz = inversion_profile(&p, om, &ds).unwrap();
    let worst = sz.iter().cloned().fold(f64::MIN, f64::max);
    assert!(worst <= -0.9, "{worst}");
}

#[test]
fn wall_time_and_example_durations() {
    let tau = resonance_tau(4.5, F_C13).unwrap();
    assert!((tau - 0.7324).abs() < 1e-4);
    assert!((68.0 * tau - 49.8).abs() < 0.05);
    assert!((resonance_tau(1.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
    let seq = build_sequence(&SequenceSpec::new(Variant::Standard, 3.0, 7, 10.5), F_C13).unwrap();
    let pi = seq.block.iter().find(|s| s.phase == Some(PI)).unwrap().duration;
    assert!((pi - 0.0476).abs() < 1e-4, "{pi}");
}

#[test]
fn n14_lines_without_hyperfine_collapse() {
    let sys = NvSystem::with_d(2869.0).unwrap();
    let par = N14Params { a_par: 0.0, a_perp: 0.0, ..N14Params::default() };
    let lines = list_transitions_n14(&sys, 287.0, 1.1, &par, 0.1).unwrap();
    let allowed: Vec<_> = lines.iter().filter(|l| l.allowed).collect();
    assert_eq!(allowed.len(), 3);
    for l in &allowed {
        assert!((l.frequency - allowed[0].frequency).abs() < 1e-9);
        assert!((l.dipole - 1.0).abs() < 1e-9);
    }
}

#[test]
fn n14_forbidden_lines_vanish_along_axis() {
    let sys = NvSystem::with_d(2869.0).unwrap();
    let par = N14Params::default();
    let mut prev = f64::MAX;
    for theta in [0.3, 0.1, 0.03, 0.0] {
        let lines = list_transitions_n14(&sys, 287.0, theta, &par, 0.5).unwrap();
        let forb = lines.iter().filter(|l| !l.allowed).map(|l| l.dipole).fold(0.0, f64::max);
        assert!(forb <= prev + 1e-12);
        prev = forb;
    }
    assert!(prev < 1e-9);
}

#[test]
fn n14_zero_projection_line_sits_at_bare_frequency() {
    let sys = NvSystem::with_d(2869.0).unwrap();
    let lines = list_transitions_n14(&sys, 287.0, PI / 2.0, &N14Params::default(), 0.5).unwrap();
    let (u1, u2, _) = nvdnp_spin::perp_energies_analytic(2869.0, 287.0, sys.gamma_bar);
    let bare = u2 - u1;
    assert!(lines.iter().any(|l| (l.frequency - bare).abs() < 1e-6 && l.dipole > 0.999), "{lines:?}");
}

#[test]
fn closed_form_inversion_matches_matrix_propagation() {
    use num_complex::Complex64 as C;
    let p = PulseShape::phase_alternating(TWO_SIDEBANDS.to_vec()).unwrap();
    let om = 10.5;
    let unit = 1.0 / (2.0 * om);
    for delta in [-9.0, -2.5, 0.0, 1.3, 7.0] {
        let mut u = CMat::identity(2, 2);
        for (k, ph) in p.full(0.0) {
            let (ox, oy) = ph.map_or((0.0, 0.0), |f| (om * f.cos(), om * f.sin()));
            let h = CMat::from_row_slice(2, 2, &[
                C::new(0.5 * delta, 0.0),
                C::new(0.5 * ox, -0.5 * oy),
                C::new(0.5 * ox, 0.5 * oy),
                C::new(-0.5 * delta, 0.0),
            ]);
            u = hermitian_unitary(&h, k * unit) * u;
        }
        let sz = u[(0, 0)].norm_sqr() - u[(1, 0)].norm_sqr();
        let closed = inversion_sz(&p, om, delta);
        assert!((sz - closed).abs() < 1e-12, "delta {delta}: {sz} vs {closed}");
    }
}
