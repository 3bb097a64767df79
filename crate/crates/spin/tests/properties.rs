use std::f64::consts::FRAC_PI_2;

use nvdnp_spin::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn hermitian() -> impl Strategy<Value = Matrix3<Complex64>> {
    prop::collection::vec(-50.0..50.0f64, 9).prop_map(|v| {
        let mut h = Matrix3::zeros();
        h[(0, 0)] = c(v[0], 0.0);
        h[(1, 1)] = c(v[1], 0.0);
        h[(2, 2)] = c(v[2], 0.0);
        for (k, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            h[(i, j)] = c(v[3 + 2 * k], v[4 + 2 * k]);
            h[(j, i)] = h[(i, j)].conj();
        }
        h
    })
}

proptest! {
    #[test]
    fn spectral_roundtrip(h in hermitian()) {
        let sol = diagonalize(&h).unwrap();
        let mut rebuilt = Matrix3::<Complex64>::zeros();
        for k in 0..3 {
            rebuilt += sol.states[k] * sol.states[k].adjoint() * c(sol.energies[k], 0.0);
        }
        prop_assert!((rebuilt - h).norm() < 1e-10 * h.norm().max(1.0));
        prop_assert!(sol.energies[0] <= sol.energies[1] && sol.energies[1] <= sol.energies[2]);
        for i in 0..3 {
            for j in 0..3 {
                let ov = sol.states[i].dotc(&sol.states[j]).norm();
                if i == j {
                    prop_assert!((ov - 1.0).abs() < 1e-10);
                } else {
                    prop_assert!(ov < 1e-10);
                }
            }
            let res = (h * sol.states[i] - sol.states[i] * c(sol.energies[i], 0.0)).norm();
            prop_assert!(res < 1e-9 * h.norm().max(1.0));
        }
    }

    #[test]
    fn perpendicular_energies_match(d in 100.0..5000.0f64, b in 0.0..800.0f64, phi in 0.0..6.28f64) {
        let sys = NvSystem::with_d(d).unwrap();
        let sol = diagonalize(&build_hamiltonian(&sys, &FieldVector::new(b, FRAC_PI_2, phi).unwrap())).unwrap();
        let (u1, u2, u3) = perp_energies_analytic(d, b, GAMMA_NV);
        let scale = u3.abs().max(1.0);
        prop_assert!((sol.energies[0] - u1).abs() < 1e-9 * scale);
        prop_assert!((sol.energies[1] - u2).abs() < 1e-9 * scale);
        prop_assert!((sol.energies[2] - u3).abs() < 1e-9 * scale);
    }

    #[test]
    fn mixing_product_is_minus_one(d in 1.0..5000.0f64, b in 1e-3..2000.0f64) {
        let m = mixing_coefficients(d, b, GAMMA_NV).unwrap();
        prop_assert!(m.c < 0.0 && m.c_prime > 0.0);
        prop_assert!((m.c * m.c_prime + 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_dipole_strength_is_frame_independent(
        b in 0.0..500.0f64, th in 0.0..3.14f64, ph in 0.0..6.28f64,
        a1 in 0.0..3.14f64, a2 in 0.0..6.28f64, a3 in 0.0..6.28f64,
    ) {
        let sys = NvSystem::new(2869.0, 5.0, 0.0, GAMMA_NV).unwrap();
        let sol = diagonalize(&build_hamiltonian(&sys, &FieldVector::new(b, th, ph).unwrap())).unwrap();
        let rot = nalgebra::Rotation3::from_euler_angles(a1, a2, a3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let lab: f64 = [Vector3::x(), Vector3::y(), Vector3::z()]
                .iter()
                .map(|n| transition_dipole(&sol, i, j, n).unwrap().norm_sqr())
                .sum();
            let turned: f64 = [Vector3::x(), Vector3::y(), Vector3::z()]
                .iter()
                .map(|n| transition_dipole(&sol, i, j, &(rot * n)).unwrap().norm_sqr())
                .sum();
            prop_assert!((lab - turned).abs() < 1e-10);
        }
    }

    #[test]
    fn populations_sum_to_one_and_are_affine(
        b in 0.0..500.0f64, th in 0.0..3.14f64, t in 1.0..1000.0f64, p in 0.0..1.0f64,
    ) {
        let sys = NvSystem::with_d(2869.0).unwrap();
        let sol = diagonalize(&build_hamiltonian(&sys, &FieldVector::new(b, th, 0.0).unwrap())).unwrap();
        let mid = pumped_populations(p, &sol, t).unwrap();
        let lo = pumped_populations(0.0, &sol, t).unwrap();
        let hi = pumped_populations(1.0, &sol, t).unwrap();
        prop_assert!((mid.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in 0..3 {
            prop_assert!((0.0..=1.0).contains(&mid.p[k]));
            prop_assert!((mid.p[k] - ((1.0 - p) * lo.p[k] + p * hi.p[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_eigenvalues_agree(h in hermitian()) {
        let full = diagonalize(&h).unwrap();
        let fast = eigenvalues(&h);
        for k in 0..3 {
            prop_assert!((full.energies[k] - fast[k]).abs() < 1e-6 * h.norm().max(1.0));
        }
    }
}

/// Error of the second-order tilt formula shrinks as δ⁴.
#[test]
fn perturbation_error_is_fourth_order() {
    let sys = NvSystem::with_d(2869.0).unwrap();
    let err = |delta: f64| {
        let sol = diagonalize(&build_hamiltonian(&sys, &FieldVector::new(287.0, FRAC_PI_2 + delta, 0.0).unwrap())).unwrap();
        let (u1, u2, u3) = perturbed_energies(2869.0, 287.0, GAMMA_NV, delta);
        (sol.energies[0] - u1).abs().max((sol.energies[1] - u2).abs()).max((sol.energies[2] - u3).abs())
    };
    let mut delta = 2f64.to_radians();
    while delta > 0.2f64.to_radians() {
        let ratio = err(delta) / err(delta / 2.0);
        assert!(ratio >= 8.0, "delta {delta}: ratio {ratio}");
        delta /= 2.0;
    }
}
