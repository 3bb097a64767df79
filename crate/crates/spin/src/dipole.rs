use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::{spin_matrices, EigenSolution, SpinError};

/// d_ij = <s_i| n·S |s_j> for a linearly polarized drive along `n`.
pub fn transition_dipole(
    sol: &EigenSolution,
    i: usize,
    j: usize,
    n: &Vector3<f64>,
) -> Result<Complex64, SpinError> {
    if i == j || i > 2 || j > 2 {
        return Err(SpinError::Validation(format!("bad transition indices ({i}, {j})")));
    }
    if ((n.norm() - 1.0).abs()) > 1e-9 {
        return Err(SpinError::Validation(format!(
            "drive direction must be a unit vector (|n| = {})",
            n.norm()
        )));
    }
    Ok(dipole_unchecked(sol, i, j, n))
}

fn dipole_unchecked(sol: &EigenSolution, i: usize, j: usize, n: &Vector3<f64>) -> Complex64 {
    let m = spin_matrices();
    let c = |x: f64| Complex64::new(x, 0.0);
    let op = m.sx * c(n.x) + m.sy * c(n.y) + m.sz * c(n.z);
    sol.states[i].dotc(&(op * sol.states[j]))
}

/// Two unit vectors completing `axis` to a right-handed orthonormal frame.
pub fn transverse_basis(axis: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = axis.normalize();
    let helper = if a.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let e1 = helper.cross(&a).normalize();
    let e2 = a.cross(&e1);
    (e1, e2)
}

/// |d_ij|² averaged over linear drive directions perpendicular to `field_dir`.
pub fn perpendicular_dipole_sq(sol: &EigenSolution, i: usize, j: usize, field_dir: &Vector3<f64>) -> f64 {
    let (e1, e2) = transverse_basis(field_dir);
    0.5 * (dipole_unchecked(sol, i, j, &e1).norm_sqr() + dipole_unchecked(sol, i, j, &e2).norm_sqr())
}

/// Rabi frequency relative to the high-field limit, where |d| = 1/√2.
pub fn rabi_ratio(d: Complex64) -> f64 {
    d.norm() * SQRT_2
}
