use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::SpinError;

/// Ordered eigen-decomposition of a 3×3 Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    /// Ascending, MHz.
    pub energies: [f64; 3],
    /// `states[k]` belongs to `energies[k]`; components in the {|-1>, |0>, |+1>} basis.
    pub states: [Vector3<Complex64>; 3],
}

impl EigenSolution {
    /// Transition frequency |u_j − u_i|.
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        (self.energies[j] - self.energies[i]).abs()
    }

    /// Overlap |<s_i|0>|².
    pub fn zero_weight(&self, i: usize) -> f64 {
        self.states[i][1].norm_sqr()
    }
}

fn frob(h: &Matrix3<Complex64>) -> f64 {
    h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_hermitian(h: &Matrix3<Complex64>) -> Result<f64, SpinError> {
    let scale = frob(h);
    if !scale.is_finite() {
        return Err(SpinError::Validation("matrix has non-finite entries".into()));
    }
    let asym = frob(&(h - h.adjoint()));
    if asym > 1e-12 * scale.max(1.0) {
        return Err(SpinError::Validation(format!(
            "matrix is not Hermitian (|H - H^dag| = {asym:.3e})"
        )));
    }
    Ok(scale)
}

/// Full diagonalization. Energies ascending; degenerate eigenvectors are
/// rotated onto the m_s basis vectors they overlap most, in basis order.
pub fn diagonalize(h: &Matrix3<Complex64>) -> Result<EigenSolution, SpinError> {
    let scale = check_hermitian(h)?;
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut energies = [0.0; 3];
    let mut states = [Vector3::zeros(); 3];
    for (k, &idx) in order.iter().enumerate() {
        energies[k] = eig.eigenvalues[idx];
        states[k] = eig.eigenvectors.column(idx).into_owned();
    }

    let tol = 1e-9 * scale.max(1.0);
    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && energies[end] - energies[end - 1] < tol {
            end += 1;
        }
        if end - start > 1 {
            relabel_cluster(&mut states[start..end]);
            let mean = energies[start..end].iter().sum::<f64>() / (end - start) as f64;
            energies[start..end].iter_mut().for_each(|e| *e = mean);
        }
        start = end;
    }
    for s in states.iter_mut() {
        fix_phase(s);
    }
    Ok(EigenSolution { energies, states })
}

fn relabel_cluster(states: &mut [Vector3<Complex64>]) {
    let k = states.len();
    // projection of each basis vector onto the degenerate subspace
    let mut proj: Vec<(usize, Vector3<Complex64>)> = (0..3)
        .map(|m| {
            let mut v = Vector3::zeros();
            for s in states.iter() {
                v += s * s[m].conj();
            }
            (m, v)
        })
        .collect();
    proj.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()).then(a.0.cmp(&b.0)));
    let mut chosen: Vec<(usize, Vector3<Complex64>)> = proj.into_iter().take(k).collect();
    chosen.sort_by_key(|c| c.0);
    let mut basis: Vec<Vector3<Complex64>> = Vec::with_capacity(k);
    for (_, v) in chosen {
        let mut w = v;
        for b in &basis {
            let ov = b.dotc(&w);
            w -= b * ov;
        }
        let n = w.norm();
        if n > 1e-8 {
            basis.push(w / Complex64::new(n, 0.0));
        }
    }
    // fall back to the solver's own vectors if the projection was rank deficient
    if basis.len() == k {
        states.copy_from_slice(&basis);
    }
}

fn fix_phase(v: &mut Vector3<Complex64>) {
    let mut best = 0;
    for i in 1..3 {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let ph = z.conj() / z.norm();
        *v *= ph;
    }
}

/// Eigenvalues only, ascending, from the closed-form trigonometric root of
/// the characteristic cubic. No Hermiticity check; intended for hot loops.
pub fn eigenvalues(h: &Matrix3<Complex64>) -> [f64; 3] {
    let a00 = h[(0, 0)].re;
    let a11 = h[(1, 1)].re;
    let a22 = h[(2, 2)].re;
    let p1 = h[(0, 1)].norm_sqr() + h[(0, 2)].norm_sqr() + h[(1, 2)].norm_sqr();
    let q = (a00 + a11 + a22) / 3.0;
    let p2 = (a00 - q).powi(2) + (a11 - q).powi(2) + (a22 - q).powi(2) + 2.0 * p1;
    if p2 <= 0.0 {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let b00 = (a00 - q) / p;
    let b11 = (a11 - q) / p;
    let b22 = (a22 - q) / p;
    let b01 = h[(0, 1)] / p;
    let b02 = h[(0, 2)] / p;
    let b12 = h[(1, 2)] / p;
    // det of a Hermitian matrix is real
    let det = b00 * b11 * b22 + 2.0 * (b01 * b12 * b02.conj()).re
        - b00 * b12.norm_sqr()
        - b11 * b02.norm_sqr()
        - b22 * b01.norm_sqr();
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}
