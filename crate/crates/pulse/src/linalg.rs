use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

/// exp(−i·2π·H·t) for Hermitian H in MHz and t in µs.
pub fn hermitian_unitary(h: &CMat, t: f64) -> CMat {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -TAU * lambda * t);
        let col: Vec<Complex64> = v.column(k).iter().map(|z| z * ph).collect();
        scaled.column_mut(k).copy_from_slice(&col);
    }
    &scaled * v.adjoint()
}

pub(crate) fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub(crate) fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Spin-½ operators (x, y, z).
pub(crate) fn pauli_half() -> [CMat; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0), -i * 0.5, i * 0.5, c(0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)]),
    ]
}

/// Spin-1 operators (x, y, z) in the {|−1>, |0>, |+1>} ordering.
pub(crate) fn spin_one() -> [CMat; 3] {
    let m = nvdnp_spin::spin_matrices();
    let to_d = |x: &nalgebra::Matrix3<Complex64>| CMat::from_fn(3, 3, |r, k| x[(r, k)]);
    [to_d(&m.sx), to_d(&m.sy), to_d(&m.sz)]
}

pub(crate) fn trace_product(a: &CMat, b: &CMat) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}
