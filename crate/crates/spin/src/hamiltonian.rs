use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::{SpinError, GAMMA_NV};

/// Static NV parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvSystem {
    /// Zero-field splitting, MHz.
    pub d: f64,
    pub e_x: f64,
    pub e_y: f64,
    /// MHz per mT.
    pub gamma_bar: f64,
}

impl NvSystem {
    pub fn new(d: f64, e_x: f64, e_y: f64, gamma_bar: f64) -> Result<Self, SpinError> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(SpinError::Validation(format!("D must be positive, got {d}")));
        }
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(SpinError::Validation(format!(
                "gamma_bar must be positive, got {gamma_bar}"
            )));
        }
        if !e_x.is_finite() || !e_y.is_finite() {
            return Err(SpinError::Validation("strain terms must be finite".into()));
        }
        Ok(Self { d, e_x, e_y, gamma_bar })
    }

    /// Strain-free system with the default gyromagnetic ratio.
    pub fn with_d(d: f64) -> Result<Self, SpinError> {
        Self::new(d, 0.0, 0.0, GAMMA_NV)
    }

    pub fn with_ex(mut self, e_x: f64) -> Self {
        self.e_x = e_x;
        self
    }
}

/// Static field in the NV frame (z along the NV axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    /// mT
    pub b: f64,
    pub theta: f64,
    pub phi: f64,
}

impl FieldVector {
    pub fn new(b: f64, theta: f64, phi: f64) -> Result<Self, SpinError> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(SpinError::Validation(format!("field magnitude must be >= 0, got {b}")));
        }
        if !(0.0..=PI + 1e-12).contains(&theta) {
            return Err(SpinError::Validation(format!("theta must lie in [0, pi], got {theta}")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(SpinError::Validation(format!("phi must lie in [0, 2pi), got {phi}")));
        }
        Ok(Self { b, theta, phi })
    }

    /// Unit vector of the field direction.
    pub fn direction(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Field components (mT).
    pub fn components(&self) -> Vector3<f64> {
        self.direction() * self.b
    }
}

/// Spin-1 operators in the {|-1>, |0>, |+1>} basis.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: Matrix3<Complex64>,
    pub sy: Matrix3<Complex64>,
    pub sz: Matrix3<Complex64>,
}

pub fn spin_matrices() -> SpinMatrices {
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    let z = Complex64::new(0.0, 0.0);
    let s = FRAC_1_SQRT_2;
    SpinMatrices {
        sx: Matrix3::new(z, r(s), z, r(s), z, r(s), z, r(s), z),
        sy: Matrix3::new(z, i(s), z, i(-s), z, i(s), z, i(-s), z),
        sz: Matrix3::new(r(-1.0), z, z, z, z, z, z, z, r(1.0)),
    }
}

/// D·Sz² + γ̄ B·S + e_x(Sy²−Sx²) + e_y(SxSy+SySx), MHz.
pub fn build_hamiltonian(sys: &NvSystem, field: &FieldVector) -> Matrix3<Complex64> {
    let m = spin_matrices();
    let b = field.components() * sys.gamma_bar;
    let c = |x: f64| Complex64::new(x, 0.0);
    let sz2 = m.sz * m.sz;
    let mut h = sz2 * c(sys.d) + m.sx * c(b.x) + m.sy * c(b.y) + m.sz * c(b.z);
    if sys.e_x != 0.0 {
        h += (m.sy * m.sy - m.sx * m.sx) * c(sys.e_x);
    }
    if sys.e_y != 0.0 {
        h += (m.sx * m.sy + m.sy * m.sx) * c(sys.e_y);
    }
    // symmetrize away rounding so the result is exactly Hermitian
    (h + h.adjoint()) * c(0.5)
}
