use nalgebra::Matrix3;
use nvdnp_spin::{build_hamiltonian, diagonalize, FieldVector, NvSystem};
use num_complex::Complex64;

use crate::linalg::{c, kron, pauli_half, spin_one, CMat};
use crate::PulseError;

/// ¹⁴N hyperfine and quadrupole constants, MHz; γ_N in MHz/mT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N14Params {
    pub a_par: f64,
    pub a_perp: f64,
    pub p: f64,
    pub gamma_n: f64,
}

impl Default for N14Params {
    fn default() -> Self {
        Self { a_par: -2.14, a_perp: -2.70, p: -4.95, gamma_n: 3.077e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpinModel {
    /// Two-level electron ⊗ spin-½ nucleus with secular-plus-pseudosecular
    /// coupling 2·S_z(A_zx I_x + A_zy I_y + A_zz I_z).
    Reduced { a_zx: f64, a_zy: f64, a_zz: f64, omega_i: f64 },
    /// s1/s2 manifold of the NV ⊗ ¹⁴N, field at θ from the NV axis.
    /// `omega_i` only sets τ (the target nucleus).
    FullN14 { sys: NvSystem, b: f64, theta: f64, omega_i: f64, params: N14Params },
}

impl SpinModel {
    pub fn reduced(a_zx: f64, omega_i: f64) -> Self {
        SpinModel::Reduced { a_zx, a_zy: 0.0, a_zz: 0.0, omega_i }
    }

    pub fn omega_i(&self) -> f64 {
        match self {
            SpinModel::Reduced { omega_i, .. } | SpinModel::FullN14 { omega_i, .. } => *omega_i,
        }
    }

    pub fn nuclear_dim(&self) -> usize {
        match self {
            SpinModel::Reduced { .. } => 2,
            SpinModel::FullN14 { .. } => 3,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.nuclear_dim()
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        let ok = match self {
            SpinModel::Reduced { a_zx, a_zy, a_zz, omega_i } => {
                [a_zx, a_zy, a_zz].iter().all(|x| x.is_finite()) && *omega_i > 0.0
            }
            SpinModel::FullN14 { b, theta, omega_i, params, .. } => {
                *b > 0.0 && theta.is_finite() && *omega_i > 0.0 && params.p.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(PulseError::Validation(format!("bad model parameters: {self:?}")))
        }
    }

    /// Time-independent part in the microwave rotating frame.
    pub fn static_hamiltonian(&self, detuning: f64) -> Result<CMat, PulseError> {
        match self {
            SpinModel::Reduced { a_zx, a_zy, a_zz, omega_i } => {
                let [sx, sy, sz] = pauli_half();
                let e2 = CMat::identity(2, 2);
                let s_z = kron(&sz, &e2);
                let coupling = &sx * c(*a_zx) + &sy * c(*a_zy) + &sz * c(*a_zz);
                Ok(&s_z * c(detuning) + kron(&e2, &sz) * c(*omega_i) + kron(&sz, &coupling) * c(2.0))
            }
            SpinModel::FullN14 { sys, b, theta, params, .. } => {
                let blocks = n14_blocks(sys, *b, *theta, params)?;
                let mut h = CMat::zeros(6, 6);
                h.view_mut((0, 0), (3, 3)).copy_from(&blocks.0);
                let lower = &blocks.1 - CMat::identity(3, 3) * c(detuning);
                h.view_mut((3, 3), (3, 3)).copy_from(&lower);
                Ok(h)
            }
        }
    }

    /// Microwave drive ν1(cos φ σx/2 + sin φ σy/2) on the electron pair.
    pub fn drive(&self, omega1: f64, phase: f64) -> CMat {
        let [sx, sy, _] = pauli_half();
        let e = CMat::identity(self.nuclear_dim(), self.nuclear_dim());
        kron(&(&sx * c(omega1 * phase.cos()) + &sy * c(omega1 * phase.sin())), &e)
    }

    /// Projector onto the s1 electron state.
    pub fn s1_projector(&self) -> CMat {
        let mut p = CMat::zeros(2, 2);
        p[(0, 0)] = c(1.0);
        kron(&p, &CMat::identity(self.nuclear_dim(), self.nuclear_dim()))
    }

    /// Nuclear polarization observable, normalized to ±1 at full polarization.
    pub fn nuclear_observable(&self) -> CMat {
        let e2 = CMat::identity(2, 2);
        match self {
            SpinModel::Reduced { .. } => kron(&e2, &pauli_half()[2]) * c(2.0),
            SpinModel::FullN14 { .. } => kron(&e2, &spin_one()[2]),
        }
    }
}

/// Nuclear Hamiltonians within the s1 and s2 manifolds, plus the bare s1→s2
/// frequency.
fn n14_blocks(sys: &NvSystem, b: f64, theta: f64, par: &N14Params) -> Result<(CMat, CMat, f64), PulseError> {
    let field = FieldVector::new(b, theta, 0.0)?;
    let sol = diagonalize(&build_hamiltonian(sys, &field))?;
    let m = nvdnp_spin::spin_matrices();
    let [ix, iy, iz] = spin_one();
    let e3 = CMat::identity(3, 3);
    let quad = (&iz * &iz - &e3 * c(2.0 / 3.0)) * c(par.p);
    let zeeman = (&ix * c(theta.sin()) + &iz * c(theta.cos())) * c(-par.gamma_n * b);
    let block = |k: usize| {
        let s = &sol.states[k];
        let ev = |op: &Matrix3<Complex64>| (s.adjoint() * op * s)[(0, 0)].re;
        let (ex, ey, ez) = (ev(&m.sx), ev(&m.sy), ev(&m.sz));
        &ix * c(par.a_perp * ex) + &iy * c(par.a_perp * ey) + &iz * c(par.a_par * ez) + &quad + &zeeman
    };
    Ok((block(0), block(1), sol.frequency(0, 1)))
}

/// A nuclear-resolved line of the s1→s2 transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct N14Transition {
    /// Nuclear eigenstate index within s1 (ascending energy).
    pub lower: usize,
    /// Nuclear eigenstate index within s2.
    pub upper: usize,
    pub frequency: f64,
    /// |⟨β|α⟩|, the nuclear overlap scaling the electron dipole.
    pub dipole: f64,
    pub allowed: bool,
}

/// All nine s1→s2 lines; those with overlap at or above `threshold` are
/// marked allowed.
pub fn list_transitions_n14(
    sys: &NvSystem,
    b: f64,
    theta: f64,
    params: &N14Params,
    threshold: f64,
) -> Result<Vec<N14Transition>, PulseError> {
    let (h1, h2, nu12) = n14_blocks(sys, b, theta, params)?;
    let to3 = |m: &CMat| Matrix3::from_fn(|r, k| m[(r, k)]);
    let e1 = diagonalize(&to3(&h1))?;
    let e2 = diagonalize(&to3(&h2))?;
    let mut out = Vec::with_capacity(9);
    for a in 0..3 {
        for bb in 0..3 {
            let ov = (e2.states[bb].adjoint() * e1.states[a])[(0, 0)].norm();
            out.push(N14Transition {
                lower: a,
                upper: bb,
                frequency: nu12 + e2.energies[bb] - e1.energies[a],
                dipole: ov,
                allowed: ov >= threshold,
            });
        }
    }
    Ok(out)
}
