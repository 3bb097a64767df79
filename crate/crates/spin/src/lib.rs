//! Ground-state NV spin Hamiltonian and its closed-form companions.
//!
//! Units throughout: MHz for energies and frequencies, mT for fields,
//! radians for angles, K for temperatures.

mod closed_form;
mod dipole;
mod eigen;
mod error;
mod hamiltonian;
mod populations;

pub use closed_form::{
    db12_dd, mixing_coefficients, perp_energies_analytic, perturbed_energies, resonance_fields,
    temperature_rise, thermal_shift_rate, tilt_acceptance, tilt_coefficient, MixingCoefficients,
    ThermalShift, DD_DT,
};
pub use dipole::{perpendicular_dipole_sq, rabi_ratio, transition_dipole, transverse_basis};
pub use eigen::{diagonalize, eigenvalues, EigenSolution};
pub use error::SpinError;
pub use hamiltonian::{build_hamiltonian, spin_matrices, FieldVector, NvSystem, SpinMatrices};
pub use populations::{
    delta_rho_from_enhancement, pumped_populations, thermal_populations, Populations,
};

pub use nalgebra::{Matrix3, Vector3};
pub use num_complex::Complex64;

/// Planck constant, J·s (6 significant figures).
pub const PLANCK: f64 = 6.62607e-34;
/// Boltzmann constant, J/K (6 significant figures).
pub const BOLTZMANN: f64 = 1.38065e-23;
/// Default NV gyromagnetic ratio, MHz/mT.
pub const GAMMA_NV: f64 = 28.032;
