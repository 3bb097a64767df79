//! PulsePol-family sequences and their action on NV-nuclear spin models.
//!
//! Frequencies in MHz (ordinary), times in µs; a phase of `None` marks free
//! evolution.

mod inversion;
mod linalg;
mod model;
mod propagate;
mod sequence;
mod shape;

pub use inversion::{inversion_profile, inversion_sz};
pub use linalg::{hermitian_unitary, CMat};
pub use model::{list_transitions_n14, N14Params, N14Transition, SpinModel};
pub use propagate::{
    deepest_dip, initial_state, local_minima, propagate, scan_detuning, scan_tau, transfer_bandwidth, PropagationResult, ScanPoint,
    TransferBandwidth,
};
pub use sequence::{build_sequence, resonance_tau, Segment, Sequence, SequenceSpec, Variant};
pub use shape::{PulseKind, PulseShape};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("pi pulse of {pulse_us:.6} us does not fit in tau/4 = {quarter_us:.6} us")]
    PulseTooLong { pulse_us: f64, quarter_us: f64 },
    #[error(transparent)]
    Spin(#[from] nvdnp_spin::SpinError),
}
