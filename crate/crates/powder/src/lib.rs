//! Powder-averaged EPR spectra of NV ensembles.

mod fraction;
mod grid;
mod heating;
mod spectrum;

pub use fraction::{bandwidth_fraction, default_carrier, optimize_carrier, BandFractions, FractionGrid};
pub use grid::{orientation_grid, strain_nodes, Orientation, StrainSampling};
pub use heating::{heating_analysis, HeatingFit, HeatingPoint};
pub use spectrum::{
    frequency_distribution, simulate_spectrum, simulate_spectrum_on, BroadeningModel, FreqDistRequest, Lineshape, Spectrum,
    SpectrumMeta, SpectrumRequest, SweepMode,
};

use nvdnp_spin::SpinError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PowderError {
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
}
