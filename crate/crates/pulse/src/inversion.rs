use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::shape::PulseShape;
use crate::PulseError;

/// ⟨σz⟩ after one π pulse at detuning `delta`, starting in |↑⟩. Each segment
/// is the exact SU(2) rotation exp(−iπt(Δσz + Ω(cosφ σx + sinφ σy))).
pub fn inversion_sz(pulse: &PulseShape, omega1: f64, delta: f64) -> f64 {
    let unit = 1.0 / (2.0 * omega1);
    // U = [[a, b], [−b*, a*]]
    let mut a = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(0.0, 0.0);
    for (k, p) in pulse.full(0.0) {
        if k <= 0.0 {
            continue;
        }
        let (ox, oy) = match p {
            Some(p) => (omega1 * p.cos(), omega1 * p.sin()),
            None => (0.0, 0.0),
        };
        let w = (delta * delta + ox * ox + oy * oy).sqrt();
        if w == 0.0 {
            continue;
        }
        let (s, c) = (PI * w * k * unit).sin_cos();
        let sa = Complex64::new(c, -s * delta / w);
        let sb = Complex64::new(-s * oy / w, -s * ox / w);
        let na = sa * a - sb * b.conj();
        let nb = sa * b + sb * a.conj();
        a = na;
        b = nb;
    }
    a.norm_sqr() - b.norm_sqr()
}

/// ⟨σz⟩ after a single π pulse on a two-level system starting in |↑⟩, for
/// each detuning (MHz). Rabi frequency in MHz.
pub fn inversion_profile(pulse: &PulseShape, omega1: f64, detunings: &[f64]) -> Result<Vec<f64>, PulseError> {
    pulse.validate()?;
    if !(omega1 > 0.0 && omega1.is_finite()) {
        return Err(PulseError::Validation(format!("Rabi frequency must be positive, got {omega1}")));
    }
    Ok(detunings.par_iter().map(|&d| inversion_sz(pulse, omega1, d)).collect())
}
