use crate::SpinError;

/// Temperature coefficient of the zero-field splitting, MHz/K.
pub const DD_DT: f64 = -0.074;

/// Mixing coefficients of the perpendicular-field eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingCoefficients {
    pub c: f64,
    pub c_prime: f64,
}

/// Energies (u1, u2, u3) for a field perpendicular to the NV axis.
pub fn perp_energies_analytic(d: f64, b: f64, gamma_bar: f64) -> (f64, f64, f64) {
    let root = (d * d + (2.0 * gamma_bar * b).powi(2)).sqrt();
    ((d - root) / 2.0, d, (d + root) / 2.0)
}

pub fn mixing_coefficients(d: f64, b: f64, gamma_bar: f64) -> Result<MixingCoefficients, SpinError> {
    let gb = gamma_bar * b;
    if !(gb > 0.0) {
        return Err(SpinError::Singular(format!(
            "mixing coefficients need B > 0 (gamma_bar*B = {gb})"
        )));
    }
    let half = d / 2.0;
    let root = (half * half + gb * gb).sqrt();
    // c = (D/2 - root)/gb written to avoid cancellation when gb << D
    let c = -gb / (half + root);
    let c_prime = (half + root) / gb;
    Ok(MixingCoefficients { c, c_prime })
}

/// Resonance fields (B12, B23) in mT of a perpendicular NV at frequency `nu`.
pub fn resonance_fields(nu: f64, d: f64, gamma_bar: f64) -> Result<(f64, f64), SpinError> {
    if !(nu > d) {
        return Err(SpinError::Domain(format!(
            "low-field resonance needs nu > D (nu = {nu}, D = {d})"
        )));
    }
    Ok((
        (nu * (nu - d)).sqrt() / gamma_bar,
        (nu * (nu + d)).sqrt() / gamma_bar,
    ))
}

/// dB12/dD in mT per MHz.
pub fn db12_dd(nu: f64, d: f64, gamma_bar: f64) -> Result<f64, SpinError> {
    if !(nu > d) {
        return Err(SpinError::Domain(format!("dB12/dD needs nu > D (nu = {nu}, D = {d})")));
    }
    Ok(-nu / (2.0 * gamma_bar * (nu * nu - d * nu).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalShift {
    /// MHz/K
    pub dd_dt: f64,
    /// mT/K
    pub db_dt: f64,
}

pub fn thermal_shift_rate(nu: f64, d: f64, gamma_bar: f64) -> Result<ThermalShift, SpinError> {
    Ok(ThermalShift {
        dd_dt: DD_DT,
        db_dt: db12_dd(nu, d, gamma_bar)? * DD_DT,
    })
}

/// Temperature rise (K) implied by a shift `delta_b` (mT) of the low-field peak.
pub fn temperature_rise(delta_b: f64, nu: f64, d: f64, gamma_bar: f64) -> Result<f64, SpinError> {
    Ok(delta_b / thermal_shift_rate(nu, d, gamma_bar)?.db_dt)
}

/// Second-order energies for a field tilted by `delta` from the perpendicular.
pub fn perturbed_energies(d: f64, b: f64, gamma_bar: f64, delta: f64) -> (f64, f64, f64) {
    let (u1, u2, u3) = perp_energies_analytic(d, b, gamma_bar);
    let ratio = d / (d * d + (2.0 * gamma_bar * b).powi(2)).sqrt();
    let d2 = delta * delta;
    (
        u1 + 0.5 * d * (1.0 - ratio) * d2,
        u2 - d * d2,
        u3 + 0.5 * d * (1.0 + ratio) * d2,
    )
}

/// k in ν12(δ) ≈ ν12(0) − k δ², MHz.
pub fn tilt_coefficient(d: f64, b: f64, gamma_bar: f64) -> f64 {
    let ratio = d / (d * d + (2.0 * gamma_bar * b).powi(2)).sqrt();
    d + 0.5 * d * (1.0 - ratio)
}

/// Largest tilt δ_M (rad) keeping ν12 within `delta_pol` (MHz) of its perpendicular value.
pub fn tilt_acceptance(delta_pol: f64, d: f64, b: f64, gamma_bar: f64) -> Result<f64, SpinError> {
    if !(delta_pol > 0.0) {
        return Err(SpinError::Validation(format!("delta_pol must be positive, got {delta_pol}")));
    }
    Ok((delta_pol / tilt_coefficient(d, b, gamma_bar)).sqrt())
}
