use nvdnp_spin::DD_DT;

use crate::PowderError;

/// One observed low-field peak position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingPoint {
    /// mW
    pub power: f64,
    /// Recovered zero-field splitting, MHz.
    pub d: f64,
    /// Temperature rise relative to the zero-power intercept, K.
    pub delta_t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatingFit {
    /// K per mW
    pub rate: f64,
    /// D extrapolated to zero laser power, MHz.
    pub d0: f64,
    pub points: Vec<HeatingPoint>,
}

impl HeatingFit {
    pub fn delta_t_at(&self, power: f64) -> f64 {
        self.rate * power
    }
}

/// Recovers D from each (power mW, B12 peak mT), fits D linearly against
/// power and converts the slope to K/mW with dD/dT.
pub fn heating_analysis(peaks: &[(f64, f64)], nu: f64, gamma_bar: f64) -> Result<HeatingFit, PowderError> {
    if peaks.len() < 2 {
        return Err(PowderError::Validation("heating fit needs at least two points".into()));
    }
    let ds: Vec<(f64, f64)> = peaks
        .iter()
        .map(|&(p, b)| (p, nu - (gamma_bar * b).powi(2) / nu))
        .collect();
    let n = ds.len() as f64;
    let mp = ds.iter().map(|x| x.0).sum::<f64>() / n;
    let md = ds.iter().map(|x| x.1).sum::<f64>() / n;
    let sxx: f64 = ds.iter().map(|x| (x.0 - mp).powi(2)).sum();
    if sxx <= 1e-12 * (1.0 + mp * mp) {
        return Err(PowderError::Degenerate("all laser powers are identical".into()));
    }
    let sxy: f64 = ds.iter().map(|x| (x.0 - mp) * (x.1 - md)).sum();
    let slope = sxy / sxx;
    let d0 = md - slope * mp;
    let rate = slope / DD_DT;
    let points = ds
        .iter()
        .map(|&(power, d)| HeatingPoint { power, d, delta_t: (d - d0) / DD_DT })
        .collect();
    Ok(HeatingFit { rate, d0, points })
}
