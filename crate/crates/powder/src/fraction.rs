use std::f64::consts::PI;

use nvdnp_spin::{build_hamiltonian, eigenvalues, perp_energies_analytic, FieldVector, NvSystem};
use rayon::prelude::*;

use crate::grid::{orientation_grid, strain_nodes, StrainSampling};
use crate::spectrum::{BroadeningModel, Lineshape, FWHM_PER_SIGMA};
use crate::PowderError;

/// Powder resolution for the bandwidth fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionGrid {
    pub n_theta: usize,
    /// Only used when strain is present; without it the result is φ independent.
    pub n_phi: usize,
    pub n_strain: usize,
}

impl Default for FractionGrid {
    fn default() -> Self {
        Self { n_theta: 4000, n_phi: 16, n_strain: 9 }
    }
}

/// Fraction of the powder whose s1→s2 and s2→s3 lines fall in the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandFractions {
    pub s1s2: f64,
    pub s2s3: f64,
}

/// Window that ends exactly at the perpendicular s1→s2 frequency.
pub fn default_carrier(sys: &NvSystem, b: f64, delta_pol: f64) -> f64 {
    let (u1, u2, _) = perp_energies_analytic(sys.d, b, sys.gamma_bar);
    u2 - u1 - 0.5 * delta_pol
}

fn window_prob(nu: f64, lo: f64, hi: f64, hwhm: f64, shape: Lineshape) -> f64 {
    if hwhm <= 0.0 {
        return if nu >= lo && nu <= hi { 1.0 } else { 0.0 };
    }
    match shape {
        Lineshape::Lorentzian => (((hi - nu) / hwhm).atan() - ((lo - nu) / hwhm).atan()) / PI,
        Lineshape::Gaussian => {
            let s = 2.0 * hwhm / FWHM_PER_SIGMA * std::f64::consts::SQRT_2;
            0.5 * (libm::erf((hi - nu) / s) - libm::erf((lo - nu) / s))
        }
    }
}

/// Weighted fraction of NV centers with a transition inside
/// carrier ± delta_pol/2. A Lorentzian field width becomes a frequency width
/// through the local slope dν/dB; strain enters through e_x nodes.
pub fn bandwidth_fraction(
    sys: &NvSystem,
    carrier_nu: f64,
    b: f64,
    delta_pol: f64,
    br: &BroadeningModel,
    grid: &FractionGrid,
) -> Result<BandFractions, PowderError> {
    if !(delta_pol > 0.0) {
        return Err(PowderError::Validation(format!("delta_pol must be positive, got {delta_pol}")));
    }
    if !(b > 0.0) {
        return Err(PowderError::Validation(format!("field must be positive, got {b}")));
    }
    br.validate()?;
    let strained = br.ex_fwhm > 0.0 && grid.n_strain > 1;
    let n_phi = if strained || sys.e_x != 0.0 || sys.e_y != 0.0 { grid.n_phi } else { 1 };
    let orients = orientation_grid(grid.n_theta, n_phi);
    let strains = strain_nodes(br.ex_fwhm, grid.n_strain, StrainSampling::Quadrature, 0);
    let lo = carrier_nu - 0.5 * delta_pol;
    let hi = carrier_nu + 0.5 * delta_pol;
    let db = 1e-3;

    let parts: Vec<(f64, f64)> = orients
        .par_iter()
        .map(|o| {
            let mut f12 = 0.0;
            let mut f23 = 0.0;
            for &(ex, ws) in &strains {
                let s = sys.with_ex(sys.e_x + ex);
                let e = |bb: f64| eigenvalues(&build_hamiltonian(&s, &FieldVector { b: bb, theta: o.theta, phi: o.phi }));
                let e0 = e(b);
                let (n12, n23) = (e0[1] - e0[0], e0[2] - e0[1]);
                let (h12, h23) = if br.lorentz_lw > 0.0 {
                    let ep = e(b + db);
                    let em = e(b - db);
                    let s12 = ((ep[1] - ep[0]) - (em[1] - em[0])) / (2.0 * db);
                    let s23 = ((ep[2] - ep[1]) - (em[2] - em[1])) / (2.0 * db);
                    (0.5 * br.lorentz_lw * s12.abs(), 0.5 * br.lorentz_lw * s23.abs())
                } else {
                    (0.0, 0.0)
                };
                f12 += ws * window_prob(n12, lo, hi, h12, br.shape);
                f23 += ws * window_prob(n23, lo, hi, h23, br.shape);
            }
            (o.weight * f12, o.weight * f23)
        })
        .collect();
    let (mut s1s2, mut s2s3) = (0.0, 0.0);
    for (a, c) in parts {
        s1s2 += a;
        s2s3 += c;
    }
    Ok(BandFractions { s1s2, s2s3 })
}

/// Carrier maximizing the s1→s2 fraction, scanned over [lo, hi] then refined
/// by golden-section search around the best scan point.
pub fn optimize_carrier(
    sys: &NvSystem,
    b: f64,
    delta_pol: f64,
    br: &BroadeningModel,
    grid: &FractionGrid,
    lo: f64,
    hi: f64,
    n_scan: usize,
) -> Result<(f64, BandFractions), PowderError> {
    let n_scan = n_scan.max(3);
    let eval = |c: f64| bandwidth_fraction(sys, c, b, delta_pol, br, grid);
    let h = (hi - lo) / (n_scan - 1) as f64;
    let mut best = (lo, eval(lo)?);
    for k in 1..n_scan {
        let c = lo + h * k as f64;
        let f = eval(c)?;
        if f.s1s2 > best.1.s1s2 {
            best = (c, f);
        }
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut d) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let mut x1 = d - g * (d - a);
    let mut x2 = a + g * (d - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while d - a > 0.05 {
        if f1.s1s2 >= f2.s1s2 {
            d = x2;
            x2 = x1;
            f2 = f1;
            x1 = d - g * (d - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (d - a);
            f2 = eval(x2)?;
        }
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f.s1s2 > best.1.s1s2 {
            best = (x, f);
        }
    }
    Ok(best)
}
