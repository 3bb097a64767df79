use crate::{EigenSolution, SpinError, BOLTZMANN, PLANCK};

/// Occupation probabilities of the three eigenstates, in energy order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub p: [f64; 3],
}

impl Populations {
    /// ρ_i − ρ_j
    pub fn difference(&self, i: usize, j: usize) -> f64 {
        self.p[i] - self.p[j]
    }
}

pub fn thermal_populations(sol: &EigenSolution, t: f64) -> Result<Populations, SpinError> {
    if !(t > 0.0) {
        return Err(SpinError::Validation(format!("temperature must be positive, got {t}")));
    }
    if t.is_infinite() {
        return Ok(Populations { p: [1.0 / 3.0; 3] });
    }
    let beta = 1e6 * PLANCK / (BOLTZMANN * t);
    let e0 = sol.energies[0];
    let w = sol.energies.map(|e| (-(e - e0) * beta).exp());
    let z: f64 = w.iter().sum();
    Ok(Populations { p: w.map(|x| x / z) })
}

/// ρ_i = (1 − p)·ρ_thermal,i + p·|<s_i|0>|².
pub fn pumped_populations(p_nv: f64, sol: &EigenSolution, t: f64) -> Result<Populations, SpinError> {
    if !(0.0..=1.0).contains(&p_nv) {
        return Err(SpinError::Validation(format!("p_nv must lie in [0, 1], got {p_nv}")));
    }
    let th = thermal_populations(sol, t)?;
    let mut p = [0.0; 3];
    for i in 0..3 {
        p[i] = (1.0 - p_nv) * th.p[i] + p_nv * sol.zero_weight(i);
    }
    Ok(Populations { p })
}

/// Population difference ρ(s1) − ρ(s2) scaled by an observed enhancement.
pub fn delta_rho_from_enhancement(eps_nv: f64, sol: &EigenSolution, t: f64) -> Result<f64, SpinError> {
    if !(eps_nv > 0.0) {
        return Err(SpinError::Validation(format!("enhancement must be positive, got {eps_nv}")));
    }
    Ok(eps_nv * thermal_populations(sol, t)?.difference(0, 1))
}
