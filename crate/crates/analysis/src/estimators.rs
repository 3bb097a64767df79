use std::f64::consts::PI;

use crate::AnalysisError;

pub const PLANCK: f64 = 6.62607e-34;
pub const BOLTZMANN: f64 = 1.38065e-23;
pub const AVOGADRO: f64 = 6.02214e23;
/// Carbon atoms per cm³ in diamond.
pub const DIAMOND_DENSITY: f64 = 1.76e23;
pub const GAMMA_C13: f64 = 10.705;
pub const GAMMA_H1: f64 = 42.576;

fn positive(name: &str, v: f64) -> Result<(), AnalysisError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::Validation(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<(), AnalysisError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AnalysisError::Validation(format!("{name} must be non-negative, got {v}")))
    }
}

/// NMR sample: mass in mg, γ in MHz/T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSpec {
    pub mass_mg: f64,
    pub isotope_abundance: f64,
    pub molar_mass: f64,
    pub gamma: f64,
    pub atoms_per_molecule: u32,
}

impl SampleSpec {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        positive("mass", self.mass_mg)?;
        positive("isotope abundance", self.isotope_abundance)?;
        positive("molar mass", self.molar_mass)?;
        positive("gamma", self.gamma)?;
        if self.atoms_per_molecule == 0 {
            return Err(AnalysisError::Validation("atoms per molecule must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of NMR-active nuclei.
    pub fn spins(&self) -> f64 {
        self.mass_mg * 1e-3 / self.molar_mass * AVOGADRO * self.isotope_abundance * self.atoms_per_molecule as f64
    }

    pub fn diamond_13c(mass_mg: f64) -> Self {
        Self { mass_mg, isotope_abundance: 0.0107, molar_mass: 12.011, gamma: GAMMA_C13, atoms_per_molecule: 1 }
    }

    pub fn water_1h(mass_mg: f64) -> Self {
        Self { mass_mg, isotope_abundance: 0.9998, molar_mass: 18.015, gamma: GAMMA_H1, atoms_per_molecule: 2 }
    }
}

/// Ratio of thermal signals, sample over reference: γ·N / (γ_ref·N_ref).
pub fn gamma_ref(sample: &SampleSpec, reference: &SampleSpec) -> Result<f64, AnalysisError> {
    sample.validate()?;
    reference.validate()?;
    Ok(sample.gamma * sample.spins() / (reference.gamma * reference.spins()))
}

/// hγB/(2k_BT) for B in T, γ in MHz/T.
pub fn thermal_polarization(b: f64, temperature: f64, gamma: f64) -> Result<f64, AnalysisError> {
    non_negative("field", b)?;
    positive("temperature", temperature)?;
    positive("gamma", gamma)?;
    Ok(PLANCK * gamma * 1e6 * b / (2.0 * BOLTZMANN * temperature))
}

/// Hyperpolarization from signal areas against a thermal reference taken at
/// polarization `p_thermal_detection`.
pub fn absolute_polarization(s_hp: f64, s_ref: f64, gamma_ref: f64, p_thermal_detection: f64) -> Result<f64, AnalysisError> {
    positive("reference signal", s_ref)?;
    positive("gamma_ref", gamma_ref)?;
    positive("thermal polarization", p_thermal_detection)?;
    if !s_hp.is_finite() {
        return Err(AnalysisError::Validation("signal must be finite".into()));
    }
    Ok(p_thermal_detection * s_hp / (gamma_ref * s_ref))
}

pub fn enhancement(p_abs: f64, p_thermal: f64) -> Result<f64, AnalysisError> {
    positive("thermal polarization", p_thermal)?;
    Ok(p_abs / p_thermal)
}

/// Expected enhancement ratio when ε scales as Δρ·[NV].
pub fn enhancement_ratio_model(drho1: f64, conc1_ppm: f64, drho2: f64, conc2_ppm: f64) -> Result<f64, AnalysisError> {
    for (n, v) in [("drho1", drho1), ("conc1", conc1_ppm), ("drho2", drho2), ("conc2", conc2_ppm)] {
        positive(n, v)?;
    }
    Ok(drho1 * conc1_ppm / (drho2 * conc2_ppm))
}

/// √(D t) in nm for D in cm²/s and t in s.
pub fn diffusion_length(d_spin: f64, t: f64) -> Result<f64, AnalysisError> {
    positive("diffusion coefficient", d_spin)?;
    non_negative("time", t)?;
    Ok((d_spin * t).sqrt() * 1e7)
}

/// 0.55·n^(−1/3) in nm for a defect concentration in ppm of lattice sites.
pub fn nn_distance(conc_ppm: f64, lattice_density: f64) -> Result<f64, AnalysisError> {
    positive("concentration", conc_ppm)?;
    positive("lattice density", lattice_density)?;
    Ok(0.55 * (conc_ppm * 1e-6 * lattice_density).powf(-1.0 / 3.0) * 1e7)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tumbling {
    /// Rotational diffusion constant, 1/s.
    pub d_r: f64,
    /// Time to diffuse an RMS angle equal to the window, ms.
    pub residence_ms: f64,
    /// Whole protocol cycles within the residence time.
    pub cycles: u64,
}

/// Stokes-Einstein-Debye tumbling of a sphere of radius r (nm) in a liquid
/// of viscosity η (Pa·s).
pub fn tumbling(r_nm: f64, eta: f64, temperature: f64, angle_window: f64, cycle_ms: f64) -> Result<Tumbling, AnalysisError> {
    positive("radius", r_nm)?;
    positive("viscosity", eta)?;
    positive("temperature", temperature)?;
    positive("angle window", angle_window)?;
    positive("cycle time", cycle_ms)?;
    let r = r_nm * 1e-9;
    let d_r = BOLTZMANN * temperature / (8.0 * PI * eta * r.powi(3));
    let residence_ms = angle_window * angle_window / (2.0 * d_r) * 1e3;
    Ok(Tumbling { d_r, residence_ms, cycles: (residence_ms / cycle_ms).floor() as u64 })
}

/// Laser duty cycle of the polarization protocol; times in µs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolTiming {
    pub t_laser: f64,
    pub tau_srt: f64,
    pub m: usize,
}

impl ProtocolTiming {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        non_negative("laser time", self.t_laser)?;
        positive("repetition period", self.tau_srt)?;
        if self.t_laser > self.tau_srt {
            return Err(AnalysisError::Validation(format!(
                "laser time {} us exceeds repetition period {} us",
                self.t_laser, self.tau_srt
            )));
        }
        Ok(())
    }
}

/// Average power for a given peak power (mW).
pub fn protocol_power(pt: &ProtocolTiming, peak_power: f64) -> Result<f64, AnalysisError> {
    pt.validate()?;
    non_negative("peak power", peak_power)?;
    Ok(peak_power * pt.t_laser / pt.tau_srt)
}
