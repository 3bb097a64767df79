use std::f64::consts::PI;

use nvdnp_spin::{
    build_hamiltonian, diagonalize, eigenvalues, perpendicular_dipole_sq, pumped_populations, FieldVector, NvSystem,
};
use rayon::prelude::*;

use crate::grid::{orientation_grid, strain_nodes, Orientation, StrainSampling};
use crate::PowderError;

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
const ROOT_TOL: f64 = 1e-4;
const SCAN_STEPS: usize = 64;

/// Line profile applied with the `lorentz_lw` width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lineshape {
    #[default]
    Lorentzian,
    /// EasySpin reads a scalar `lw` as a Gaussian FWHM; kept for comparison.
    Gaussian,
}

/// Inhomogeneous broadening.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BroadeningModel {
    /// Line full width, mT.
    pub lorentz_lw: f64,
    /// Gaussian FWHM of the e_x distribution, MHz.
    pub ex_fwhm: f64,
    pub shape: Lineshape,
}

impl BroadeningModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn lorentzian(lw: f64, ex_fwhm: f64) -> Self {
        Self { lorentz_lw: lw, ex_fwhm, shape: Lineshape::Lorentzian }
    }

    pub fn validate(&self) -> Result<(), PowderError> {
        if !(self.lorentz_lw >= 0.0) || !(self.ex_fwhm >= 0.0) {
            return Err(PowderError::Validation("broadening widths must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepMode {
    /// Field swept at fixed microwave frequency (MHz); axis in mT.
    Field { nu: f64 },
    /// Frequency swept at fixed field (mT); axis in MHz.
    Frequency { b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRequest {
    pub mode: SweepMode,
    pub axis_min: f64,
    pub axis_max: f64,
    pub n_points: usize,
    pub p_nv: f64,
    pub temperature: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_strain: usize,
    pub seed: u64,
    pub sampling: StrainSampling,
}

impl SpectrumRequest {
    pub fn field_swept(nu: f64, axis_min: f64, axis_max: f64, n_points: usize) -> Self {
        Self {
            mode: SweepMode::Field { nu },
            axis_min,
            axis_max,
            n_points,
            p_nv: 0.0,
            temperature: 293.0,
            n_theta: 90,
            n_phi: 24,
            n_strain: 7,
            seed: 0,
            sampling: StrainSampling::Quadrature,
        }
    }

    pub fn validate(&self) -> Result<(), PowderError> {
        if !(self.axis_min < self.axis_max) {
            return Err(PowderError::Validation(format!(
                "axis_min ({}) must be below axis_max ({})",
                self.axis_min, self.axis_max
            )));
        }
        if self.n_points < 2 {
            return Err(PowderError::Validation("n_points must be >= 2".into()));
        }
        if self.n_theta < 1 || self.n_phi < 1 || self.n_strain < 1 {
            return Err(PowderError::Validation("grid sizes must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_nv) {
            return Err(PowderError::Validation(format!("p_nv must lie in [0, 1], got {}", self.p_nv)));
        }
        if !(self.temperature > 0.0) {
            return Err(PowderError::Validation("temperature must be positive".into()));
        }
        match self.mode {
            SweepMode::Field { nu } if !(nu > 0.0) => {
                Err(PowderError::Validation("microwave frequency must be positive".into()))
            }
            SweepMode::Frequency { b } if !(b >= 0.0) => Err(PowderError::Validation("field must be >= 0".into())),
            _ => Ok(()),
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        let step = (self.axis_max - self.axis_min) / (self.n_points - 1) as f64;
        (0..self.n_points).map(|k| self.axis_min + step * k as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMeta {
    pub request: SpectrumRequest,
    /// Lines found inside the sweep window.
    pub lines: usize,
    /// (orientation, strain, transition) combinations without a resonance in the window.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub axis: Vec<f64>,
    pub intensity: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn step(&self) -> f64 {
        (self.axis[self.axis.len() - 1] - self.axis[0]) / (self.axis.len() - 1) as f64
    }

    /// Trapezoidal area.
    pub fn integral(&self) -> f64 {
        let h = self.step();
        let n = self.intensity.len();
        h * (self.intensity.iter().sum::<f64>() - 0.5 * (self.intensity[0] + self.intensity[n - 1]))
    }

    /// Axis position of the largest intensity inside [lo, hi].
    pub fn argmax_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.axis
            .iter()
            .zip(&self.intensity)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, _)| *x)
    }

    /// Linearly interpolated sign changes of the intensity.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 1..self.axis.len() {
            let (y0, y1) = (self.intensity[k - 1], self.intensity[k]);
            if y0 != 0.0 && y0.signum() != y1.signum() && y1 != 0.0 {
                let (x0, x1) = (self.axis[k - 1], self.axis[k]);
                out.push(x0 + y0 / (y0 - y1) * (x1 - x0));
            }
        }
        out
    }

    /// `axis,intensity` with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis,intensity\n");
        for (x, y) in self.axis.iter().zip(&self.intensity) {
            s.push_str(&format!("{},{}\n", sig9(*x), sig9(*y)));
        }
        s
    }
}

pub(crate) fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{x:.8e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let v = format!("{:.*}", decimals, x);
        if v.contains('.') {
            v.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            v
        }
    } else {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    }
}

struct Accum<'a> {
    axis_min: f64,
    step: f64,
    shape: Lineshape,
    out: &'a mut [f64],
}

impl Accum<'_> {
    /// Area-normalized line of full width `fwhm`; a bin hit when the width is zero.
    fn add(&mut self, x0: f64, fwhm: f64, weight: f64) {
        let n = self.out.len();
        if fwhm <= 0.0 {
            let k = ((x0 - self.axis_min) / self.step).round();
            if k >= 0.0 && (k as usize) < n {
                self.out[k as usize] += weight / self.step;
            }
            return;
        }
        match self.shape {
            Lineshape::Lorentzian => {
                let g = 0.5 * fwhm;
                let amp = weight * g / PI;
                for (k, v) in self.out.iter_mut().enumerate() {
                    let dx = self.axis_min + self.step * k as f64 - x0;
                    *v += amp / (dx * dx + g * g);
                }
            }
            Lineshape::Gaussian => {
                let sigma = fwhm / FWHM_PER_SIGMA;
                let amp = weight / (sigma * (2.0 * PI).sqrt());
                for (k, v) in self.out.iter_mut().enumerate() {
                    let dx = self.axis_min + self.step * k as f64 - x0;
                    if dx.abs() < 10.0 * sigma {
                        *v += amp * (-0.5 * (dx / sigma).powi(2)).exp();
                    }
                }
            }
        }
    }
}

/// 2·√(2 ln 2)
pub(crate) const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

fn hamiltonian_at(sys: &NvSystem, o: &Orientation, b: f64) -> nvdnp_spin::Matrix3<nvdnp_spin::Complex64> {
    build_hamiltonian(sys, &FieldVector { b, theta: o.theta, phi: o.phi })
}

fn transition_freq(sys: &NvSystem, o: &Orientation, b: f64, pair: (usize, usize)) -> f64 {
    let e = eigenvalues(&hamiltonian_at(sys, o, b));
    e[pair.1] - e[pair.0]
}

/// All (transition, field) roots of ν_pair(B) = ν in [lo, hi], by coarse
/// bracketing on a shared eigenvalue scan then bisection.
fn field_roots(sys: &NvSystem, o: &Orientation, nu: f64, lo: f64, hi: f64) -> [Vec<f64>; 3] {
    let e = |b: f64| eigenvalues(&hamiltonian_at(sys, o, b));
    let h = (hi - lo) / SCAN_STEPS as f64;
    let mut roots: [Vec<f64>; 3] = Default::default();
    let mut prev = e(lo).map(|_| 0.0);
    let e0 = e(lo);
    for (k, p) in PAIRS.iter().enumerate() {
        prev[k] = e0[p.1] - e0[p.0] - nu;
    }
    for step in 1..=SCAN_STEPS {
        let b1 = lo + h * step as f64;
        let b0 = b1 - h;
        let e1 = e(b1);
        for (k, &pair) in PAIRS.iter().enumerate() {
            let f0 = prev[k];
            let f1 = e1[pair.1] - e1[pair.0] - nu;
            prev[k] = f1;
            if f0 == 0.0 {
                roots[k].push(b0);
            } else if f1 != 0.0 && f0.signum() != f1.signum() {
                let (mut a, mut c, mut fa) = (b0, b1, f0);
                while c - a > ROOT_TOL {
                    let m = 0.5 * (a + c);
                    let fm = transition_freq(sys, o, m, pair) - nu;
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        c = m;
                    }
                }
                roots[k].push(0.5 * (a + c));
            }
        }
    }
    for k in 0..3 {
        if prev[k] == 0.0 {
            roots[k].push(hi);
        }
    }
    roots
}

/// Frequency-domain Lorentzian width corresponding to `lw` mT.
fn freq_width(sys: &NvSystem, o: &Orientation, b: f64, pair: (usize, usize), lw: f64) -> f64 {
    if lw <= 0.0 {
        return 0.0;
    }
    let h = 1e-3;
    let lo = (b - h).max(0.0);
    let slope = (transition_freq(sys, o, b + h, pair) - transition_freq(sys, o, lo, pair)) / (b + h - lo);
    lw * slope.abs()
}

fn field_dir_for(o: &Orientation) -> nvdnp_spin::Vector3<f64> {
    FieldVector { b: 1.0, theta: o.theta, phi: o.phi }.direction()
}

/// Powder spectrum on the default orientation grid.
pub fn simulate_spectrum(sys: &NvSystem, req: &SpectrumRequest, br: &BroadeningModel) -> Result<Spectrum, PowderError> {
    req.validate()?;
    simulate_spectrum_on(sys, req, br, &orientation_grid(req.n_theta, req.n_phi))
}

/// Powder spectrum over an explicit set of orientations.
pub fn simulate_spectrum_on(
    sys: &NvSystem,
    req: &SpectrumRequest,
    br: &BroadeningModel,
    grid: &[Orientation],
) -> Result<Spectrum, PowderError> {
    req.validate()?;
    br.validate()?;
    let axis = req.axis();
    let step = axis[1] - axis[0];
    let strains = strain_nodes(br.ex_fwhm, req.n_strain, req.sampling, req.seed);

    let per_orientation: Vec<(Vec<f64>, usize, usize)> = grid
        .par_iter()
        .map(|o| {
            let mut out = vec![0.0; axis.len()];
            let mut acc = Accum { axis_min: req.axis_min, step, shape: br.shape, out: &mut out };
            let mut lines = 0;
            let mut skipped = 0;
            let dir = field_dir_for(o);
            for &(ex, ws) in &strains {
                let s = sys.with_ex(sys.e_x + ex);
                match req.mode {
                    SweepMode::Field { nu } => {
                        let margin = 10.0 * br.lorentz_lw;
                        let lo = (req.axis_min - margin).max(0.0);
                        let hi = req.axis_max + margin;
                        let all = field_roots(&s, o, nu, lo, hi);
                        for (pair, roots) in PAIRS.into_iter().zip(all) {
                            if roots.is_empty() {
                                skipped += 1;
                            }
                            for b in roots {
                                let sol = diagonalize(&hamiltonian_at(&s, o, b)).expect("Hermitian by construction");
                                let pop = pumped_populations(req.p_nv, &sol, req.temperature).expect("validated");
                                let w = o.weight * ws * perpendicular_dipole_sq(&sol, pair.0, pair.1, &dir)
                                    * pop.difference(pair.0, pair.1);
                                acc.add(b, br.lorentz_lw, w);
                                lines += 1;
                            }
                        }
                    }
                    SweepMode::Frequency { b } => {
                        let sol = diagonalize(&hamiltonian_at(&s, o, b)).expect("Hermitian by construction");
                        let pop = pumped_populations(req.p_nv, &sol, req.temperature).expect("validated");
                        for pair in PAIRS {
                            let nu = sol.frequency(pair.0, pair.1);
                            let fw = freq_width(&s, o, b, pair, br.lorentz_lw);
                            if nu + 10.0 * fw < req.axis_min || nu - 10.0 * fw > req.axis_max {
                                skipped += 1;
                                continue;
                            }
                            let w = o.weight * ws * perpendicular_dipole_sq(&sol, pair.0, pair.1, &dir)
                                * pop.difference(pair.0, pair.1);
                            acc.add(nu, fw, w);
                            lines += 1;
                        }
                    }
                }
            }
            (out, lines, skipped)
        })
        .collect();

    // fixed-order reduction keeps results independent of the thread count
    let mut intensity = vec![0.0; axis.len()];
    let mut lines = 0;
    let mut skipped = 0;
    for (part, l, s) in per_orientation {
        for (a, b) in intensity.iter_mut().zip(part) {
            *a += b;
        }
        lines += l;
        skipped += s;
    }
    Ok(Spectrum { axis, intensity, meta: SpectrumMeta { request: *req, lines, skipped } })
}

/// Request for an orientation histogram of transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqDistRequest {
    pub axis_min: f64,
    pub axis_max: f64,
    pub n_points: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_strain: usize,
}

impl FreqDistRequest {
    pub fn new(axis_min: f64, axis_max: f64, n_points: usize) -> Self {
        Self { axis_min, axis_max, n_points, n_theta: 400, n_phi: 8, n_strain: 1 }
    }
}

/// Equal-weight distribution of the two allowed transition frequencies at
/// field `b`. Per orientation the transition with the weakest drive dipole
/// (the double-quantum-like one) is left out; dipoles do not weight the rest.
pub fn frequency_distribution(
    sys: &NvSystem,
    b: f64,
    br: &BroadeningModel,
    req: &FreqDistRequest,
) -> Result<Spectrum, PowderError> {
    let spec_req = SpectrumRequest {
        mode: SweepMode::Frequency { b },
        axis_min: req.axis_min,
        axis_max: req.axis_max,
        n_points: req.n_points,
        p_nv: 0.0,
        temperature: 293.0,
        n_theta: req.n_theta,
        n_phi: req.n_phi,
        n_strain: req.n_strain,
        seed: 0,
        sampling: StrainSampling::Quadrature,
    };
    spec_req.validate()?;
    br.validate()?;
    let axis = spec_req.axis();
    let step = axis[1] - axis[0];
    let strains = strain_nodes(br.ex_fwhm, req.n_strain, StrainSampling::Quadrature, 0);
    let grid = orientation_grid(req.n_theta, req.n_phi);

    let parts: Vec<(Vec<f64>, usize, usize)> = grid
        .par_iter()
        .map(|o| {
            let mut out = vec![0.0; axis.len()];
            let mut acc = Accum { axis_min: req.axis_min, step, shape: br.shape, out: &mut out };
            let dir = field_dir_for(o);
            let (mut lines, mut skipped) = (0, 0);
            for &(ex, ws) in &strains {
                let s = sys.with_ex(sys.e_x + ex);
                let sol = diagonalize(&hamiltonian_at(&s, o, b)).expect("Hermitian by construction");
                let strength: Vec<f64> = PAIRS.iter().map(|p| perpendicular_dipole_sq(&sol, p.0, p.1, &dir)).collect();
                let weakest = (0..3).min_by(|&a, &c| strength[a].total_cmp(&strength[c]).then(c.cmp(&a))).unwrap();
                for (k, pair) in PAIRS.iter().enumerate() {
                    if k == weakest {
                        continue;
                    }
                    let nu = sol.frequency(pair.0, pair.1);
                    let fw = freq_width(&s, o, b, *pair, br.lorentz_lw);
                    if nu + 10.0 * fw < req.axis_min || nu - 10.0 * fw > req.axis_max {
                        skipped += 1;
                        continue;
                    }
                    acc.add(nu, fw, o.weight * ws);
                    lines += 1;
                }
            }
            (out, lines, skipped)
        })
        .collect();
    let mut intensity = vec![0.0; axis.len()];
    let (mut lines, mut skipped) = (0, 0);
    for (part, l, s) in parts {
        for (a, b) in intensity.iter_mut().zip(part) {
            *a += b;
        }
        lines += l;
        skipped += s;
    }
    Ok(Spectrum { axis, intensity, meta: SpectrumMeta { request: spec_req, lines, skipped } })
}
