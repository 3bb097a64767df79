use nalgebra::SymmetricEigen;
use rayon::prelude::*;

use crate::linalg::{c, hermitian_unitary, trace_product, CMat};
use crate::model::SpinModel;
use crate::sequence::{build_sequence, Sequence, SequenceSpec};
use crate::PulseError;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    /// 2·P(s1) − 1 after each block, starting with the initial state.
    pub nv_polarization: Vec<f64>,
    pub nuclear_polarization: Vec<f64>,
    pub final_state: CMat,
    /// Largest |Tr ρ − 1| seen along the way.
    pub trace_error: f64,
}

impl PropagationResult {
    pub fn final_nv(&self) -> f64 {
        *self.nv_polarization.last().unwrap()
    }

    pub fn final_nuclear(&self) -> f64 {
        *self.nuclear_polarization.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub x: f64,
    pub nv_polarization: f64,
    pub nuclear_polarization: f64,
}

/// Electron in s1, nucleus fully mixed.
pub fn initial_state(model: &SpinModel) -> CMat {
    let nd = model.nuclear_dim();
    model.s1_projector() * c(1.0 / nd as f64)
}

fn check_state(rho: &CMat, dim: usize) -> Result<(), PulseError> {
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(PulseError::Validation(format!("state is {}x{}, model needs {dim}x{dim}", rho.nrows(), rho.ncols())));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > 1e-10 {
        return Err(PulseError::Validation(format!("state is not Hermitian (deviation {herm:.2e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(PulseError::Validation(format!("state trace is {tr}, expected 1")));
    }
    let min = SymmetricEigen::new(rho.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(PulseError::Validation(format!("state has negative eigenvalue {min:.2e}")));
    }
    Ok(())
}

/// Propagator of one τ block.
pub(crate) fn block_unitary(model: &SpinModel, seq: &Sequence, omega1: f64, detuning: f64) -> Result<CMat, PulseError> {
    let h0 = model.static_hamiltonian(detuning)?;
    let dim = model.dim();
    let mut u = CMat::identity(dim, dim);
    for seg in &seq.block {
        let h = match seg.phase {
            None => h0.clone(),
            Some(p) => &h0 + model.drive(omega1, p),
        };
        u = hermitian_unitary(&h, seg.duration) * u;
    }
    Ok(u)
}

/// Run the sequence from `rho0`, recording polarizations after every block.
pub fn propagate(model: &SpinModel, spec: &SequenceSpec, rho0: &CMat) -> Result<PropagationResult, PulseError> {
    model.validate()?;
    check_state(rho0, model.dim())?;
    let seq = build_sequence(spec, model.omega_i())?;
    let u = block_unitary(model, &seq, spec.omega1, spec.detuning)?;
    let ud = u.adjoint();
    let p1 = model.s1_projector();
    let iz = model.nuclear_observable();
    let mut rho = rho0.clone();
    let mut nv = Vec::with_capacity(seq.m + 1);
    let mut nuc = Vec::with_capacity(seq.m + 1);
    let mut trace_error: f64 = 0.0;
    let mut record = |rho: &CMat| {
        nv.push(2.0 * trace_product(rho, &p1).re - 1.0);
        nuc.push(trace_product(rho, &iz).re);
        trace_error = trace_error.max((rho.trace().re - 1.0).abs());
    };
    record(&rho);
    for _ in 0..seq.m {
        rho = &u * rho * &ud;
        record(&rho);
    }
    Ok(PropagationResult { nv_polarization: nv, nuclear_polarization: nuc, final_state: rho, trace_error })
}

fn final_point(model: &SpinModel, spec: &SequenceSpec, x: f64) -> Result<ScanPoint, PulseError> {
    let r = propagate(model, spec, &initial_state(model))?;
    Ok(ScanPoint { x, nv_polarization: r.final_nv(), nuclear_polarization: r.final_nuclear() })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

/// Final polarizations versus τ (µs); `spec.n` is overridden per point.
pub fn scan_tau(
    model: &SpinModel,
    spec: &SequenceSpec,
    tau_min: f64,
    tau_max: f64,
    n_points: usize,
) -> Result<Vec<ScanPoint>, PulseError> {
    if !(tau_min > 0.0 && tau_max >= tau_min) || n_points == 0 {
        return Err(PulseError::Validation(format!("bad tau range [{tau_min}, {tau_max}] with {n_points} points")));
    }
    let fi = model.omega_i();
    linspace(tau_min, tau_max, n_points)
        .into_par_iter()
        .map(|tau| {
            let s = SequenceSpec { n: 2.0 * fi * tau, ..spec.clone() };
            final_point(model, &s, tau)
        })
        .collect()
}

/// Final polarizations versus microwave detuning (MHz).
pub fn scan_detuning(model: &SpinModel, spec: &SequenceSpec, detunings: &[f64]) -> Result<Vec<ScanPoint>, PulseError> {
    detunings
        .par_iter()
        .map(|&d| final_point(model, &SequenceSpec { detuning: d, ..spec.clone() }, d))
        .collect()
}

/// Local minima of the NV polarization at least `min_depth` below the larger
/// neighbouring maximum, refined by a parabola through the three points.
pub fn local_minima(points: &[ScanPoint], min_depth: f64) -> Vec<f64> {
    let y: Vec<f64> = points.iter().map(|p| p.nv_polarization).collect();
    let mut out = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if !(y[k] < y[k - 1] && y[k] <= y[k + 1]) {
            continue;
        }
        let left = y[..k].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let right = y[k + 1..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if left.min(right) - y[k] < min_depth {
            continue;
        }
        let (x0, x1, x2) = (points[k - 1].x, points[k].x, points[k + 1].x);
        let den = y[k - 1] - 2.0 * y[k] + y[k + 1];
        let h = 0.5 * (x2 - x0);
        let shift = if den > 0.0 { 0.5 * h * (y[k - 1] - y[k + 1]) / den } else { 0.0 };
        out.push(x1 + shift.clamp(-h, h));
    }
    out
}

/// Deepest NV-polarization minimum with x in [lo, hi], parabola-refined.
pub fn deepest_dip(points: &[ScanPoint], lo: f64, hi: f64) -> Option<f64> {
    let k = (0..points.len())
        .filter(|&k| points[k].x >= lo && points[k].x <= hi)
        .min_by(|&a, &b| points[a].nv_polarization.total_cmp(&points[b].nv_polarization))?;
    if k == 0 || k + 1 == points.len() {
        return Some(points[k].x);
    }
    let (y0, y1, y2) = (points[k - 1].nv_polarization, points[k].nv_polarization, points[k + 1].nv_polarization);
    let h = 0.5 * (points[k + 1].x - points[k - 1].x);
    let den = y0 - 2.0 * y1 + y2;
    let shift = if den > 0.0 { 0.5 * h * (y0 - y2) / den } else { 0.0 };
    Some(points[k].x + shift.clamp(-h, h))
}

/// Detuning interval around zero where the nuclear polarization keeps at
/// least `threshold` of its on-resonance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferBandwidth {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    /// False if either edge lies beyond the scanned span.
    pub bounded: bool,
}

pub fn transfer_bandwidth(
    model: &SpinModel,
    spec: &SequenceSpec,
    threshold: f64,
    span: f64,
    n_points: usize,
) -> Result<TransferBandwidth, PulseError> {
    if !(threshold > 0.0 && threshold < 1.0) || !(span > 0.0) || n_points < 2 {
        return Err(PulseError::Validation(format!(
            "need 0 < threshold < 1, span > 0 and n_points >= 2, got {threshold}, {span}, {n_points}"
        )));
    }
    let grid = linspace(0.0, span, n_points);
    let mut both: Vec<f64> = grid.iter().map(|d| -d).collect();
    both.extend(grid.iter().skip(1));
    let pts = scan_detuning(model, spec, &both)?;
    let v0 = pts[0].nuclear_polarization;
    if v0.abs() < 1e-6 {
        return Err(PulseError::Validation("no nuclear transfer at zero detuning".into()));
    }
    let ratio = |k: usize| pts[k].nuclear_polarization / v0;
    let side = |idx: Vec<usize>| -> (f64, bool) {
        for w in idx.windows(2) {
            let (r0, r1) = (ratio(w[0]), ratio(w[1]));
            if r1 < threshold {
                let (x0, x1) = (pts[w[0]].x.abs(), pts[w[1]].x.abs());
                return (x0 + (r0 - threshold) / (r0 - r1) * (x1 - x0), true);
            }
        }
        (span, false)
    };
    let (lo, lb) = side((0..n_points).collect());
    let (hi, hb) = side(std::iter::once(0).chain(n_points..2 * n_points - 1).collect());
    Ok(TransferBandwidth { lower: -lo, upper: hi, width: lo + hi, bounded: lb && hb })
}
