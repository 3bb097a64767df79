//! Bandwidth optimization of phase-alternating composite π pulses.
//!
//! A candidate is scored by the half-width (MHz) of the detuning band, centred
//! on zero, over which single-pulse inversion fidelity (1 − ⟨σz⟩)/2 stays at
//! or above a threshold.

mod simplex;

use nvdnp_pulse::{inversion_sz, PulseShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use simplex::{nelder_mead, SimplexResult};

/// Upper bound on every coefficient.
pub const A_MAX: f64 = 1.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Pulse(#[from] nvdnp_pulse::PulseError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub n_sidebands: usize,
    pub fidelity_threshold: f64,
    /// Detunings in MHz, symmetric about zero.
    pub delta_grid: Vec<f64>,
    /// Objective evaluations per restart.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Optional cap on the π-pulse length in rectangular π times.
    pub max_duration: Option<f64>,
    /// Extra starting points; shorter lists are zero-padded at the front,
    /// which leaves the pulse unchanged.
    pub warm_starts: Vec<Vec<f64>>,
}

impl OptimizerConfig {
    /// Threshold 0.99, 81 detunings over ±1.5Ω, 16 restarts of 1500 evaluations.
    pub fn new(n_sidebands: usize, omega1: f64) -> Self {
        Self {
            n_sidebands,
            fidelity_threshold: 0.99,
            delta_grid: default_grid(omega1, 81, 1.5),
            budget: 1500,
            seed: 0,
            restarts: 16,
            max_duration: None,
            warm_starts: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        if !(self.fidelity_threshold > 0.0 && self.fidelity_threshold < 1.0) {
            return Err(OptimError::Validation(format!("threshold must lie in (0, 1), got {}", self.fidelity_threshold)));
        }
        if self.budget == 0 || self.restarts == 0 {
            return Err(OptimError::Validation("budget and restarts must be at least 1".into()));
        }
        check_grid(&self.delta_grid)?;
        let dim = 2 * self.n_sidebands + 1;
        if let Some(w) = self.warm_starts.iter().find(|w| w.len() > dim || w.len() % 2 == 0) {
            return Err(OptimError::Validation(format!("warm start of length {} does not fit {dim} coefficients", w.len())));
        }
        if let Some(m) = self.max_duration {
            if !(m >= 1.0) {
                return Err(OptimError::Validation(format!("max duration below one π time: {m}")));
            }
        }
        Ok(())
    }
}

pub fn default_grid(omega1: f64, n: usize, span: f64) -> Vec<f64> {
    let n = n.max(3) | 1;
    let h = (n / 2) as f64;
    (0..n).map(|k| span * omega1 * (k as f64 - h) / h).collect()
}

fn check_grid(grid: &[f64]) -> Result<(), OptimError> {
    if grid.is_empty() || grid.iter().any(|d| !d.is_finite()) {
        return Err(OptimError::Validation("detuning grid must be non-empty and finite".into()));
    }
    let mut s: Vec<f64> = grid.to_vec();
    s.sort_by(f64::total_cmp);
    let tol = 1e-9 * s.iter().fold(1.0f64, |m, d| m.max(d.abs()));
    if s.iter().zip(s.iter().rev()).any(|(a, b)| (a + b).abs() > tol) {
        return Err(OptimError::Validation("detuning grid must be symmetric about zero".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePulse {
    pub a_list: Vec<f64>,
    /// Half-width of the accepted band, MHz.
    pub bandwidth: f64,
    pub min_fidelity_in_band: f64,
}

impl CandidatePulse {
    pub fn accounting(&self) -> (f64, f64) {
        accounting(&self.a_list)
    }

    pub fn csv_header(&self) -> String {
        let n = self.a_list.len() - 1;
        let mut cols: Vec<String> = (0..=n).rev().map(|i| format!("a_{i}")).collect();
        cols.extend(["bandwidth", "duration", "power"].map(String::from));
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let (d, p) = self.accounting();
        let mut cols: Vec<String> = self.a_list.iter().map(|a| format!("{a:.6}")).collect();
        cols.extend([format!("{:.6}", self.bandwidth), format!("{d:.6}"), format!("{p:.6}")]);
        cols.join(",")
    }
}

/// (duration, power) in rectangular π times; waits count only toward duration.
pub fn accounting(a_list: &[f64]) -> (f64, f64) {
    let n = a_list.len() - 1;
    let dur = 2.0 * a_list.iter().sum::<f64>();
    let on = 2.0 * a_list[..n].iter().enumerate().filter(|(pos, _)| (n - pos) % 2 == 0).map(|(_, a)| a).sum::<f64>()
        + 2.0 * a_list[n];
    (dur, on)
}

fn fidelity(pulse: &PulseShape, omega1: f64, delta: f64) -> f64 {
    0.5 * (1.0 - inversion_sz(pulse, omega1, delta))
}

/// Band edges on the non-negative half of the grid, pairing ±Δ and keeping
/// the worse of the two. Returns (half-width, worst in-band fidelity, F(0)).
fn band(pulse: &PulseShape, omega1: f64, threshold: f64, grid: &[f64]) -> (f64, f64, f64) {
    let mut mags: Vec<f64> = grid.iter().map(|d| d.abs()).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let f: Vec<f64> = mags
        .iter()
        .map(|&d| fidelity(pulse, omega1, d).min(fidelity(pulse, omega1, -d)))
        .collect();
    if f[0] < threshold {
        return (0.0, f[0], f[0]);
    }
    let mut worst = f[0];
    for k in 1..mags.len() {
        if f[k] < threshold {
            let edge = mags[k - 1] + (f[k - 1] - threshold) / (f[k - 1] - f[k]) * (mags[k] - mags[k - 1]);
            return (edge, worst, f[0]);
        }
        worst = worst.min(f[k]);
    }
    (*mags.last().unwrap(), worst, f[0])
}

/// Half-width in MHz of the symmetric band where fidelity ≥ threshold.
pub fn objective(a_list: &[f64], omega1: f64, threshold: f64, delta_grid: &[f64]) -> Result<f64, OptimError> {
    Ok(evaluate(a_list, omega1, threshold, delta_grid)?.bandwidth)
}

pub fn evaluate(a_list: &[f64], omega1: f64, threshold: f64, delta_grid: &[f64]) -> Result<CandidatePulse, OptimError> {
    let pulse = shape(a_list)?;
    check_grid(delta_grid)?;
    if !(omega1 > 0.0) {
        return Err(OptimError::Validation(format!("Rabi frequency must be positive, got {omega1}")));
    }
    let (bw, worst, _) = band(&pulse, omega1, threshold, delta_grid);
    Ok(CandidatePulse { a_list: a_list.to_vec(), bandwidth: bw, min_fidelity_in_band: worst })
}

fn shape(a_list: &[f64]) -> Result<PulseShape, OptimError> {
    Ok(if a_list.len() == 1 {
        PulseShape { kind: nvdnp_pulse::PulseKind::Rectangular, a: a_list.to_vec() }
    } else {
        PulseShape::phase_alternating(a_list.to_vec())?
    })
}

/// Search score in units of Ω: the half-width when the centre inverts, else
/// the (negative) fidelity shortfall at Δ = 0, minus any duration overrun.
fn score(a: &[f64], omega1: f64, cfg: &OptimizerConfig) -> f64 {
    let (dur, _) = accounting(a);
    if let Some(m) = cfg.max_duration {
        if dur > m {
            return -(dur - m);
        }
    }
    if a.iter().sum::<f64>() <= 0.0 {
        return -1.0;
    }
    let pulse = PulseShape { kind: nvdnp_pulse::PulseKind::PhaseAlternating, a: a.to_vec() };
    let (bw, _, f0) = band(&pulse, omega1, cfg.fidelity_threshold, &cfg.delta_grid);
    if f0 < cfg.fidelity_threshold {
        f0 - cfg.fidelity_threshold
    } else {
        bw / omega1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: CandidatePulse,
    /// False when no restart found a pulse that inverts at Δ = 0; `best` is
    /// then the rectangular baseline.
    pub feasible: bool,
    pub evaluations: usize,
    /// Per-restart (start score, final score), in units of Ω.
    pub restarts: Vec<(f64, f64)>,
}

fn starts(cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
    let dim = 2 * cfg.n_sidebands + 1;
    let mut rect = vec![0.0; dim];
    rect[dim - 1] = 0.5;
    let mut out = vec![rect];
    for w in &cfg.warm_starts {
        let mut x = vec![0.0; dim - w.len()];
        x.extend(w.iter().map(|a| a.clamp(0.0, A_MAX)));
        out.push(x);
    }
    let top = cfg.max_duration.unwrap_or(4.0).max(1.5);
    for k in 1..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
        let mut x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
        x[dim - 1] = rng.random_range(0.4..0.9);
        // rescale to a random total length that respects any cap
        let target = rng.random_range(1.0..top);
        let scale = target / accounting(&x).0;
        x.iter_mut().for_each(|a| *a = (*a * scale).min(A_MAX));
        out.push(x);
    }
    out
}

fn reflect(x: f64) -> f64 {
    let period = 2.0 * A_MAX;
    let y = x.rem_euclid(period);
    if y > A_MAX {
        period - y
    } else {
        y
    }
}

/// Seeded restarts of a box-reflected Nelder-Mead, run in parallel; the
/// winner is the highest score, ties broken by the lexicographically
/// smaller coefficient list.
pub fn optimize(cfg: &OptimizerConfig, omega1: f64) -> Result<OptimResult, OptimError> {
    cfg.validate()?;
    if !(omega1 > 0.0) {
        return Err(OptimError::Validation(format!("Rabi frequency must be positive, got {omega1}")));
    }
    let runs: Vec<(Vec<f64>, f64, f64, usize)> = starts(cfg)
        .into_par_iter()
        .map(|x0| {
            let f = |x: &[f64]| {
                let a: Vec<f64> = x.iter().map(|v| reflect(*v)).collect();
                -score(&a, omega1, cfg)
            };
            let s0 = -f(&x0);
            let r = nelder_mead(f, &x0, 0.1, cfg.budget);
            let a: Vec<f64> = r.x.iter().map(|v| reflect(*v)).collect();
            (a, s0, -r.f, r.evaluations)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.3).sum();
    let restarts = runs.iter().map(|r| (r.1, r.2)).collect();
    let win = runs
        .iter()
        .max_by(|a, b| a.2.total_cmp(&b.2).then_with(|| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal)))
        .unwrap();
    if win.2 < 0.0 {
        let best = evaluate(&[0.5], omega1, cfg.fidelity_threshold, &cfg.delta_grid)?;
        return Ok(OptimResult { best, feasible: false, evaluations, restarts });
    }
    let best = evaluate(&win.0, omega1, cfg.fidelity_threshold, &cfg.delta_grid)?;
    Ok(OptimResult { best, feasible: true, evaluations, restarts })
}
