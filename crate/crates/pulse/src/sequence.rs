use std::f64::consts::{FRAC_PI_2, PI};

use crate::shape::PulseShape;
use crate::PulseError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// φ = π/2, resonances at odd n.
    Standard,
    /// φ = 3π/4, resonances at n ≡ 0.5 (mod 4) and n ≡ 3.5 (mod 4).
    PhaseOffset,
    Custom(f64),
}

impl Variant {
    pub fn phi(self) -> f64 {
        match self {
            Variant::Standard => FRAC_PI_2,
            Variant::PhaseOffset => 0.75 * PI,
            Variant::Custom(p) => p,
        }
    }

    /// Resonance orders n in [0, n_max].
    pub fn resonances(self, n_max: f64) -> Vec<f64> {
        let (base, steps): (f64, &[f64]) = match self {
            Variant::Standard => (2.0, &[1.0]),
            Variant::PhaseOffset => (4.0, &[0.5, 3.5]),
            Variant::Custom(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        let mut k = 0.0;
        while k * base <= n_max {
            for s in steps {
                let n = k * base + s;
                if n <= n_max {
                    out.push(n);
                }
            }
            k += 1.0;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSpec {
    pub variant: Variant,
    /// Block length in units of half nuclear periods: τ = n/(2 f_I).
    pub n: f64,
    pub m: usize,
    /// Rabi frequency, MHz.
    pub omega1: f64,
    /// Microwave detuning, MHz.
    pub detuning: f64,
    pub pulse: PulseShape,
}

impl SequenceSpec {
    pub fn new(variant: Variant, n: f64, m: usize, omega1: f64) -> Self {
        Self { variant, n, m, omega1, detuning: 0.0, pulse: PulseShape::rectangular() }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if !(self.n > 0.0 && self.n.is_finite()) {
            return Err(PulseError::Validation(format!("n must be positive, got {}", self.n)));
        }
        if self.m == 0 {
            return Err(PulseError::Validation("M must be at least 1".into()));
        }
        if !(self.omega1 > 0.0 && self.omega1.is_finite()) {
            return Err(PulseError::Validation(format!("Rabi frequency must be positive, got {}", self.omega1)));
        }
        if !self.detuning.is_finite() {
            return Err(PulseError::Validation("detuning must be finite".into()));
        }
        self.pulse.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// µs
    pub duration: f64,
    pub phase: Option<f64>,
}

/// One τ block, repeated M times.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub block: Vec<Segment>,
    pub tau: f64,
    pub m: usize,
}

impl Sequence {
    pub fn total_time(&self) -> f64 {
        self.tau * self.m as f64
    }
}

pub fn resonance_tau(n: f64, omega_i: f64) -> Result<f64, PulseError> {
    if !(n > 0.0) || !(omega_i > 0.0) {
        return Err(PulseError::Validation(format!("need n > 0 and f_I > 0, got {n}, {omega_i}")));
    }
    Ok(n / (2.0 * omega_i))
}

/// Half block: (π/2)_a, gap, π_b, gap, (π/2)_c, with the gap τ/4 − T_π.
pub fn build_sequence(spec: &SequenceSpec, omega_i: f64) -> Result<Sequence, PulseError> {
    spec.validate()?;
    let tau = resonance_tau(spec.n, omega_i)?;
    let unit = 1.0 / (2.0 * spec.omega1);
    let t_pi = spec.pulse.duration_units() * unit;
    let gap = 0.25 * tau - t_pi;
    if gap < -1e-12 {
        return Err(PulseError::PulseTooLong { pulse_us: t_pi, quarter_us: 0.25 * tau });
    }
    let phi = spec.variant.phi();
    let ph = [FRAC_PI_2, PI, FRAC_PI_2, phi - FRAC_PI_2, phi, phi - FRAC_PI_2];
    let mut block: Vec<Segment> = Vec::new();
    let mut add = |segs: Vec<(f64, Option<f64>)>| {
        for (d, p) in segs {
            if d <= 0.0 {
                continue;
            }
            match block.last_mut() {
                Some(last) if last.phase == p => last.duration += d * unit,
                _ => block.push(Segment { duration: d * unit, phase: p }),
            }
        }
    };
    for half in 0..2 {
        let p = &ph[3 * half..3 * half + 3];
        add(spec.pulse.opening_half(p[0]));
        add(vec![(gap.max(0.0) / unit, None)]);
        add(spec.pulse.full(p[1]));
        add(vec![(gap.max(0.0) / unit, None)]);
        add(spec.pulse.closing_half(p[2]));
    }
    Ok(Sequence { block, tau, m: spec.m })
}
