use std::f64::consts::PI;

use crate::PulseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Rectangular,
    PhaseAlternating,
}

/// A π pulse, possibly composite. `a` holds [a_n, ..., a_1, a_0] in units of
/// the rectangular π time; odd indices are free-evolution gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub a: Vec<f64>,
}

impl PulseShape {
    pub fn rectangular() -> Self {
        Self { kind: PulseKind::Rectangular, a: vec![0.5] }
    }

    pub fn phase_alternating(a: Vec<f64>) -> Result<Self, PulseError> {
        let s = Self { kind: PulseKind::PhaseAlternating, a };
        s.validate()?;
        Ok(s)
    }

    /// Number of sidebands n for a list of length 2n+1.
    pub fn sidebands(&self) -> usize {
        self.a.len() / 2
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        if self.a.is_empty() || self.a.len() % 2 == 0 {
            return Err(PulseError::Validation(format!(
                "coefficient list needs odd length 2n+1, got {}",
                self.a.len()
            )));
        }
        if let Some(x) = self.a.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(PulseError::Validation(format!("coefficients must be finite and non-negative, got {x}")));
        }
        if self.kind == PulseKind::Rectangular && self.a.len() != 1 {
            return Err(PulseError::Validation("rectangular pulse takes a single coefficient".into()));
        }
        if self.a.iter().sum::<f64>() <= 0.0 {
            return Err(PulseError::Validation("pulse has zero length".into()));
        }
        Ok(())
    }

    /// Segments a_n..a_1, a_0 in π-time units with phases; `None` is a gap.
    fn left(&self, phase: f64) -> Vec<(f64, Option<f64>)> {
        let n = self.a.len() - 1;
        let mut out = Vec::with_capacity(n + 1);
        for (pos, &a) in self.a[..n].iter().enumerate() {
            let i = n - pos;
            if i % 2 == 1 {
                out.push((a, None));
            } else {
                let flip = (i / 2) % 2 == 1;
                out.push((a, Some(if flip { phase + PI } else { phase })));
            }
        }
        out.push((self.a[n], Some(phase)));
        out
    }

    /// Closing π/2: a_n..a_1, a_0.
    pub fn closing_half(&self, phase: f64) -> Vec<(f64, Option<f64>)> {
        self.left(phase)
    }

    /// Opening π/2: a_0, a_1..a_n.
    pub fn opening_half(&self, phase: f64) -> Vec<(f64, Option<f64>)> {
        let mut v = self.left(phase);
        v.reverse();
        v
    }

    /// Full π pulse: t_n..t_1, 2t_0, t_1..t_n (the centre split in two).
    pub fn full(&self, phase: f64) -> Vec<(f64, Option<f64>)> {
        let mut v = self.closing_half(phase);
        v.extend(self.opening_half(phase));
        v
    }

    /// Total π-pulse length in rectangular π times.
    pub fn duration_units(&self) -> f64 {
        2.0 * self.a.iter().sum::<f64>()
    }

    /// Driven time of the π pulse in rectangular π times.
    pub fn power_units(&self) -> f64 {
        let n = self.a.len() - 1;
        2.0 * self.a[..n].iter().enumerate().filter(|(pos, _)| (n - pos) % 2 == 0).map(|(_, a)| a).sum::<f64>()
            + 2.0 * self.a[n]
    }
}
