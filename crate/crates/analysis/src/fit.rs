use nalgebra::{DMatrix, DVector};

use crate::AnalysisError;

pub const BETA_MAX: f64 = 2.0;
const BETA_MIN: f64 = 1e-3;

/// Sampled signal; `t` strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self, AnalysisError> {
        if t.len() != y.len() || t.len() < 3 {
            return Err(AnalysisError::Validation(format!(
                "need equal-length t and y with at least 3 points, got {} and {}",
                t.len(),
                y.len()
            )));
        }
        if t.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(AnalysisError::Validation("series contains non-finite values".into()));
        }
        if let Some(k) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(AnalysisError::Validation(format!("t not strictly increasing at index {}", k + 1)));
        }
        if let Some(s) = &sigma {
            if s.len() != t.len() || s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(AnalysisError::Validation("sigma must match t in length and be positive".into()));
            }
        }
        Ok(Self { t, y, sigma })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// A(1 − exp(−(t/T)^β))
    Saturation,
    /// A·exp(−(t/T)^β)
    Decay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub names: Vec<&'static str>,
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// √(Σ w·r²)
    pub residual_norm: f64,
    pub converged: bool,
    pub note: Option<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|k| self.params[k])
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| *n == name).map(|k| self.std_errors[k])
    }
}

/// Residual model: values and Jacobian rows at each t.
trait Model {
    fn eval(&self, t: f64, p: &[f64]) -> (f64, Vec<f64>);
    /// Project p back into the admissible box.
    fn project(&self, p: &mut [f64]);
}

struct Stretched {
    mode: FitMode,
}

/// (u, ∂u/∂T, ∂u/∂β) for u = exp(−(t/T)^β).
fn stretched_core(t: f64, tc: f64, beta: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    let x = t / tc;
    let xb = x.powf(beta);
    let u = (-xb).exp();
    let du_dt = u * xb * beta / tc;
    let du_db = -u * xb * x.ln();
    (u, du_dt, du_db)
}

impl Model for Stretched {
    fn eval(&self, t: f64, p: &[f64]) -> (f64, Vec<f64>) {
        let (a, tc, beta) = (p[0], p[1], p[2]);
        let (u, ut, ub) = stretched_core(t, tc, beta);
        match self.mode {
            FitMode::Saturation => (a * (1.0 - u), vec![1.0 - u, -a * ut, -a * ub]),
            FitMode::Decay => (a * u, vec![u, a * ut, a * ub]),
        }
    }

    fn project(&self, p: &mut [f64]) {
        p[1] = p[1].max(1e-12);
        p[2] = p[2].clamp(BETA_MIN, BETA_MAX);
    }
}

struct Rotation;

impl Model for Rotation {
    fn eval(&self, w: f64, p: &[f64]) -> (f64, Vec<f64>) {
        let (s0, a, w0, beta) = (p[0], p[1], p[2], p[3]);
        let (u, ut, ub) = stretched_core(w, w0, beta);
        (s0 + a * (1.0 - u), vec![1.0, 1.0 - u, -a * ut, -a * ub])
    }

    fn project(&self, p: &mut [f64]) {
        p[2] = p[2].max(1e-12);
        p[3] = p[3].clamp(BETA_MIN, BETA_MAX);
    }
}

struct LmOutcome {
    p: Vec<f64>,
    cost: f64,
    jtj: DMatrix<f64>,
    converged: bool,
}

fn weights(s: &TimeSeries) -> Vec<f64> {
    match &s.sigma {
        Some(sig) => sig.iter().map(|x| 1.0 / (x * x)).collect(),
        None => vec![1.0; s.len()],
    }
}

fn linearize(m: &dyn Model, s: &TimeSeries, w: &[f64], p: &[f64]) -> (DVector<f64>, DMatrix<f64>, f64) {
    let n = s.len();
    let k = p.len();
    let mut r = DVector::zeros(n);
    let mut j = DMatrix::zeros(n, k);
    let mut cost = 0.0;
    for i in 0..n {
        let (v, g) = m.eval(s.t[i], p);
        let sw = w[i].sqrt();
        r[i] = sw * (s.y[i] - v);
        cost += r[i] * r[i];
        for c in 0..k {
            j[(i, c)] = sw * g[c];
        }
    }
    (r, j, cost)
}

/// Levenberg-Marquardt with Marquardt diagonal scaling and box projection.
fn levenberg_marquardt(m: &dyn Model, s: &TimeSeries, p0: &[f64], max_iter: usize) -> LmOutcome {
    let w = weights(s);
    let mut p = p0.to_vec();
    m.project(&mut p);
    let (mut r, mut j, mut cost) = linearize(m, s, &w, &p);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..max_iter {
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for d in 0..p.len() {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            m.project(&mut trial);
            let (r2, j2, c2) = linearize(m, s, &w, &trial);
            if c2.is_finite() && c2 <= cost {
                let rel = (cost - c2) / cost.max(1e-300);
                let moved = trial.iter().zip(&p).map(|(a, b)| (a - b).abs() / b.abs().max(1e-12)).fold(0.0, f64::max);
                p = trial;
                r = r2;
                j = j2;
                cost = c2;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                if rel < 1e-14 || moved < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            // no downhill step at any damping: a stationary point
            converged = lambda > 1e10 || cost < 1e-28;
            break;
        }
        if converged {
            break;
        }
    }
    let jtj = j.transpose() * &j;
    LmOutcome { p, cost, jtj, converged }
}

fn finish(
    names: Vec<&'static str>,
    s: &TimeSeries,
    best: LmOutcome,
    mut note: Option<String>,
) -> FitResult {
    let k = best.p.len();
    let dof = s.len().saturating_sub(k).max(1) as f64;
    let scale = if s.sigma.is_some() { 1.0 } else { best.cost / dof };
    let (errs, singular) = match best.jtj.clone().try_inverse() {
        Some(cov) => ((0..k).map(|d| (scale * cov[(d, d)]).max(0.0).sqrt()).collect(), false),
        None => (vec![f64::NAN; k], true),
    };
    let finite = best.p.iter().all(|v| v.is_finite());
    let mut converged = best.converged && finite;
    if singular {
        converged = false;
        note.get_or_insert_with(|| "singular normal matrix; parameters not identifiable".into());
    }
    if !converged && note.is_none() {
        note = Some("iteration limit reached before convergence".into());
    }
    FitResult { names, params: best.p, std_errors: errs, residual_norm: best.cost.sqrt(), converged, note }
}

/// Abscissa where y first crosses `level` (linear interpolation).
fn crossing(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    for k in 1..t.len() {
        let (a, b) = (y[k - 1] - level, y[k] - level);
        if a == 0.0 {
            return Some(t[k - 1]);
        }
        if a * b < 0.0 {
            return Some(t[k - 1] + a / (a - b) * (t[k] - t[k - 1]));
        }
    }
    None
}

/// Stretched-exponential fit, multi-started from β ∈ {0.5, 0.7, 1.0}.
pub fn fit_stretched_exp(s: &TimeSeries, mode: FitMode) -> Result<FitResult, AnalysisError> {
    if s.len() < 4 {
        return Err(AnalysisError::Validation(format!("need at least 4 points, got {}", s.len())));
    }
    let (a0, frac) = match mode {
        FitMode::Saturation => (*s.y.last().unwrap(), 1.0 - (-1f64).exp()),
        FitMode::Decay => (s.y[0], (-1f64).exp()),
    };
    if a0 == 0.0 || s.y.iter().all(|v| *v == 0.0) {
        return Err(AnalysisError::Degenerate("signal is identically zero".into()));
    }
    let t_pos: Vec<f64> = s.t.iter().cloned().filter(|t| *t > 0.0).collect();
    let t0 = crossing(&s.t, &s.y, frac * a0)
        .filter(|t| *t > 0.0)
        .unwrap_or_else(|| t_pos.get(t_pos.len() / 2).cloned().unwrap_or(1.0));
    let model = Stretched { mode };
    let best = [0.5, 0.7, 1.0]
        .iter()
        .map(|&b| levenberg_marquardt(&model, s, &[a0, t0, b], 500))
        .min_by(|x, y| x.cost.total_cmp(&y.cost))
        .unwrap();
    Ok(finish(vec!["A", "T", "beta"], s, best, None))
}

/// s(ω) = s0 + a(1 − exp(−(ω/ω0)^β)); `t` holds the rotation rate.
pub fn fit_rotation_response(s: &TimeSeries) -> Result<FitResult, AnalysisError> {
    if s.len() < 5 {
        return Err(AnalysisError::Validation(format!("need at least 5 points, got {}", s.len())));
    }
    if s.t[0] != 0.0 {
        return Err(AnalysisError::Validation("rotation response needs a point at zero rate".into()));
    }
    let s0 = s.y[0];
    let a0 = *s.y.last().unwrap() - s0;
    let span = s.y.iter().fold(0.0f64, |m, v| m.max((v - s0).abs()));
    let scale = s.y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    if span <= 1e-9 * scale || a0.abs() < 1e-9 * scale {
        let mean = s.y.iter().sum::<f64>() / s.len() as f64;
        let best = LmOutcome {
            p: vec![mean, 0.0, f64::NAN, f64::NAN],
            cost: s.y.iter().map(|v| (v - mean).powi(2)).sum(),
            jtj: DMatrix::zeros(4, 4),
            converged: false,
        };
        let note = Some("flat response: omega_r0 and beta are unidentifiable".into());
        return Ok(finish(vec!["s0", "a", "omega_r0", "beta"], s, best, note));
    }
    let w0 = crossing(&s.t, &s.y, s0 + (1.0 - (-1f64).exp()) * a0)
        .filter(|w| *w > 0.0)
        .unwrap_or(s.t[s.len() / 2]);
    let best = [0.5, 0.7, 1.0]
        .iter()
        .map(|&b| levenberg_marquardt(&Rotation, s, &[s0, a0, w0, b], 800))
        .min_by(|x, y| x.cost.total_cmp(&y.cost))
        .unwrap();
    Ok(finish(vec!["s0", "a", "omega_r0", "beta"], s, best, None))
}
