use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nvdnp_analysis::{
    absolute_polarization, diffusion_length, enhancement, fit_rotation_response, fit_stretched_exp, gamma_ref,
    nn_distance, protocol_power, thermal_polarization, tumbling, AnalysisError, FitMode, FitResult, ProtocolTiming,
    SampleSpec, TimeSeries, DIAMOND_DENSITY, GAMMA_C13,
};
use nvdnp_optim::{default_grid, evaluate, optimize, OptimError, OptimizerConfig};
use nvdnp_powder::{
    bandwidth_fraction, default_carrier, frequency_distribution, heating_analysis, optimize_carrier, simulate_spectrum,
    BroadeningModel, FractionGrid, FreqDistRequest, Lineshape, PowderError, Spectrum, SpectrumRequest, StrainSampling,
    SweepMode,
};
use nvdnp_pulse::{
    deepest_dip, inversion_profile, resonance_tau, scan_detuning, scan_tau, transfer_bandwidth, N14Params, PulseError,
    PulseShape, ScanPoint, SequenceSpec, SpinModel, Variant,
};
use nvdnp_spin::{NvSystem, SpinError, GAMMA_NV};
use thiserror::Error;

use crate::config::{Command, ConfigError, Dim, Value};
use crate::output::{csv_pairs, csv_table, sig9, Plot, Series};
use crate::schema::Params;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(format!("config {e}"))
    }
}

impl From<SpinError> for CliError {
    fn from(e: SpinError) -> Self {
        match e {
            SpinError::Singular(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PowderError> for CliError {
    fn from(e: PowderError) -> Self {
        match e {
            PowderError::Spin(s) => s.into(),
            PowderError::Validation(_) => CliError::Validation(e.to_string()),
            PowderError::Degenerate(_) => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PulseError> for CliError {
    fn from(e: PulseError) -> Self {
        match e {
            PulseError::Spin(s) => s.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<OptimError> for CliError {
    fn from(e: OptimError) -> Self {
        match e {
            OptimError::Pulse(p) => p.into(),
            OptimError::Validation(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Validation(_) => CliError::Validation(e.to_string()),
            AnalysisError::Degenerate(_) => CliError::Numeric(e.to_string()),
        }
    }
}

/// Files and messages produced by one command.
#[derive(Default)]
pub struct Outcome {
    /// (file name, contents); the first entry is the primary CSV.
    pub files: Vec<(String, String)>,
    pub plot: Option<Plot>,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when outputs were produced but the run still counts as a numeric failure.
    pub failure: Option<CliError>,
}

pub struct Ctx<'a> {
    pub p: Params<'a>,
    pub seed: u64,
    pub variant: Option<Variant>,
    pub base_dir: &'a Path,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn system(p: &Params) -> Result<NvSystem, CliError> {
    let e = p.num("system.e", 0.0);
    Ok(NvSystem::new(p.num("system.d", 2869.0), e, 0.0, p.num("system.gamma", GAMMA_NV))?)
}

fn broadening(p: &Params, lw: f64, ex: f64) -> BroadeningModel {
    BroadeningModel {
        lorentz_lw: p.num("broadening.lw", lw),
        ex_fwhm: p.num("broadening.ex_fwhm", ex),
        shape: match p.text("broadening.shape", "lorentzian") {
            "gaussian" => Lineshape::Gaussian,
            _ => Lineshape::Lorentzian,
        },
    }
}

fn xy_plot(title: &str, x_label: &str, y_label: &str, series: Vec<(&str, Vec<(f64, f64)>)>) -> Plot {
    Plot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        series: series.into_iter().map(|(n, points)| Series { name: n.into(), points, markers: false }).collect(),
    }
}

fn spectrum_outcome(sp: &Spectrum, name: &str, x_label: &str) -> Outcome {
    let pts = sp.axis.iter().cloned().zip(sp.intensity.iter().cloned()).collect();
    Outcome {
        files: vec![(name.into(), sp.to_csv())],
        plot: Some(xy_plot(name, x_label, "intensity", vec![("intensity", pts)])),
        summary: vec![format!("{} points, {} lines in window", sp.axis.len(), sp.meta.lines)],
        ..Default::default()
    }
}

pub fn spectrum(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let sys = system(p)?;
    let field_mode = p.text("sweep.mode", "field") == "field";
    let want = if field_mode { Dim::Field } else { Dim::Frequency };
    for key in ["sweep.min", "sweep.max"] {
        if let Some(d) = p.dim(key).filter(|d| *d != Dim::None && *d != want) {
            return Err(bad(format!(
                "config line {}: key '{key}' is in {} but the sweep axis is in {}",
                p.line(key),
                d.base_unit(),
                want.base_unit()
            )));
        }
    }
    let (mode, lo, hi, n) = if field_mode {
        (SweepMode::Field { nu: p.num("sweep.nu", 9600.0) }, 230.0, 460.0, 461)
    } else {
        (SweepMode::Frequency { b: p.num("sweep.b", 287.0) }, 8500.0, 10500.0, 1001)
    };
    let req = SpectrumRequest {
        mode,
        axis_min: p.num("sweep.min", lo),
        axis_max: p.num("sweep.max", hi),
        n_points: p.count("sweep.points", n),
        p_nv: p.num("sample.p_nv", 0.0),
        temperature: p.num("sample.temperature", 293.0),
        n_theta: p.count("grid.n_theta", 360),
        n_phi: p.count("grid.n_phi", 6),
        n_strain: p.count("grid.n_strain", 5),
        seed: c.seed,
        sampling: match p.text("grid.sampling", "quadrature") {
            "monte-carlo" => StrainSampling::MonteCarlo,
            _ => StrainSampling::Quadrature,
        },
    };
    let sp = simulate_spectrum(&sys, &req, &broadening(p, 0.4, 21.0))?;
    let mut out = spectrum_outcome(&sp, "spectrum.csv", if field_mode { "B (mT)" } else { "frequency (MHz)" });
    if req.p_nv > 0.0 {
        let zc: Vec<String> = sp.zero_crossings().iter().map(|x| sig9(*x)).collect();
        out.summary.push(format!("sign changes at {}", zc.join(", ")));
    }
    if sp.meta.lines == 0 {
        out.warnings.push("no resonance falls inside the sweep window".into());
    }
    Ok(out)
}

pub fn freq_dist(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let sys = system(p)?;
    let defaults = FreqDistRequest::new(0.0, 12000.0, 1201);
    let req = FreqDistRequest {
        axis_min: p.num("sweep.min", defaults.axis_min),
        axis_max: p.num("sweep.max", defaults.axis_max),
        n_points: p.count("sweep.points", defaults.n_points),
        n_theta: p.count("grid.n_theta", defaults.n_theta),
        n_phi: p.count("grid.n_phi", defaults.n_phi),
        n_strain: p.count("grid.n_strain", defaults.n_strain),
    };
    let sp = frequency_distribution(&sys, p.num("sweep.b", 287.0), &broadening(p, 0.0, 0.0), &req)?;
    Ok(spectrum_outcome(&sp, "freq-dist.csv", "frequency (MHz)"))
}

pub fn fraction(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let sys = system(p)?;
    let b = p.num("window.b", 287.0);
    let dp = p.num("window.delta_pol", 15.0);
    let br = broadening(p, 0.4, 21.0);
    let d = FractionGrid::default();
    let grid = FractionGrid {
        n_theta: p.count("grid.n_theta", d.n_theta),
        n_phi: p.count("grid.n_phi", d.n_phi),
        n_strain: p.count("grid.n_strain", d.n_strain),
    };
    let mut carrier = p.opt("window.carrier").unwrap_or_else(|| default_carrier(&sys, b, dp));
    let f = if p.text("window.optimize", "false") == "true" {
        let lo = carrier - p.num("window.search_below", 20.0);
        let hi = carrier + p.num("window.search_above", 10.0);
        let (best, f) = optimize_carrier(&sys, b, dp, &br, &grid, lo, hi, 13)?;
        carrier = best;
        f
    } else {
        bandwidth_fraction(&sys, carrier, b, dp, &br, &grid)?
    };
    let csv = csv_pairs(&[
        ("carrier_mhz", carrier),
        ("field_mt", b),
        ("delta_pol_mhz", dp),
        ("fraction_s1s2", f.s1s2),
        ("fraction_s2s3", f.s2s3),
    ]);
    Ok(Outcome {
        files: vec![("fraction.csv".into(), csv)],
        summary: vec![
            format!("carrier {:.3} MHz, window {dp} MHz at {b} mT", carrier),
            format!("fraction of NV centers in window: s1-s2 {:.3}%, s2-s3 {:.3}%", 100.0 * f.s1s2, 100.0 * f.s2s3),
        ],
        ..Default::default()
    })
}

pub fn heat(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let sys = system(p)?;
    let (Some(powers), Some(b12)) = (p.list("powers"), p.list("b12")) else {
        return Err(bad("heat needs both 'powers' and 'b12' lists"));
    };
    if powers.len() != b12.len() {
        return Err(bad(format!(
            "config line {}: 'powers' has {} entries but 'b12' has {}",
            p.line("b12"),
            powers.len(),
            b12.len()
        )));
    }
    let peaks: Vec<(f64, f64)> = powers.iter().cloned().zip(b12.iter().cloned()).collect();
    let fit = heating_analysis(&peaks, p.num("nu", 9600.0), sys.gamma_bar)?;
    let at = p.num("at_power", 420.0);
    let rows: Vec<Vec<String>> =
        fit.points.iter().map(|q| vec![sig9(q.power), sig9(q.d), sig9(q.delta_t)]).collect();
    let plot = Plot {
        title: "heating".into(),
        x_label: "laser power (mW)".into(),
        y_label: "temperature rise (K)".into(),
        series: vec![
            Series { name: "data".into(), points: fit.points.iter().map(|q| (q.power, q.delta_t)).collect(), markers: true },
            Series {
                name: "fit".into(),
                points: vec![(0.0, 0.0), (at.max(powers.iter().cloned().fold(0.0, f64::max)), fit.delta_t_at(at))],
                markers: false,
            },
        ],
    };
    Ok(Outcome {
        files: vec![("heat.csv".into(), csv_table(&["power", "d", "delta_t"], &rows))],
        plot: Some(plot),
        summary: vec![
            format!("heating rate {:.4} K/mW, D(0) = {:.3} MHz", fit.rate, fit.d0),
            format!("temperature rise at {at} mW: {:.1} K", fit.delta_t_at(at)),
        ],
        ..Default::default()
    })
}

fn variant(c: &Ctx) -> Result<Variant, CliError> {
    if let Some(v) = c.variant {
        return Ok(v);
    }
    Ok(match c.p.value("sequence.variant") {
        None => Variant::Standard,
        Some(Value::Text(t)) if t == "phase-offset" => Variant::PhaseOffset,
        Some(Value::Num(q)) => Variant::Custom(q.value),
        Some(_) => Variant::Standard,
    })
}

fn pulse_shape(p: &Params, key: &str) -> Result<PulseShape, CliError> {
    match p.value(key) {
        Some(Value::List(qs)) => {
            let a: Vec<f64> = qs.iter().map(|q| q.value).collect();
            PulseShape::phase_alternating(a).map_err(|e| bad(format!("config line {}: key '{key}': {e}", p.line(key))))
        }
        Some(Value::Num(q)) => {
            PulseShape::phase_alternating(vec![q.value]).map_err(|e| bad(format!("config line {}: key '{key}': {e}", p.line(key))))
        }
        _ => Ok(PulseShape::rectangular()),
    }
}

fn spin_model(c: &Ctx, a_zx: f64) -> Result<SpinModel, CliError> {
    let p = &c.p;
    let larmor = p.num("model.larmor", 3.072);
    let m = match p.text("model.kind", "reduced") {
        "n14" => SpinModel::FullN14 {
            sys: system(p)?,
            b: p.num("model.b", 287.0),
            theta: p.num("model.theta", FRAC_PI_2),
            omega_i: larmor,
            params: N14Params::default(),
        },
        _ => SpinModel::Reduced {
            a_zx: p.num("model.a_zx", a_zx),
            a_zy: p.num("model.a_zy", 0.0),
            a_zz: p.num("model.a_zz", 0.0),
            omega_i: larmor,
        },
    };
    m.validate()?;
    Ok(m)
}

fn sequence(c: &Ctx, n: f64, omega1: f64) -> Result<SequenceSpec, CliError> {
    let p = &c.p;
    let mut spec = SequenceSpec::new(variant(c)?, n, p.count("sequence.m", 20), p.num("sequence.omega1", omega1));
    spec.detuning = p.num("sequence.detuning", 0.0);
    spec.pulse = pulse_shape(p, "sequence.pulse")?;
    Ok(spec)
}

fn scan_csv(points: &[ScanPoint]) -> String {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|s| vec![sig9(s.x), sig9(s.nv_polarization), sig9(s.nuclear_polarization)])
        .collect();
    csv_table(&["x", "nv_polarization", "nuclear_polarization"], &rows)
}

fn scan_plot(title: &str, x_label: &str, points: &[ScanPoint]) -> Plot {
    xy_plot(
        title,
        x_label,
        "polarization",
        vec![
            ("NV", points.iter().map(|s| (s.x, s.nv_polarization)).collect()),
            ("nuclear", points.iter().map(|s| (s.x, s.nuclear_polarization)).collect()),
        ],
    )
}

/// Local minima at least `min_depth` below the scan maximum that are also
/// the lowest point within ±`window` of themselves; this drops the sinc
/// sidelobes flanking each resonance.
pub fn resonance_dips(pts: &[ScanPoint], min_depth: f64, window: f64) -> Vec<f64> {
    let y: Vec<f64> = pts.iter().map(|s| s.nv_polarization).collect();
    let top = y.iter().cloned().fold(f64::MIN, f64::max);
    let mut out = Vec::new();
    for k in 1..y.len().saturating_sub(1) {
        if !(y[k] < y[k - 1] && y[k] <= y[k + 1]) || top - y[k] < min_depth {
            continue;
        }
        let x = pts[k].x;
        let lowest = pts.iter().filter(|s| (s.x - x).abs() <= window).all(|s| s.nv_polarization >= y[k]);
        if lowest {
            out.extend(deepest_dip(pts, pts[k - 1].x, pts[k + 1].x));
        }
    }
    out
}

pub fn pulsepol_tau(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let model = spin_model(c, 0.08)?;
    let spec = sequence(c, 1.0, 100.0)?;
    let f = model.omega_i();
    let (t0, t1) = match (p.opt("scan.tau_min"), p.opt("scan.tau_max")) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => (resonance_tau(p.num("scan.n_min", 0.3), f)?, resonance_tau(p.num("scan.n_max", 8.0), f)?),
        _ => return Err(bad("give both scan.tau_min and scan.tau_max, or neither")),
    };
    if p.has("scan.tau_min") && (p.has("scan.n_min") || p.has("scan.n_max")) {
        return Err(bad("scan range given both as tau and as n"));
    }
    let pts = scan_tau(&model, &spec, t0, t1, p.count("scan.points", 386))?;
    let minima = resonance_dips(&pts, p.num("scan.min_depth", 0.003), p.num("scan.window", 0.3) / (2.0 * f));
    let orders: Vec<String> = minima.iter().map(|t| format!("{:.2}", 2.0 * f * t)).collect();
    Ok(Outcome {
        files: vec![("pulsepol-tau.csv".into(), scan_csv(&pts))],
        plot: Some(scan_plot("PulsePol tau scan", "tau (us)", &pts)),
        summary: vec![format!("NV polarization minima at n = {}", if orders.is_empty() { "none".into() } else { orders.join(", ") })],
        ..Default::default()
    })
}

pub fn pulsepol_detuning(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let model = spin_model(c, 0.02)?;
    let v = variant(c)?;
    let n = match (p.opt("sequence.n"), v) {
        (Some(n), _) => n,
        (None, Variant::Standard) => 3.0,
        (None, Variant::PhaseOffset) => 4.5,
        (None, Variant::Custom(_)) => return Err(bad("a custom phase needs sequence.n")),
    };
    let spec = sequence(c, n, 10.5)?;
    let om = spec.omega1;
    let lo = p.num("scan.min", -1.5 * om);
    let hi = p.num("scan.max", 1.5 * om);
    let k = p.count("scan.points", 61);
    if !(lo < hi) || k < 2 {
        return Err(bad(format!("bad detuning scan [{lo}, {hi}] with {k} points")));
    }
    let ds: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let pts = scan_detuning(&model, &spec, &ds)?;
    let thr = p.num("scan.threshold", 0.5);
    let span = lo.abs().max(hi.abs());
    let mut out = Outcome {
        files: vec![("pulsepol-detuning.csv".into(), scan_csv(&pts))],
        plot: Some(scan_plot("PulsePol detuning scan", "detuning (MHz)", &pts)),
        ..Default::default()
    };
    match transfer_bandwidth(&model, &spec, thr, span, k.max(3)) {
        Ok(bw) => {
            out.summary.push(format!(
                "transfer band [{:.3}, {:.3}] MHz, width {:.3} MHz = {:.3} x omega1",
                bw.lower,
                bw.upper,
                bw.width,
                bw.width / om
            ));
            if !bw.bounded {
                out.warnings.push("transfer band reaches the edge of the scan".into());
            }
        }
        Err(e) => out.warnings.push(format!("no transfer bandwidth: {e}")),
    }
    Ok(out)
}

pub fn inversion(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let pulse = pulse_shape(p, "pulse")?;
    let om = p.num("omega1", 10.5);
    let lo = p.num("scan.min", -1.5 * om);
    let hi = p.num("scan.max", 1.5 * om);
    let k = p.count("scan.points", 301);
    if !(lo < hi) || k < 2 {
        return Err(bad(format!("bad detuning scan [{lo}, {hi}] with {k} points")));
    }
    let ds: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let sz = inversion_profile(&pulse, om, &ds)?;
    let rows: Vec<Vec<String>> = ds.iter().zip(&sz).map(|(d, s)| vec![sig9(*d), sig9(*s)]).collect();
    Ok(Outcome {
        files: vec![("inversion.csv".into(), csv_table(&["x", "sigma_z"], &rows))],
        plot: Some(xy_plot("inversion", "detuning (MHz)", "<sigma_z>", vec![("sigma_z", ds.iter().cloned().zip(sz).collect())])),
        ..Default::default()
    })
}

pub fn pulse_opt(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let om = p.num("omega1", 10.5);
    let n = p.count("n_sidebands", 2);
    let base = OptimizerConfig::new(n, om);
    let cfg = OptimizerConfig {
        fidelity_threshold: p.num("threshold", base.fidelity_threshold),
        delta_grid: default_grid(om, p.count("grid_points", 81), p.num("grid_span", 1.5)),
        budget: p.count("budget", base.budget),
        seed: c.seed,
        restarts: p.count("restarts", base.restarts),
        max_duration: p.opt("max_duration"),
        warm_starts: p.list("warm_start").into_iter().collect(),
        ..base
    };
    let r = optimize(&cfg, om)?;
    let best = &r.best;
    let (dur, pow) = best.accounting();
    let mut out = Outcome {
        files: vec![("pulse-opt.csv".into(), format!("{}\n{}\n", best.csv_header(), best.csv_row()))],
        summary: vec![
            format!("a = [{}]", best.a_list.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join(", ")),
            format!(
                "half-width {:.4} MHz = {:.4} x omega1, duration {dur:.3}, power {pow:.3}, {} evaluations",
                best.bandwidth,
                best.bandwidth / om,
                r.evaluations
            ),
        ],
        ..Default::default()
    };
    if !r.feasible {
        out.warnings.push("no candidate inverts at zero detuning; reporting the rectangular pulse".into());
    }
    let pulse = if best.a_list.len() == 1 { PulseShape::rectangular() } else { PulseShape::phase_alternating(best.a_list.clone())? };
    let ds = default_grid(om, 301, p.num("grid_span", 1.5));
    let sz = inversion_profile(&pulse, om, &ds)?;
    out.plot = Some(xy_plot(
        "optimized pulse",
        "detuning (MHz)",
        "inversion fidelity",
        vec![("fidelity", ds.iter().zip(&sz).map(|(d, s)| (*d, 0.5 * (1.0 - s))).collect())],
    ));
    // cross-check the reported band against a fresh evaluation
    let check = evaluate(&best.a_list, om, cfg.fidelity_threshold, &cfg.delta_grid)?;
    if (check.bandwidth - best.bandwidth).abs() > 1e-9 {
        out.warnings.push("re-evaluated bandwidth differs from the search result".into());
    }
    Ok(out)
}

fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    let header = rd.headers().map_err(|e| bad(format!("{}: {e}", path.display())))?.clone();
    let cols: Vec<&str> = header.iter().map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "t" || cols[1] != "y" || (cols.len() == 3 && cols[2] != "sigma") || cols.len() > 3 {
        return Err(bad(format!("{}: header must be 't,y' or 't,y,sigma', found '{}'", path.display(), cols.join(","))));
    }
    let (mut t, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("{} row {}: column {} is not a number", path.display(), k + 2, cols[i])))
        };
        t.push(num(0)?);
        y.push(num(1)?);
        if cols.len() == 3 {
            s.push(num(2)?);
        }
    }
    Ok(TimeSeries::new(t, y, (cols.len() == 3).then_some(s))?)
}

fn fit_curve(model: &str, f: &FitResult, x: f64) -> f64 {
    let g = |n| f.get(n).unwrap_or(f64::NAN);
    match model {
        "rotation" => g("s0") + g("a") * (1.0 - (-(x / g("omega_r0")).powf(g("beta"))).exp()),
        "decay" => g("A") * (-(x / g("T")).powf(g("beta"))).exp(),
        _ => g("A") * (1.0 - (-(x / g("T")).powf(g("beta"))).exp()),
    }
}

pub fn fit(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let input = c.base_dir.join(p.text("input", ""));
    let series = read_series(&input)?;
    let model = p.text("model", "saturation");
    let f = match model {
        "rotation" => fit_rotation_response(&series)?,
        "decay" => fit_stretched_exp(&series, FitMode::Decay)?,
        _ => fit_stretched_exp(&series, FitMode::Saturation)?,
    };
    let mut rows: Vec<Vec<String>> =
        f.names.iter().zip(f.params.iter().zip(&f.std_errors)).map(|(n, (v, e))| vec![n.to_string(), sig9(*v), sig9(*e)]).collect();
    rows.push(vec!["residual_norm".into(), sig9(f.residual_norm), String::new()]);
    let lo = series.t[0];
    let hi = series.t[series.len() - 1];
    let curve: Vec<(f64, f64)> = (0..=200).map(|k| lo + (hi - lo) * k as f64 / 200.0).map(|x| (x, fit_curve(model, &f, x))).collect();
    let mut out = Outcome {
        files: vec![("fit.csv".into(), csv_table(&["parameter", "value", "std_error"], &rows))],
        plot: Some(Plot {
            title: format!("{model} fit"),
            x_label: "t".into(),
            y_label: "y".into(),
            series: vec![
                Series { name: "data".into(), points: series.t.iter().cloned().zip(series.y.iter().cloned()).collect(), markers: true },
                Series { name: "fit".into(), points: curve, markers: false },
            ],
        }),
        summary: f.names.iter().zip(&f.params).zip(&f.std_errors).map(|((n, v), e)| format!("{n} = {} +- {}", sig9(*v), sig9(*e))).collect(),
        ..Default::default()
    };
    if let Some(note) = &f.note {
        out.warnings.push(note.clone());
    }
    if !f.converged {
        out.failure = Some(CliError::Numeric(format!("fit did not converge: {}", f.note.as_deref().unwrap_or("unknown reason"))));
    }
    Ok(out)
}

pub fn dnp_enhance(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let t = p.num("temperature", 293.0);
    let g = gamma_ref(&SampleSpec::diamond_13c(p.num("sample.mass_mg", 12.0)), &SampleSpec::water_1h(p.num("reference.mass_mg", 40.0)))?;
    let b_det = p.num("detection.b", 1004.0) * 1e-3;
    let b_pol = p.num("polarization.b", 287.0) * 1e-3;
    let p_det = thermal_polarization(b_det, t, GAMMA_C13)?;
    let p_pol = thermal_polarization(b_pol, t, GAMMA_C13)?;
    let p_abs = absolute_polarization(p.num("signal.hp", 1.407), p.num("signal.ref", 5.420), g, p_det)?;
    let eps = enhancement(p_abs, p_pol)?;
    Ok(Outcome {
        files: vec![(
            "dnp-enhance.csv".into(),
            csv_pairs(&[
                ("gamma_ref", g),
                ("thermal_polarization_detection", p_det),
                ("thermal_polarization_polarizing", p_pol),
                ("absolute_polarization", p_abs),
                ("enhancement", eps),
            ]),
        )],
        summary: vec![
            format!("gamma_ref = 1/{:.0}", 1.0 / g),
            format!("polarization {:.3e} ({:.3}%), enhancement {:.0} over thermal at {:.3} T", p_abs, 100.0 * p_abs, eps, b_pol),
        ],
        ..Default::default()
    })
}

pub fn estimate(c: &Ctx) -> Result<Outcome, CliError> {
    let p = &c.p;
    let mut rows: Vec<(String, f64)> = Vec::new();
    let l = diffusion_length(p.num("diffusion.coefficient", 6.7e-15), p.num("diffusion.time", 30e6) * 1e-6)?;
    rows.push(("diffusion_length_nm".into(), l));
    let conc = p.list("concentration.values").unwrap_or_else(|| vec![8.2, 3.4]);
    for x in &conc {
        rows.push((format!("nn_distance_nm_at_{}ppm", sig9(*x)), nn_distance(*x, DIAMOND_DENSITY)?));
    }
    let tb = tumbling(
        p.num("tumbling.radius_nm", 80.0),
        p.num("tumbling.viscosity", 1.4),
        p.num("tumbling.temperature", 293.0),
        p.num("tumbling.window", 2.5f64.to_radians()),
        p.num("tumbling.cycle", 1500.0) * 1e-3,
    )?;
    rows.push(("rotational_diffusion_per_s".into(), tb.d_r));
    rows.push(("residence_ms".into(), tb.residence_ms));
    rows.push(("cycles_in_residence".into(), tb.cycles as f64));
    let m = p.count("protocol.m", 68);
    let pt = ProtocolTiming { t_laser: p.num("protocol.t_laser", 400.0), tau_srt: p.num("protocol.tau_srt", 1500.0), m };
    let avg = protocol_power(&pt, p.num("protocol.peak_power", 1600.0))?;
    rows.push(("average_laser_power_mw".into(), avg));
    rows.push(("temperature_rise_k".into(), p.num("heating.rate", 0.122) * avg));
    let tau = resonance_tau(p.num("protocol.n", 4.5), p.num("protocol.larmor", 3.072))?;
    rows.push(("sequence_time_us".into(), m as f64 * tau));
    let pairs: Vec<(&str, f64)> = rows.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(Outcome {
        files: vec![("estimate.csv".into(), csv_pairs(&pairs))],
        summary: rows.iter().map(|(k, v)| format!("{k} = {}", sig9(*v))).collect(),
        ..Default::default()
    })
}

pub fn dispatch(cmd: Command, c: &Ctx) -> Result<Outcome, CliError> {
    match cmd {
        Command::Spectrum => spectrum(c),
        Command::FreqDist => freq_dist(c),
        Command::Fraction => fraction(c),
        Command::Heat => heat(c),
        Command::PulsepolTau => pulsepol_tau(c),
        Command::PulsepolDetuning => pulsepol_detuning(c),
        Command::Inversion => inversion(c),
        Command::PulseOpt => pulse_opt(c),
        Command::Fit => fit(c),
        Command::DnpEnhance => dnp_enhance(c),
        Command::Estimate => estimate(c),
    }
}
