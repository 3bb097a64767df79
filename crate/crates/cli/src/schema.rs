use crate::config::{Command, ConfigError, Dim, Quantity, RunConfig, Value};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    /// Number in the given dimension; a bare number is taken in its base unit.
    Num(Dim),
    /// Number in any of the listed dimensions.
    NumOf(&'static [Dim]),
    /// Non-negative integer.
    Count,
    List(Dim),
    /// One of the listed words.
    Word(&'static [&'static str]),
    Path,
    /// `rectangular` or a list of sideband coefficients.
    Pulse,
    /// `standard`, `phase-offset`, or a phase angle.
    Variant,
}

type Keys = &'static [(&'static str, Kind)];

const COMMON: Keys = &[("seed", Kind::Count), ("output", Kind::Path)];

const SYSTEM: Keys = &[
    ("system.d", Kind::Num(Dim::Frequency)),
    ("system.e", Kind::Num(Dim::Frequency)),
    ("system.gamma", Kind::Num(Dim::None)),
];

const BROADENING: Keys = &[
    ("broadening.lw", Kind::Num(Dim::Field)),
    ("broadening.ex_fwhm", Kind::Num(Dim::Frequency)),
    ("broadening.shape", Kind::Word(&["lorentzian", "gaussian"])),
];

const GRID: Keys = &[("grid.n_theta", Kind::Count), ("grid.n_phi", Kind::Count), ("grid.n_strain", Kind::Count)];

const SPECTRUM: Keys = &[
    ("grid.sampling", Kind::Word(&["quadrature", "monte-carlo"])),
    ("sweep.mode", Kind::Word(&["field", "frequency"])),
    ("sweep.nu", Kind::Num(Dim::Frequency)),
    ("sweep.b", Kind::Num(Dim::Field)),
    ("sweep.min", Kind::NumOf(&[Dim::Field, Dim::Frequency])),
    ("sweep.max", Kind::NumOf(&[Dim::Field, Dim::Frequency])),
    ("sweep.points", Kind::Count),
    ("sample.p_nv", Kind::Num(Dim::None)),
    ("sample.temperature", Kind::Num(Dim::Temperature)),
];

const FREQ_DIST: Keys = &[
    ("sweep.b", Kind::Num(Dim::Field)),
    ("sweep.min", Kind::Num(Dim::Frequency)),
    ("sweep.max", Kind::Num(Dim::Frequency)),
    ("sweep.points", Kind::Count),
];

const FRACTION: Keys = &[
    ("window.b", Kind::Num(Dim::Field)),
    ("window.delta_pol", Kind::Num(Dim::Frequency)),
    ("window.carrier", Kind::Num(Dim::Frequency)),
    ("window.optimize", Kind::Word(&["true", "false"])),
    ("window.search_below", Kind::Num(Dim::Frequency)),
    ("window.search_above", Kind::Num(Dim::Frequency)),
];

const HEAT: Keys = &[
    ("nu", Kind::Num(Dim::Frequency)),
    ("powers", Kind::List(Dim::Power)),
    ("b12", Kind::List(Dim::Field)),
    ("at_power", Kind::Num(Dim::Power)),
];

const MODEL: Keys = &[
    ("model.kind", Kind::Word(&["reduced", "n14"])),
    ("model.a_zx", Kind::Num(Dim::Frequency)),
    ("model.a_zy", Kind::Num(Dim::Frequency)),
    ("model.a_zz", Kind::Num(Dim::Frequency)),
    ("model.larmor", Kind::Num(Dim::Frequency)),
    ("model.b", Kind::Num(Dim::Field)),
    ("model.theta", Kind::Num(Dim::Angle)),
];

const SEQUENCE: Keys = &[
    ("sequence.variant", Kind::Variant),
    ("sequence.m", Kind::Count),
    ("sequence.omega1", Kind::Num(Dim::Frequency)),
    ("sequence.detuning", Kind::Num(Dim::Frequency)),
    ("sequence.pulse", Kind::Pulse),
];

const TAU_SCAN: Keys = &[
    ("scan.n_min", Kind::Num(Dim::None)),
    ("scan.n_max", Kind::Num(Dim::None)),
    ("scan.tau_min", Kind::Num(Dim::Time)),
    ("scan.tau_max", Kind::Num(Dim::Time)),
    ("scan.points", Kind::Count),
    ("scan.min_depth", Kind::Num(Dim::None)),
    ("scan.window", Kind::Num(Dim::None)),
];

const DETUNING_ORDER: Keys = &[("sequence.n", Kind::Num(Dim::None))];

const DETUNING_SCAN: Keys = &[
    ("scan.min", Kind::Num(Dim::Frequency)),
    ("scan.max", Kind::Num(Dim::Frequency)),
    ("scan.points", Kind::Count),
    ("scan.threshold", Kind::Num(Dim::None)),
];

const INVERSION: Keys = &[("pulse", Kind::Pulse), ("omega1", Kind::Num(Dim::Frequency))];

const PULSE_OPT: Keys = &[
    ("n_sidebands", Kind::Count),
    ("omega1", Kind::Num(Dim::Frequency)),
    ("threshold", Kind::Num(Dim::None)),
    ("grid_points", Kind::Count),
    ("grid_span", Kind::Num(Dim::None)),
    ("budget", Kind::Count),
    ("restarts", Kind::Count),
    ("max_duration", Kind::Num(Dim::None)),
    ("warm_start", Kind::List(Dim::None)),
];

const FIT: Keys = &[("input", Kind::Path), ("model", Kind::Word(&["saturation", "decay", "rotation"]))];

const DNP: Keys = &[
    ("sample.mass_mg", Kind::Num(Dim::None)),
    ("reference.mass_mg", Kind::Num(Dim::None)),
    ("detection.b", Kind::Num(Dim::Field)),
    ("polarization.b", Kind::Num(Dim::Field)),
    ("temperature", Kind::Num(Dim::Temperature)),
    ("signal.hp", Kind::Num(Dim::None)),
    ("signal.ref", Kind::Num(Dim::None)),
];

const ESTIMATE: Keys = &[
    ("diffusion.coefficient", Kind::Num(Dim::None)),
    ("diffusion.time", Kind::Num(Dim::Time)),
    ("concentration.values", Kind::List(Dim::Concentration)),
    ("tumbling.radius_nm", Kind::Num(Dim::None)),
    ("tumbling.viscosity", Kind::Num(Dim::None)),
    ("tumbling.temperature", Kind::Num(Dim::Temperature)),
    ("tumbling.window", Kind::Num(Dim::Angle)),
    ("tumbling.cycle", Kind::Num(Dim::Time)),
    ("protocol.t_laser", Kind::Num(Dim::Time)),
    ("protocol.tau_srt", Kind::Num(Dim::Time)),
    ("protocol.m", Kind::Count),
    ("protocol.peak_power", Kind::Num(Dim::Power)),
    ("protocol.n", Kind::Num(Dim::None)),
    ("protocol.larmor", Kind::Num(Dim::Frequency)),
    ("heating.rate", Kind::Num(Dim::None)),
];

fn key_sets(cmd: Command) -> Vec<Keys> {
    let mut v = vec![COMMON];
    match cmd {
        Command::Spectrum => v.extend([SYSTEM, BROADENING, GRID, SPECTRUM]),
        Command::FreqDist => v.extend([SYSTEM, BROADENING, GRID, FREQ_DIST]),
        Command::Fraction => v.extend([SYSTEM, BROADENING, GRID, FRACTION]),
        Command::Heat => v.extend([SYSTEM, HEAT]),
        Command::PulsepolTau => v.extend([SYSTEM, MODEL, SEQUENCE, TAU_SCAN]),
        Command::PulsepolDetuning => v.extend([SYSTEM, MODEL, SEQUENCE, DETUNING_ORDER, DETUNING_SCAN]),
        Command::Inversion => v.extend([INVERSION, DETUNING_SCAN]),
        Command::PulseOpt => v.push(PULSE_OPT),
        Command::Fit => v.push(FIT),
        Command::DnpEnhance => v.push(DNP),
        Command::Estimate => v.push(ESTIMATE),
    }
    v
}

pub fn kind_of(cmd: Command, key: &str) -> Option<Kind> {
    key_sets(cmd).into_iter().flatten().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

pub fn keys(cmd: Command) -> Vec<&'static str> {
    key_sets(cmd).into_iter().flatten().map(|(k, _)| *k).collect()
}

/// Keys that must be present for a command.
pub fn required(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Fit => &["input"],
        Command::Heat => &["powers", "b12"],
        _ => &[],
    }
}

fn dim_ok(q: &Quantity, want: Dim) -> bool {
    q.dim == want || q.dim == Dim::None
}

fn check_value(key: &str, kind: Kind, v: &Value) -> Result<(), String> {
    let mismatch = |what: &str| Err(format!("key '{key}': expected {what}, found '{v}'"));
    match (kind, v) {
        (Kind::Num(d), Value::Num(q)) if dim_ok(q, d) => Ok(()),
        (Kind::Num(d), _) => mismatch(&describe(d)),
        (Kind::NumOf(ds), Value::Num(q)) if ds.iter().any(|d| dim_ok(q, *d)) => Ok(()),
        (Kind::NumOf(ds), _) => mismatch(&ds.iter().map(|d| describe(*d)).collect::<Vec<_>>().join(" or ")),
        (Kind::Count, Value::Num(q)) if q.dim == Dim::None && q.value >= 0.0 && q.value.fract() == 0.0 && q.value < 1e15 => Ok(()),
        (Kind::Count, _) => mismatch("a non-negative integer"),
        (Kind::List(d), Value::List(qs)) if qs.iter().all(|q| dim_ok(q, d)) => Ok(()),
        (Kind::List(d), Value::Num(q)) if dim_ok(q, d) => Ok(()),
        (Kind::List(d), _) => mismatch(&format!("a comma-separated list of {}", describe(d))),
        (Kind::Word(ws), Value::Text(t)) if ws.contains(&t.as_str()) => Ok(()),
        (Kind::Word(ws), _) => mismatch(&format!("one of {}", ws.join(", "))),
        (Kind::Path, Value::Text(_)) => Ok(()),
        (Kind::Path, _) => mismatch("a file name"),
        (Kind::Pulse, Value::Text(t)) if t == "rectangular" => Ok(()),
        (Kind::Pulse, Value::Num(q)) if q.dim == Dim::None => Ok(()),
        (Kind::Pulse, Value::List(qs)) if qs.iter().all(|q| q.dim == Dim::None) => Ok(()),
        (Kind::Pulse, _) => mismatch("'rectangular' or a list of sideband coefficients"),
        (Kind::Variant, Value::Text(t)) if t == "standard" || t == "phase-offset" => Ok(()),
        (Kind::Variant, Value::Num(q)) if dim_ok(q, Dim::Angle) => Ok(()),
        (Kind::Variant, _) => mismatch("'standard', 'phase-offset' or a phase angle"),
    }
}

fn describe(d: Dim) -> String {
    match d {
        Dim::None => "a number".into(),
        d => format!("a number in {}", d.base_unit()),
    }
}

/// Rejects unknown keys and ill-typed values, and reports missing required keys.
pub fn check_keys(cfg: &RunConfig, cmd: Command) -> Result<(), ConfigError> {
    for (key, v) in &cfg.params {
        let line = cfg.line_of(key);
        let Some(kind) = kind_of(cmd, key) else {
            return Err(ConfigError::new(line, Some(key), format!("unknown key '{key}' for command {cmd}")));
        };
        check_value(key, kind, v).map_err(|m| ConfigError::new(line, Some(key), m))?;
    }
    for key in required(cmd) {
        if !cfg.params.contains_key(*key) {
            return Err(ConfigError::new(0, Some(key), format!("missing required key '{key}' for command {cmd}")));
        }
    }
    Ok(())
}

/// Typed, defaulted access to a checked configuration.
pub struct Params<'a> {
    cfg: &'a RunConfig,
}

impl<'a> Params<'a> {
    pub fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg }
    }

    pub fn has(&self, key: &str) -> bool {
        self.cfg.params.contains_key(key)
    }

    pub fn num(&self, key: &str, default: f64) -> f64 {
        match self.cfg.params.get(key) {
            Some(Value::Num(q)) => q.value,
            _ => default,
        }
    }

    pub fn opt(&self, key: &str) -> Option<f64> {
        match self.cfg.params.get(key) {
            Some(Value::Num(q)) => Some(q.value),
            _ => None,
        }
    }

    /// Dimension the user wrote, if any.
    pub fn dim(&self, key: &str) -> Option<Dim> {
        match self.cfg.params.get(key) {
            Some(Value::Num(q)) => Some(q.dim),
            _ => None,
        }
    }

    pub fn count(&self, key: &str, default: usize) -> usize {
        self.opt(key).map(|v| v as usize).unwrap_or(default)
    }

    pub fn list(&self, key: &str) -> Option<Vec<f64>> {
        match self.cfg.params.get(key) {
            Some(Value::List(qs)) => Some(qs.iter().map(|q| q.value).collect()),
            Some(Value::Num(q)) => Some(vec![q.value]),
            _ => None,
        }
    }

    pub fn text(&self, key: &str, default: &'a str) -> &'a str {
        match self.cfg.params.get(key) {
            Some(Value::Text(t)) => t,
            _ => default,
        }
    }

    pub fn value(&self, key: &str) -> Option<&'a Value> {
        self.cfg.params.get(key)
    }

    pub fn line(&self, key: &str) -> usize {
        self.cfg.line_of(key)
    }
}
