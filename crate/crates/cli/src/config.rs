use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Physical dimension of a parsed number. Values are stored in the base unit
/// of their dimension: MHz, mT, µs, K, mW, ppm, rad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    None,
    Frequency,
    Field,
    Time,
    Temperature,
    Power,
    Concentration,
    Angle,
}

impl Dim {
    pub fn base_unit(self) -> &'static str {
        match self {
            Dim::None => "",
            Dim::Frequency => "MHz",
            Dim::Field => "mT",
            Dim::Time => "us",
            Dim::Temperature => "K",
            Dim::Power => "mW",
            Dim::Concentration => "ppm",
            Dim::Angle => "rad",
        }
    }
}

const UNITS: &[(&str, Dim, f64)] = &[
    ("Hz", Dim::Frequency, 1e-6),
    ("kHz", Dim::Frequency, 1e-3),
    ("MHz", Dim::Frequency, 1.0),
    ("GHz", Dim::Frequency, 1e3),
    ("uT", Dim::Field, 1e-3),
    ("µT", Dim::Field, 1e-3),
    ("mT", Dim::Field, 1.0),
    ("G", Dim::Field, 0.1),
    ("T", Dim::Field, 1e3),
    ("ns", Dim::Time, 1e-3),
    ("us", Dim::Time, 1.0),
    ("µs", Dim::Time, 1.0),
    ("ms", Dim::Time, 1e3),
    ("s", Dim::Time, 1e6),
    ("K", Dim::Temperature, 1.0),
    ("mW", Dim::Power, 1.0),
    ("W", Dim::Power, 1e3),
    ("ppm", Dim::Concentration, 1.0),
    ("rad", Dim::Angle, 1.0),
    ("deg", Dim::Angle, std::f64::consts::PI / 180.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dim,
}

impl Quantity {
    pub fn plain(value: f64) -> Self {
        Self { value, dim: Dim::None }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            Dim::None => write!(f, "{}", self.value),
            d => write!(f, "{} {}", self.value, d.base_unit()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(Quantity),
    List(Vec<Quantity>),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(q) => write!(f, "{q}"),
            Value::List(v) => {
                let parts: Vec<String> = v.iter().map(|q| q.to_string()).collect();
                write!(f, "{}", parts.join(", "))
            }
            Value::Text(s) => {
                let plain = !s.is_empty()
                    && !s.contains(['#', '"', ',', '='])
                    && s.trim() == s
                    && matches!(parse_value(s), Ok(Value::Text(ref t)) if t == s);
                if plain {
                    write!(f, "{s}")
                } else {
                    write!(f, "\"{s}\"")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub key: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn new(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self { line, key: key.map(String::from), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Command {
    Spectrum,
    FreqDist,
    Fraction,
    Heat,
    PulsepolTau,
    PulsepolDetuning,
    Inversion,
    PulseOpt,
    Fit,
    DnpEnhance,
    Estimate,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::Spectrum,
        Command::FreqDist,
        Command::Fraction,
        Command::Heat,
        Command::PulsepolTau,
        Command::PulsepolDetuning,
        Command::Inversion,
        Command::PulseOpt,
        Command::Fit,
        Command::DnpEnhance,
        Command::Estimate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::FreqDist => "freq-dist",
            Command::Fraction => "fraction",
            Command::Heat => "heat",
            Command::PulsepolTau => "pulsepol-tau",
            Command::PulsepolDetuning => "pulsepol-detuning",
            Command::Inversion => "inversion",
            Command::PulseOpt => "pulse-opt",
            Command::Fit => "fit",
            Command::DnpEnhance => "dnp-enhance",
            Command::Estimate => "estimate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command '{s}'"))
    }
}

/// Parsed configuration. Keys inside a `[section]` are stored as
/// `section.key`. Line numbers are kept for diagnostics but do not take part
/// in equality.
#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub params: BTreeMap<String, Value>,
    pub lines: BTreeMap<String, usize>,
}

impl PartialEq for RunConfig {
    fn eq(&self, other: &Self) -> bool {
        self.command == other.command && self.params == other.params
    }
}

impl RunConfig {
    pub fn is_empty(&self) -> bool {
        self.command.is_none() && self.params.is_empty()
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.lines.get(key).copied().unwrap_or(0)
    }

    pub fn seed(&self) -> Option<u64> {
        match self.params.get("seed") {
            Some(Value::Num(q)) if q.value >= 0.0 && q.value.fract() == 0.0 => Some(q.value as u64),
            _ => None,
        }
    }

    pub fn output_path(&self) -> Option<&str> {
        match self.params.get("output") {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }
}

fn split_number(s: &str) -> Option<(f64, &str)> {
    let cut = s.char_indices().rev().take_while(|(_, c)| c.is_alphabetic()).last().map(|(i, _)| i).unwrap_or(s.len());
    let (num, unit) = s.split_at(cut);
    let num = num.trim_end();
    if num.is_empty() {
        return None;
    }
    let v: f64 = num.parse().ok()?;
    v.is_finite().then_some((v, unit))
}

fn parse_quantity(s: &str) -> Result<Option<Quantity>, String> {
    let Some((v, unit)) = split_number(s) else {
        return Ok(None);
    };
    if unit.is_empty() {
        return Ok(Some(Quantity::plain(v)));
    }
    match UNITS.iter().find(|(u, _, _)| *u == unit) {
        Some(&(_, dim, f)) => Ok(Some(Quantity { value: v * f, dim })),
        None => Err(format!("unknown unit '{unit}'")),
    }
}

/// Number with optional unit, comma-separated list of numbers, or text.
/// A unit written only after the last list element applies to all.
pub fn parse_value(raw: &str) -> Result<Value, String> {
    let s = raw.trim();
    if let Some(inner) = s.strip_prefix('"') {
        return match inner.strip_suffix('"') {
            Some(t) if !t.contains('"') => Ok(Value::Text(t.to_string())),
            _ => Err("unterminated string".into()),
        };
    }
    if s.contains(',') {
        let items: Vec<&str> = s.split(',').map(str::trim).collect();
        let mut qs = Vec::with_capacity(items.len());
        for it in &items {
            match parse_quantity(it)? {
                Some(q) => qs.push(q),
                None => return Err(format!("list element '{it}' is not a number")),
            }
        }
        let last = qs[qs.len() - 1].dim;
        if last != Dim::None && qs[..qs.len() - 1].iter().all(|q| q.dim == Dim::None) {
            let (_, unit) = split_number(items[items.len() - 1]).unwrap();
            let f = UNITS.iter().find(|(u, _, _)| *u == unit).map(|x| x.2).unwrap();
            for q in &mut qs[..items.len() - 1] {
                *q = Quantity { value: q.value * f, dim: last };
            }
        }
        return Ok(Value::List(qs));
    }
    match parse_quantity(s)? {
        Some(q) => Ok(Value::Num(q)),
        None => Ok(Value::Text(s.to_string())),
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Parse `key = value` lines with `[section]` headers and `#` comments.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|n| valid_name(n))
                .ok_or_else(|| ConfigError::new(line, None, format!("malformed section header '{body}'")))?;
            section = Some(name.to_string());
            continue;
        }
        let Some((key, val)) = body.split_once('=') else {
            return Err(ConfigError::new(line, None, format!("expected 'key = value', found '{body}'")));
        };
        let key = key.trim();
        if !valid_name(key) {
            return Err(ConfigError::new(line, Some(key), format!("invalid key '{key}'")));
        }
        let full = match &section {
            Some(s) => format!("{s}.{key}"),
            None => key.to_string(),
        };
        if let Some(prev) = cfg.lines.get(&full) {
            return Err(ConfigError::new(line, Some(&full), format!("duplicate key '{full}' (first set on line {prev})")));
        }
        let value = parse_value(val).map_err(|m| ConfigError::new(line, Some(&full), format!("key '{full}': {m}")))?;
        if full == "command" {
            let Value::Text(name) = &value else {
                return Err(ConfigError::new(line, Some("command"), "key 'command': expected a command name"));
            };
            cfg.command = Some(name.parse().map_err(|m| ConfigError::new(line, Some("command"), m))?);
            cfg.lines.insert(full, line);
            continue;
        }
        cfg.lines.insert(full.clone(), line);
        cfg.params.insert(full, value);
    }
    if let Some(cmd) = cfg.command {
        crate::schema::check_keys(&cfg, cmd)?;
    }
    Ok(cfg)
}

/// Inverse of [`parse_config`]: top-level keys first, then one block per section.
pub fn render(cfg: &RunConfig) -> String {
    let mut out = String::new();
    if let Some(c) = cfg.command {
        out.push_str(&format!("command = {c}\n"));
    }
    let mut sections: BTreeMap<&str, Vec<(&str, &Value)>> = BTreeMap::new();
    for (k, v) in &cfg.params {
        match k.split_once('.') {
            Some((s, key)) => sections.entry(s).or_default().push((key, v)),
            None => out.push_str(&format!("{k} = {v}\n")),
        }
    }
    for (s, entries) in sections {
        out.push_str(&format!("\n[{s}]\n"));
        for (k, v) in entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
    }
    out
}
