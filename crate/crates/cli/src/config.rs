//! Scenario files: `[section]` headers and `key = value` lines, `#`
//! comments. Every dimensional value carries a unit suffix.
//!
//! ```text
//! [field]
//! B2 = 7800 G/cm2
//! L = 0.1 cm
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use ringberry::field_model::{Coil, CoilSet};
use ringberry::geometric_phase::SamplerKind;
use ringberry::ring_dynamics::GaugeProfile;
use ringberry::units::AMU;

/// One problem in a config file; `line` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}", render(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render(d: &[Diagnostic]) -> String {
    let lines: Vec<String> = d.iter().map(|d| d.to_string()).collect();
    format!("{} problem(s) in config:\n  {}", d.len(), lines.join("\n  "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldMode {
    Tort,
    Static,
}

/// Which phase relation between the two drive coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `B1 ~ cos(wt)`.
    Cos,
    /// `B1 ~ sin(wt)`.
    Sin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSection {
    pub mode: FieldMode,
    /// G/cm^2.
    pub b2: f64,
    /// cm.
    pub length_l: f64,
    pub n: f64,
    pub l: f64,
    /// Hz.
    pub drive_frequency: f64,
    pub convention: Convention,
    /// A.
    pub wire_current: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSection {
    pub species: String,
    /// g.
    pub mass: f64,
    pub g_f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub l_over_l: Vec<f64>,
    pub n_over_l: Vec<f64>,
    /// Region half-widths in units of `L`.
    pub deltas: Vec<f64>,
    pub sampler: SamplerKind,
    pub samples: usize,
    pub seed: u64,
    pub n_max: usize,
    pub windings: i64,
    /// Half-width of the coil-fit stencil (cm).
    pub fit_radius: f64,
    pub fit_points: usize,
}

/// A velocity either in rad/s or in natural ring units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Velocity {
    RadPerSecond(f64),
    Natural(f64),
}

/// A duration in seconds or natural ring units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Duration {
    Seconds(f64),
    Natural(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeSpec {
    /// `cos beta0` at the configured trap center.
    CosBeta0,
    Profile(GaugeProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsSection {
    pub grid: usize,
    /// rad.
    pub width: f64,
    pub phi0: f64,
    pub v0: Velocity,
    /// `None` picks half the largest accepted step.
    pub dt: Option<Duration>,
    pub t_max: Option<Duration>,
    /// `None` uses the trap center radius.
    pub ring_radius: Option<f64>,
    pub gauge: GaugeSpec,
    pub convergence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SagnacSection {
    /// rad/s.
    pub rotation_rate: f64,
    /// rad.
    pub tilt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Csv,
    GnuplotBlock,
}

impl Style {
    pub fn name(&self) -> &'static str {
        match self {
            Style::Csv => "csv",
            Style::GnuplotBlock => "gnuplot-block",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub directory: Option<String>,
    pub formats: Vec<Style>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub field: FieldSection,
    /// Explicit coil set; the bundled realization is used when absent.
    pub coils: Option<CoilSet>,
    pub atom: AtomSection,
    pub analysis: AnalysisSection,
    pub dynamics: DynamicsSection,
    pub sagnac: SagnacSection,
    pub output: OutputSection,
}

impl ScenarioConfig {
    pub fn atom(&self) -> ringberry::units::Atom {
        ringberry::units::Atom {
            mass: self.atom.mass,
            g_f: self.atom.g_f,
        }
    }
}

// ---------------------------------------------------------------------------
// Units

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Curvature,
    Length,
    Frequency,
    Time,
    Current,
    Mass,
    Angle,
    AngularVelocity,
}

impl Kind {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Curvature => &[("G/cm2", 1.0), ("G/cm^2", 1.0), ("T/m2", 1.0), ("T/m^2", 1.0)],
            Kind::Length => &[("cm", 1.0), ("mm", 0.1), ("um", 1e-4), ("m", 100.0)],
            Kind::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6)],
            Kind::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6)],
            Kind::Current => &[("A", 1.0), ("mA", 1e-3)],
            Kind::Mass => &[("amu", AMU), ("g", 1.0), ("kg", 1e3)],
            Kind::Angle => &[("rad", 1.0), ("deg", std::f64::consts::PI / 180.0)],
            Kind::AngularVelocity => &[("rad/s", 1.0)],
        }
    }

    fn canonical(self) -> &'static str {
        self.units()[0].0
    }

    fn accepted(self) -> String {
        self.units().iter().map(|u| u.0).collect::<Vec<_>>().join(", ")
    }
}

fn split_number(value: &str) -> Option<(f64, &str)> {
    let value = value.trim();
    let end = value.find(char::is_whitespace).unwrap_or(value.len());
    let x: f64 = value[..end].parse().ok()?;
    Some((x, value[end..].trim()))
}

fn parse_quantity(value: &str, kind: Kind) -> Result<f64, String> {
    let (x, unit) = split_number(value).ok_or_else(|| format!("'{value}' is not a number with a unit"))?;
    if !x.is_finite() {
        return Err(format!("'{value}' is not finite"));
    }
    if unit.is_empty() {
        return Err(format!("missing unit (expected one of {})", kind.accepted()));
    }
    kind.units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, f)| x * f)
        .ok_or_else(|| format!("unit '{unit}' not accepted here (expected one of {})", kind.accepted()))
}

fn parse_plain(value: &str) -> Result<f64, String> {
    match split_number(value) {
        Some((x, "")) if x.is_finite() => Ok(x),
        Some((_, unit)) if !unit.is_empty() => Err(format!("dimensionless value takes no unit, got '{unit}'")),
        _ => Err(format!("'{value}' is not a number")),
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = value.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("'{value}' is not a comma-separated list of numbers"));
    }
    items.into_iter().map(parse_plain).collect()
}

/// `0.1 + 0.02 cos 1 - 0.01 sin 3`: a mean followed by harmonic terms.
fn parse_gauge(value: &str) -> Result<GaugeSpec, String> {
    if value == "cos_beta0" {
        return Ok(GaugeSpec::CosBeta0);
    }
    let spaced = value.replace('+', " + ").replace('-', " - ").replace("e - ", "e-").replace("E - ", "E-");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let bad = || format!("'{value}' is not a gauge expression like '0.1 + 0.02 cos 1'");
    let mut mean = None;
    let mut harmonics: Vec<(u32, f64, f64)> = Vec::new();
    let mut i = 0;
    let mut sign = 1.0;
    while i < tokens.len() {
        match tokens[i] {
            "+" => sign = 1.0,
            "-" => sign = -sign,
            t => {
                let c: f64 = t.parse().map_err(|_| bad())?;
                let c = sign * c;
                sign = 1.0;
                match tokens.get(i + 1) {
                    Some(&f @ ("cos" | "sin")) => {
                        let k: u32 = tokens.get(i + 2).ok_or_else(bad)?.parse().map_err(|_| bad())?;
                        if k == 0 {
                            return Err("harmonic order must be >= 1".into());
                        }
                        let (a, b) = if f == "cos" { (c, 0.0) } else { (0.0, c) };
                        match harmonics.iter_mut().find(|h| h.0 == k) {
                            Some(h) => {
                                h.1 += a;
                                h.2 += b;
                            }
                            None => harmonics.push((k, a, b)),
                        }
                        i += 2;
                    }
                    _ => {
                        if mean.is_some() {
                            return Err(bad());
                        }
                        mean = Some(c);
                    }
                }
            }
        }
        i += 1;
    }
    let mean = mean.unwrap_or(0.0);
    Ok(GaugeSpec::Profile(if harmonics.is_empty() {
        GaugeProfile::constant(mean)
    } else {
        GaugeProfile::custom(mean, harmonics)
    }))
}

fn gauge_to_string(g: &GaugeSpec) -> String {
    match g {
        GaugeSpec::CosBeta0 => "cos_beta0".into(),
        GaugeSpec::Profile(p) => {
            let mut s = format!("{}", p.mean);
            for &(k, a, b) in &p.harmonics {
                if a != 0.0 {
                    let _ = write!(s, " {} {} cos {k}", if a < 0.0 { '-' } else { '+' }, a.abs());
                }
                if b != 0.0 {
                    let _ = write!(s, " {} {} sin {k}", if b < 0.0 { '-' } else { '+' }, b.abs());
                }
            }
            s
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

const SECTIONS: [&str; 7] = ["field", "coils", "atom", "analysis", "dynamics", "sagnac", "output"];
const REQUIRED: [&str; 2] = ["field", "atom"];
const REPEATABLE: [&str; 2] = ["coil", "pair"];

/// Header line and entries of one section, before typing.
type RawSection = (Option<usize>, BTreeMap<String, Vec<Entry>>);

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

/// Typed access to one section, recording every problem.
struct Section<'a> {
    name: &'static str,
    header: Option<usize>,
    entries: BTreeMap<String, Vec<Entry>>,
    errors: &'a mut Vec<Diagnostic>,
}

impl Section<'_> {
    fn fail(&mut self, line: Option<usize>, key: &str, msg: impl fmt::Display) {
        self.errors.push(Diagnostic {
            line,
            message: format!("[{}] {key}: {msg}", self.name),
        });
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        let e = self.entries.get_mut(key)?.first_mut()?;
        e.used = true;
        Some((e.line, e.value.clone()))
    }

    fn with<T>(&mut self, key: &str, default: Option<T>, parse: impl Fn(&str) -> Result<T, String>) -> Option<T> {
        match self.raw(key) {
            Some((line, v)) => match parse(&v) {
                Ok(x) => Some(x),
                Err(m) => {
                    self.fail(Some(line), key, m);
                    None
                }
            },
            None => {
                if default.is_none() {
                    let at = self.header;
                    self.fail(at, key, "required key is missing");
                }
                default
            }
        }
    }

    fn quantity(&mut self, key: &str, kind: Kind, default: Option<f64>) -> Option<f64> {
        self.with(key, default, |v| parse_quantity(v, kind))
    }

    fn positive(&mut self, key: &str, kind: Kind, default: Option<f64>) -> Option<f64> {
        self.with(key, default, |v| {
            let x = parse_quantity(v, kind)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err("must be > 0".into())
            }
        })
    }

    fn plain(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        self.with(key, default, parse_plain)
    }

    fn integer<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Option<T> {
        self.with(key, default, |v| v.parse::<T>().map_err(|_| format!("'{v}' is not a valid integer")))
    }

    fn list(&mut self, key: &str, default: Option<Vec<f64>>) -> Option<Vec<f64>> {
        self.with(key, default, parse_list)
    }

    fn word<T: Copy>(&mut self, key: &str, choices: &[(&str, T)], default: Option<T>) -> Option<T> {
        self.with(key, default, |v| {
            choices
                .iter()
                .find(|c| c.0 == v)
                .map(|c| c.1)
                .ok_or_else(|| {
                    let names: Vec<&str> = choices.iter().map(|c| c.0).collect();
                    format!("'{v}' is not one of {}", names.join(", "))
                })
        })
    }

    fn repeated(&mut self, key: &str) -> Vec<(usize, String)> {
        match self.entries.get_mut(key) {
            Some(list) => list
                .iter_mut()
                .map(|e| {
                    e.used = true;
                    (e.line, e.value.clone())
                })
                .collect(),
            None => Vec::new(),
        }
    }

    fn finish(self) {
        for (key, list) in &self.entries {
            for e in list.iter().filter(|e| !e.used) {
                self.errors.push(Diagnostic {
                    line: Some(e.line),
                    message: format!("[{}] unknown key '{key}'", self.name),
                });
            }
        }
    }
}

fn velocity(v: &str) -> Result<Velocity, String> {
    match split_number(v) {
        Some((x, "rad/s")) => Ok(Velocity::RadPerSecond(x)),
        Some((x, "rad/tau")) => Ok(Velocity::Natural(x)),
        Some((_, "")) => Err("missing unit (expected rad/s or rad/tau)".into()),
        _ => Err(format!("'{v}' is not a velocity in rad/s or rad/tau")),
    }
}

fn duration(v: &str) -> Result<Duration, String> {
    match split_number(v) {
        Some((x, "tau")) if x > 0.0 => Ok(Duration::Natural(x)),
        Some((_, "tau")) => Err("must be > 0".into()),
        _ => {
            let s = parse_quantity(v, Kind::Time).map_err(|e| format!("{e} or tau"))?;
            if s > 0.0 {
                Ok(Duration::Seconds(s))
            } else {
                Err("must be > 0".into())
            }
        }
    }
}

fn auto_or<T>(parse: impl Fn(&str) -> Result<T, String>) -> impl Fn(&str) -> Result<Option<T>, String> {
    move |v| if v == "auto" { Ok(None) } else { parse(v).map(Some) }
}

fn coil_line(v: &str, pair: bool) -> Result<Vec<Coil>, String> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    let want = if pair { 4 } else { 3 };
    if parts.len() != want {
        return Err(if pair {
            "expected 'radius, half_separation, current, same|anti'".into()
        } else {
            "expected 'radius, axial_position, current'".into()
        });
    }
    let radius = parse_quantity(parts[0], Kind::Length)?;
    if !(radius > 0.0) {
        return Err("coil radius must be > 0".into());
    }
    let pos = parse_quantity(parts[1], Kind::Length)?;
    let current = parse_quantity(parts[2], Kind::Current)?;
    if !pair {
        return Ok(vec![Coil { radius, axial_position: pos, current }]);
    }
    let anti = match parts[3] {
        "same" => false,
        "anti" => true,
        other => return Err(format!("'{other}' is not same or anti")),
    };
    let mut set = CoilSet::new();
    set.push_pair(radius, pos, current, anti);
    Ok(set.coils)
}

/// Parse config text, reporting every problem found.
pub fn parse_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut errors = Vec::new();
    let mut raw: BTreeMap<&'static str, RawSection> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            match SECTIONS.iter().find(|s| **s == name) {
                Some(s) => {
                    if raw.contains_key(s) {
                        errors.push(Diagnostic {
                            line: Some(line_no),
                            message: format!("section [{s}] appears twice"),
                        });
                    }
                    raw.entry(s).or_insert((Some(line_no), BTreeMap::new()));
                    current = Some(s);
                }
                None => {
                    errors.push(Diagnostic {
                        line: Some(line_no),
                        message: format!("unknown section [{name}]"),
                    });
                    current = None;
                }
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(Diagnostic {
                line: Some(line_no),
                message: format!("expected 'key = value', got '{content}'"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = current else {
            errors.push(Diagnostic {
                line: Some(line_no),
                message: format!("'{key}' is outside any known section"),
            });
            continue;
        };
        let entries = &mut raw.get_mut(sec).expect("section registered").1;
        let list = entries.entry(key.to_string()).or_default();
        if !list.is_empty() && !REPEATABLE.contains(&key) {
            errors.push(Diagnostic {
                line: Some(line_no),
                message: format!("[{sec}] {key}: duplicate key (first set on line {})", list[0].line),
            });
            continue;
        }
        list.push(Entry {
            line: line_no,
            value: value.to_string(),
            used: false,
        });
    }
    let missing: Vec<String> = REQUIRED
        .iter()
        .filter(|s| !raw.contains_key(*s))
        .map(|s| format!("[{s}]"))
        .collect();
    if !missing.is_empty() {
        errors.push(Diagnostic {
            line: None,
            message: format!("missing sections: {}", missing.join(", ")),
        });
        return Err(ConfigError::Invalid(errors));
    }

    let mut take = |name: &'static str| raw.remove(name).unwrap_or((None, BTreeMap::new()));

    // [field]
    let (header, entries) = take("field");
    let mut s = Section { name: "field", header, entries, errors: &mut errors };
    let mode = s.word("mode", &[("tort", FieldMode::Tort), ("static", FieldMode::Static)], Some(FieldMode::Tort));
    let b2 = s.quantity("B2", Kind::Curvature, None);
    let length_l = s.positive("L", Kind::Length, None);
    let l = s.quantity("l", Kind::Length, Some(0.0));
    let n = s.quantity("n", Kind::Length, Some(0.0));
    let drive_frequency = s.quantity("drive_frequency", Kind::Frequency, Some(0.0));
    let convention = s.word("convention", &[("cos", Convention::Cos), ("sin", Convention::Sin)], Some(Convention::Cos));
    let wire_current = s.with("wire_current", Some(None), |v| parse_quantity(v, Kind::Current).map(Some));
    if mode == Some(FieldMode::Tort) && drive_frequency.is_some_and(|f| f <= 0.0) {
        let at = s.raw("drive_frequency").map(|r| r.0).or(s.header);
        s.fail(at, "drive_frequency", "must be > 0 for a TORT");
    }
    if mode == Some(FieldMode::Static) && wire_current == Some(None) {
        let at = s.header;
        s.fail(at, "wire_current", "required in static mode");
    }
    s.finish();

    // [coils]
    let (header, entries) = take("coils");
    let coils = if header.is_some() {
        let mut s = Section { name: "coils", header, entries, errors: &mut errors };
        let mut set = CoilSet::new();
        for (pair, key) in [(false, "coil"), (true, "pair")] {
            for (line, v) in s.repeated(key) {
                match coil_line(&v, pair) {
                    Ok(c) => set.coils.extend(c),
                    Err(m) => s.fail(Some(line), key, m),
                }
            }
        }
        if set.coils.is_empty() {
            let at = s.header;
            s.fail(at, "coil", "section lists no coils");
        }
        s.finish();
        Some(set)
    } else {
        None
    };

    // [atom]
    let (header, entries) = take("atom");
    let mut s = Section { name: "atom", header, entries, errors: &mut errors };
    let species = s.with("species", Some("rb87".to_string()), |v| Ok(v.to_string()));
    let known = species.as_deref() == Some("rb87");
    let rb = ringberry::units::Atom::rb87();
    let mass = s.positive("mass", Kind::Mass, known.then_some(rb.mass));
    let g_f = s.plain("g_F", known.then_some(rb.g_f));
    s.finish();

    // [analysis]
    let (header, entries) = take("analysis");
    let mut s = Section { name: "analysis", header, entries, errors: &mut errors };
    let tenths: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let l_over_l = s.list("l_over_L", Some(tenths));
    let n_over_l = s.list("n_over_L", Some(vec![0.0, 0.75, 1.0]));
    let deltas = s.list("deltas", Some(vec![0.001, 0.005, 0.015]));
    let sampler = s.word(
        "sampler",
        &[
            ("flat_random", SamplerKind::FlatRandom),
            ("flat_grid", SamplerKind::FlatGrid),
            ("gaussian", SamplerKind::Gaussian),
        ],
        Some(SamplerKind::FlatRandom),
    );
    let samples = s.integer::<usize>("samples", Some(10_000));
    let seed = s.integer::<u64>("seed", Some(1));
    let n_max = s.integer::<usize>("n_max", Some(8));
    let windings = s.integer::<i64>("windings", Some(1));
    let fit_radius = s.positive("fit_radius", Kind::Length, Some(0.02));
    let fit_points = s.integer::<usize>("fit_points", Some(7));
    if samples == Some(0) {
        let at = s.raw("samples").map(|r| r.0);
        s.fail(at, "samples", "must be > 0");
    }
    s.finish();

    // [dynamics]
    let (header, entries) = take("dynamics");
    let mut s = Section { name: "dynamics", header, entries, errors: &mut errors };
    let grid = s.integer::<usize>("grid", Some(2048));
    let width = s.positive("width", Kind::Angle, Some(0.15));
    let phi0 = s.quantity("phi0", Kind::Angle, Some(0.0));
    let v0 = s.with("v0", Some(Velocity::Natural(40.0)), velocity);
    let dt = s.with("dt", Some(None), auto_or(duration));
    let t_max = s.with("t_max", Some(None), auto_or(duration));
    let ring_radius = s.with("ring_radius", Some(None), auto_or(|v| {
        let r = parse_quantity(v, Kind::Length)?;
        if r > 0.0 {
            Ok(r)
        } else {
            Err("must be > 0".into())
        }
    }));
    let gauge = s.with("gauge", Some(GaugeSpec::CosBeta0), parse_gauge);
    let convergence = s.word("convergence", &[("yes", true), ("no", false)], Some(false));
    s.finish();

    // [sagnac]
    let (header, entries) = take("sagnac");
    let mut s = Section { name: "sagnac", header, entries, errors: &mut errors };
    let rotation_rate = s.quantity("rotation_rate", Kind::AngularVelocity, Some(7.292_115e-5));
    let tilt = s.quantity("tilt", Kind::Angle, Some(0.0));
    s.finish();

    // [output]
    let (header, entries) = take("output");
    let mut s = Section { name: "output", header, entries, errors: &mut errors };
    let directory = s.with("directory", Some(None), |v| Ok(Some(v.to_string())));
    let formats = s.with("formats", Some(vec![Style::Csv]), |v| {
        v.split(',')
            .map(str::trim)
            .map(|f| match f {
                "csv" => Ok(Style::Csv),
                "gnuplot-block" => Ok(Style::GnuplotBlock),
                other => Err(format!("'{other}' is not csv or gnuplot-block")),
            })
            .collect()
    });
    s.finish();

    if !errors.is_empty() {
        errors.sort_by_key(|d| d.line.unwrap_or(0));
        return Err(ConfigError::Invalid(errors));
    }
    // every None above has produced a diagnostic
    let cfg = ScenarioConfig {
        field: FieldSection {
            mode: mode.unwrap(),
            b2: b2.unwrap(),
            length_l: length_l.unwrap(),
            n: n.unwrap(),
            l: l.unwrap(),
            drive_frequency: drive_frequency.unwrap(),
            convention: convention.unwrap(),
            wire_current: wire_current.unwrap(),
        },
        coils,
        atom: AtomSection {
            species: species.unwrap(),
            mass: mass.unwrap(),
            g_f: g_f.unwrap(),
        },
        analysis: AnalysisSection {
            l_over_l: l_over_l.unwrap(),
            n_over_l: n_over_l.unwrap(),
            deltas: deltas.unwrap(),
            sampler: sampler.unwrap(),
            samples: samples.unwrap(),
            seed: seed.unwrap(),
            n_max: n_max.unwrap(),
            windings: windings.unwrap(),
            fit_radius: fit_radius.unwrap(),
            fit_points: fit_points.unwrap(),
        },
        dynamics: DynamicsSection {
            grid: grid.unwrap(),
            width: width.unwrap(),
            phi0: phi0.unwrap(),
            v0: v0.unwrap(),
            dt: dt.unwrap(),
            t_max: t_max.unwrap(),
            ring_radius: ring_radius.unwrap(),
            gauge: gauge.unwrap(),
            convergence: convergence.unwrap(),
        },
        sagnac: SagnacSection {
            rotation_rate: rotation_rate.unwrap(),
            tilt: tilt.unwrap(),
        },
        output: OutputSection {
            directory: directory.unwrap(),
            formats: formats.unwrap(),
        },
    };
    Ok(cfg)
}

/// Read and parse a config file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}

fn list_to_string(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text form; parsing it gives back an equal config.
pub fn to_config_string(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let q = |x: f64, k: Kind| format!("{x} {}", k.canonical());
    let f = &c.field;
    let _ = writeln!(s, "[field]");
    let _ = writeln!(s, "mode = {}", if f.mode == FieldMode::Tort { "tort" } else { "static" });
    let _ = writeln!(s, "B2 = {}", q(f.b2, Kind::Curvature));
    let _ = writeln!(s, "L = {}", q(f.length_l, Kind::Length));
    let _ = writeln!(s, "l = {}", q(f.l, Kind::Length));
    let _ = writeln!(s, "n = {}", q(f.n, Kind::Length));
    let _ = writeln!(s, "drive_frequency = {}", q(f.drive_frequency, Kind::Frequency));
    let _ = writeln!(s, "convention = {}", if f.convention == Convention::Cos { "cos" } else { "sin" });
    if let Some(i) = f.wire_current {
        let _ = writeln!(s, "wire_current = {}", q(i, Kind::Current));
    }
    if let Some(set) = &c.coils {
        let _ = writeln!(s, "\n[coils]");
        for coil in &set.coils {
            let _ = writeln!(
                s,
                "coil = {}, {}, {}",
                q(coil.radius, Kind::Length),
                q(coil.axial_position, Kind::Length),
                q(coil.current, Kind::Current)
            );
        }
    }
    let a = &c.atom;
    let _ = writeln!(s, "\n[atom]");
    let _ = writeln!(s, "species = {}", a.species);
    let _ = writeln!(s, "mass = {} g", a.mass);
    let _ = writeln!(s, "g_F = {}", a.g_f);
    let an = &c.analysis;
    let _ = writeln!(s, "\n[analysis]");
    let _ = writeln!(s, "l_over_L = {}", list_to_string(&an.l_over_l));
    let _ = writeln!(s, "n_over_L = {}", list_to_string(&an.n_over_l));
    let _ = writeln!(s, "deltas = {}", list_to_string(&an.deltas));
    let sampler = match an.sampler {
        SamplerKind::FlatRandom => "flat_random",
        SamplerKind::FlatGrid => "flat_grid",
        SamplerKind::Gaussian => "gaussian",
    };
    let _ = writeln!(s, "sampler = {sampler}");
    let _ = writeln!(s, "samples = {}", an.samples);
    let _ = writeln!(s, "seed = {}", an.seed);
    let _ = writeln!(s, "n_max = {}", an.n_max);
    let _ = writeln!(s, "windings = {}", an.windings);
    let _ = writeln!(s, "fit_radius = {}", q(an.fit_radius, Kind::Length));
    let _ = writeln!(s, "fit_points = {}", an.fit_points);
    let d = &c.dynamics;
    let dur = |x: &Option<Duration>| match x {
        None => "auto".to_string(),
        Some(Duration::Seconds(t)) => format!("{t} s"),
        Some(Duration::Natural(t)) => format!("{t} tau"),
    };
    let _ = writeln!(s, "\n[dynamics]");
    let _ = writeln!(s, "grid = {}", d.grid);
    let _ = writeln!(s, "width = {}", q(d.width, Kind::Angle));
    let _ = writeln!(s, "phi0 = {}", q(d.phi0, Kind::Angle));
    let _ = writeln!(
        s,
        "v0 = {}",
        match d.v0 {
            Velocity::RadPerSecond(v) => format!("{v} rad/s"),
            Velocity::Natural(v) => format!("{v} rad/tau"),
        }
    );
    let _ = writeln!(s, "dt = {}", dur(&d.dt));
    let _ = writeln!(s, "t_max = {}", dur(&d.t_max));
    let _ = writeln!(
        s,
        "ring_radius = {}",
        d.ring_radius.map_or("auto".to_string(), |r| q(r, Kind::Length))
    );
    let _ = writeln!(s, "gauge = {}", gauge_to_string(&d.gauge));
    let _ = writeln!(s, "convergence = {}", if d.convergence { "yes" } else { "no" });
    let _ = writeln!(s, "\n[sagnac]");
    let _ = writeln!(s, "rotation_rate = {}", q(c.sagnac.rotation_rate, Kind::AngularVelocity));
    let _ = writeln!(s, "tilt = {}", q(c.sagnac.tilt, Kind::Angle));
    let _ = writeln!(s, "\n[output]");
    if let Some(dir) = &c.output.directory {
        let _ = writeln!(s, "directory = {dir}");
    }
    let formats: Vec<&str> = c.output.formats.iter().map(Style::name).collect();
    let _ = writeln!(s, "formats = {}", formats.join(", "));
    s
}
