//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! [packet]
//! q0 = -30
//! p0 = 2
//! delta = 10
//! mass = 1
//!
//! [potential]
//! kind = square_barrier      # free | step | square_barrier | linear_ramp | sampled
//! p_v = 2.6                  # or height = ...
//! width = 15
//!
//! [detectors]
//! x = 50, 60
//! ```
//!
//! Optional sections: `[grid]` (`policy = auto | fixed`, `t_min`, `t_max`,
//! `n`), `[sweep]` (`parameter = p_v | a`, `from`, `to`, `count`),
//! `[quadrature]` (`rel_tol`, `amplitude_tol`, `tail_tol`,
//! `channels = auto | right | all`) and `[output]` (`dir`, `prefix`,
//! `svg`). A sampled potential lists `q = ...` and `v = ...` as
//! comma-separated values; `model = auto | exact | wkb` picks the
//! eigenbasis (auto uses WKB for sampled tables).

use crate::analysis::SweepParameter;
use crate::engine::{ChannelPolicy, EngineOptions, GridPolicy, TimeGrid};
use crate::error::ToaError;
use crate::kinematics::GaussianPacket;
use crate::scattering::PotentialSpec;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;

/// One problem found while reading a scenario; line 0 means the whole file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

/// Collects issues into a single error.
pub fn issues_to_error(issues: &[ScenarioIssue]) -> ToaError {
    ToaError::Scenario(issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    #[default]
    Auto,
    Exact,
    Wkb,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Exact => "exact",
            Self::Wkb => "wkb",
        }
    }

    /// True when the WKB basis should be used for `spec`.
    pub fn uses_wkb(self, spec: &PotentialSpec) -> bool {
        match self {
            Self::Auto => matches!(spec, PotentialSpec::SampledSmooth(_)),
            Self::Exact => false,
            Self::Wkb => true,
        }
    }
}

/// Potential as written in the file. A barrier parameter may be left out
/// when a sweep supplies it.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialConfig {
    Free,
    Step { height: f64 },
    SquareBarrier { height: Option<f64>, width: Option<f64> },
    LinearRamp { force: f64 },
    Sampled { q: Vec<f64>, v: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), prefix: "toa".into(), svg: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub packet: GaussianPacket,
    pub potential: PotentialConfig,
    pub model: Model,
    pub detectors: Vec<f64>,
    pub grid: GridPolicy,
    pub sweep: Option<SweepConfig>,
    pub options: EngineOptions,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    /// The potential with every parameter present; errors for a barrier
    /// whose missing parameter is meant to come from a sweep.
    pub fn potential_spec(&self) -> crate::Result<PotentialSpec> {
        match &self.potential {
            PotentialConfig::Free => Ok(PotentialSpec::Free),
            PotentialConfig::Step { height } => PotentialSpec::step(*height),
            PotentialConfig::SquareBarrier { height: Some(h), width: Some(a) } => PotentialSpec::square_barrier(*h, *a),
            PotentialConfig::SquareBarrier { .. } => Err(ToaError::Scenario("barrier height or width is only given by the sweep".into())),
            PotentialConfig::LinearRamp { force } => PotentialSpec::linear_ramp(*force),
            PotentialConfig::Sampled { q, v } => PotentialSpec::sampled(q.clone(), v.clone()),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("packet", &["q0", "p0", "delta", "mass"]),
    ("potential", &["kind", "height", "p_v", "width", "force", "q", "v", "model"]),
    ("detectors", &["x"]),
    ("grid", &["policy", "t_min", "t_max", "n"]),
    ("sweep", &["parameter", "from", "to", "count"]),
    ("quadrature", &["rel_tol", "amplitude_tol", "tail_tol", "channels"]),
    ("output", &["dir", "prefix", "svg"]),
];

const REQUIRED: &[&str] = &["packet", "potential", "detectors"];

type Entries = BTreeMap<String, BTreeMap<String, (usize, String)>>;

struct Reader {
    entries: Entries,
    issues: Vec<ScenarioIssue>,
}

impl Reader {
    fn issue(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ScenarioIssue { line, message: message.into() });
    }

    fn raw(&self, section: &str, key: &str) -> Option<(usize, String)> {
        self.entries.get(section)?.get(key).cloned()
    }

    fn section_line(&self, section: &str) -> usize {
        self.entries.get(section).and_then(|m| m.get("").map(|e| e.0)).unwrap_or(0)
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        let (line, text) = self.raw(section, key)?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.issue(line, format!("[{section}] {key}: expected a finite number, got '{text}'"));
                None
            }
        }
    }

    fn required_float(&mut self, section: &str, key: &str) -> Option<f64> {
        if self.raw(section, key).is_none() {
            let line = self.section_line(section);
            self.issue(line, format!("[{section}] missing required key '{key}'"));
            return None;
        }
        self.float(section, key)
    }

    fn list(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let (line, text) = self.raw(section, key)?;
        let mut out = Vec::new();
        for item in text.split(',').map(str::trim) {
            match item.parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.issue(line, format!("[{section}] {key}: '{item}' is not a finite number"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn word(&self, section: &str, key: &str) -> Option<(usize, String)> {
        self.raw(section, key)
    }

    fn check(&mut self, section: &str, r: crate::Result<()>) {
        if let Err(e) = r {
            let line = self.section_line(section);
            self.issue(line, format!("[{section}] {e}"));
        }
    }
}

fn tokenize(text: &str) -> (Entries, Vec<ScenarioIssue>) {
    let mut entries = Entries::new();
    let mut issues = Vec::new();
    let mut current: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                issues.push(ScenarioIssue { line, message: format!("unknown section [{name}]") });
                current = None;
                continue;
            }
            if entries.contains_key(&name) {
                issues.push(ScenarioIssue { line, message: format!("section [{name}] appears twice") });
            }
            entries.entry(name.clone()).or_default().insert(String::new(), (line, String::new()));
            current = Some(name);
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            issues.push(ScenarioIssue { line, message: format!("expected 'key = value', got '{body}'") });
            continue;
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        let Some(section) = current.clone() else {
            issues.push(ScenarioIssue { line, message: format!("key '{key}' outside a known section") });
            continue;
        };
        let allowed = SECTIONS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key.as_str()) {
            issues.push(ScenarioIssue { line, message: format!("unknown key '{key}' in [{section}]") });
            continue;
        }
        let map = entries.entry(section.clone()).or_default();
        if map.contains_key(&key) {
            issues.push(ScenarioIssue { line, message: format!("duplicate key '{key}' in [{section}]") });
            continue;
        }
        map.insert(key, (line, value));
    }
    (entries, issues)
}

/// Parses and validates a scenario, reporting every problem found.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, Vec<ScenarioIssue>> {
    let (entries, issues) = tokenize(text);
    let mut r = Reader { entries, issues };
    for name in REQUIRED {
        if !r.entries.contains_key(*name) {
            r.issue(0, format!("missing required section [{name}]"));
        }
    }

    let packet = if r.entries.contains_key("packet") {
        let q0 = r.required_float("packet", "q0");
        let p0 = r.required_float("packet", "p0");
        let delta = r.required_float("packet", "delta");
        let mass = r.float("packet", "mass").or(Some(1.0));
        match (q0, p0, delta, mass) {
            (Some(q0), Some(p0), Some(delta), Some(mass)) => match GaussianPacket::new(q0, p0, delta, mass) {
                Ok(p) => Some(p),
                Err(e) => {
                    r.check("packet", Err(e));
                    None
                }
            },
            _ => None,
        }
    } else {
        None
    };
    let mass = packet.map_or(1.0, |p| p.mass);

    let sweep = if r.entries.contains_key("sweep") {
        let line = r.section_line("sweep");
        let parameter = match r.word("sweep", "parameter") {
            Some((_, w)) if w == "p_v" => Some(SweepParameter::Height),
            Some((_, w)) if w == "a" || w == "width" => Some(SweepParameter::Width),
            Some((l, w)) => {
                r.issue(l, format!("[sweep] parameter must be 'p_v' or 'a', got '{w}'"));
                None
            }
            None => {
                r.issue(line, "[sweep] missing required key 'parameter'");
                None
            }
        };
        let from = r.required_float("sweep", "from");
        let to = r.required_float("sweep", "to");
        let count = match r.word("sweep", "count") {
            Some((l, w)) => match w.parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => {
                    r.issue(l, format!("[sweep] count must be a positive integer, got '{w}'"));
                    None
                }
            },
            None => {
                r.issue(line, "[sweep] missing required key 'count'");
                None
            }
        };
        match (parameter, from, to, count) {
            (Some(parameter), Some(from), Some(to), Some(count)) => {
                if !(from > 0.0 && to >= from) {
                    r.issue(line, format!("[sweep] range must satisfy 0 < from <= to, got [{from}, {to}]"));
                    None
                } else {
                    Some(SweepConfig { parameter, from, to, count })
                }
            }
            _ => None,
        }
    } else {
        None
    };

    let model = match r.word("potential", "model") {
        None => Model::Auto,
        Some((_, w)) if w == "auto" => Model::Auto,
        Some((_, w)) if w == "exact" => Model::Exact,
        Some((_, w)) if w == "wkb" => Model::Wkb,
        Some((l, w)) => {
            r.issue(l, format!("[potential] model must be auto, exact or wkb, got '{w}'"));
            Model::Auto
        }
    };

    let potential = if r.entries.contains_key("potential") { parse_potential(&mut r, mass, sweep.map(|s| s.parameter)) } else { None };

    let detectors = if r.entries.contains_key("detectors") {
        match r.list("detectors", "x") {
            Some(xs) if !xs.is_empty() => Some(xs),
            Some(_) => None,
            None => {
                if r.raw("detectors", "x").is_none() {
                    let line = r.section_line("detectors");
                    r.issue(line, "[detectors] missing required key 'x'");
                }
                None
            }
        }
    } else {
        None
    };

    let grid = parse_grid(&mut r);
    let options = parse_quadrature(&mut r);
    let output = parse_output(&mut r);

    if let (Some(PotentialConfig::SquareBarrier { width, .. }), Some(xs), Some(s)) = (&potential, &detectors, &sweep) {
        let a_max = if s.parameter == SweepParameter::Width { s.to } else { width.unwrap_or(0.0) };
        if !(xs[0] > a_max) {
            let line = r.section_line("detectors");
            r.issue(line, format!("[detectors] sweep detector x = {} must lie beyond the barrier (width up to {a_max})", xs[0]));
        }
    }

    if !r.issues.is_empty() {
        r.issues.sort_by_key(|i| i.line);
        return Err(r.issues);
    }
    Ok(ScenarioConfig {
        packet: packet.expect("checked"),
        potential: potential.expect("checked"),
        model,
        detectors: detectors.expect("checked"),
        grid,
        sweep,
        options,
        output,
    })
}

fn parse_potential(r: &mut Reader, mass: f64, swept: Option<SweepParameter>) -> Option<PotentialConfig> {
    let line = r.section_line("potential");
    let Some((kline, kind)) = r.word("potential", "kind") else {
        r.issue(line, "[potential] missing required key 'kind'");
        return None;
    };
    let height = |r: &mut Reader, optional: bool| -> Option<Option<f64>> {
        match (r.raw("potential", "height").is_some(), r.raw("potential", "p_v").is_some()) {
            (true, true) => {
                r.issue(line, "[potential] give either 'height' or 'p_v', not both");
                None
            }
            (true, false) => r.float("potential", "height").map(Some),
            (false, true) => r.float("potential", "p_v").map(|pv| Some(pv * pv / (2.0 * mass))),
            (false, false) if optional => Some(None),
            (false, false) => {
                r.issue(line, "[potential] missing required key 'height' (or 'p_v')");
                None
            }
        }
    };
    let cfg = match kind.as_str() {
        "free" => Some(PotentialConfig::Free),
        "step" => height(r, false).map(|h| PotentialConfig::Step { height: h.expect("required") }),
        "square_barrier" => {
            let h = height(r, swept == Some(SweepParameter::Height));
            let w = if swept == Some(SweepParameter::Width) && r.raw("potential", "width").is_none() {
                Some(None)
            } else {
                r.required_float("potential", "width").map(Some)
            };
            match (h, w) {
                (Some(height), Some(width)) => Some(PotentialConfig::SquareBarrier { height, width }),
                _ => None,
            }
        }
        "linear_ramp" => r.required_float("potential", "force").map(|force| PotentialConfig::LinearRamp { force }),
        "sampled" => {
            let q = r.list("potential", "q");
            let v = r.list("potential", "v");
            if q.is_none() && r.raw("potential", "q").is_none() {
                r.issue(line, "[potential] missing required key 'q'");
            }
            if v.is_none() && r.raw("potential", "v").is_none() {
                r.issue(line, "[potential] missing required key 'v'");
            }
            match (q, v) {
                (Some(q), Some(v)) => Some(PotentialConfig::Sampled { q, v }),
                _ => None,
            }
        }
        other => {
            r.issue(kline, format!("[potential] unknown kind '{other}'"));
            None
        }
    }?;
    let allowed: &[&str] = match cfg {
        PotentialConfig::Free => &[],
        PotentialConfig::Step { .. } => &["height", "p_v"],
        PotentialConfig::SquareBarrier { .. } => &["height", "p_v", "width"],
        PotentialConfig::LinearRamp { .. } => &["force"],
        PotentialConfig::Sampled { .. } => &["q", "v"],
    };
    let extra: Vec<(usize, String)> = r.entries["potential"]
        .iter()
        .filter(|(k, _)| !k.is_empty() && *k != "kind" && *k != "model" && !allowed.contains(&k.as_str()))
        .map(|(k, (l, _))| (*l, k.clone()))
        .collect();
    for (l, k) in extra {
        r.issue(l, format!("[potential] key '{k}' does not apply to kind '{kind}'"));
    }
    // validate the parts that are present
    let check = match &cfg {
        PotentialConfig::SquareBarrier { height, width } => PotentialSpec::square_barrier(height.unwrap_or(0.0), width.unwrap_or(1.0)).map(|_| ()),
        PotentialConfig::Step { height } => PotentialSpec::step(*height).map(|_| ()),
        PotentialConfig::LinearRamp { force } => PotentialSpec::linear_ramp(*force).map(|_| ()),
        PotentialConfig::Sampled { q, v } => PotentialSpec::sampled(q.clone(), v.clone()).map(|_| ()),
        PotentialConfig::Free => Ok(()),
    };
    r.check("potential", check.clone());
    check.ok().map(|_| cfg)
}

fn parse_grid(r: &mut Reader) -> GridPolicy {
    if !r.entries.contains_key("grid") {
        return GridPolicy::Auto;
    }
    match r.word("grid", "policy") {
        Some((_, w)) if w == "fixed" => {
            let t_min = r.required_float("grid", "t_min");
            let t_max = r.required_float("grid", "t_max");
            let n = match r.word("grid", "n") {
                Some((l, w)) => w.parse::<usize>().map_err(|_| r.issue(l, format!("[grid] n must be an integer, got '{w}'"))).ok(),
                None => {
                    let line = r.section_line("grid");
                    r.issue(line, "[grid] missing required key 'n'");
                    None
                }
            };
            if let (Some(a), Some(b), Some(n)) = (t_min, t_max, n) {
                match TimeGrid::new(a, b, n) {
                    Ok(g) => return GridPolicy::Fixed(g),
                    Err(e) => r.check("grid", Err(e)),
                }
            }
            GridPolicy::Auto
        }
        Some((_, w)) if w == "auto" => {
            for key in ["t_min", "t_max", "n"] {
                if let Some((l, _)) = r.raw("grid", key) {
                    r.issue(l, format!("[grid] '{key}' needs policy = fixed"));
                }
            }
            GridPolicy::Auto
        }
        Some((l, w)) => {
            r.issue(l, format!("[grid] policy must be auto or fixed, got '{w}'"));
            GridPolicy::Auto
        }
        None => {
            let line = r.section_line("grid");
            r.issue(line, "[grid] missing required key 'policy'");
            GridPolicy::Auto
        }
    }
}

fn parse_quadrature(r: &mut Reader) -> EngineOptions {
    let mut o = EngineOptions::default();
    for (key, slot) in [("rel_tol", &mut o.rel_tol), ("amplitude_tol", &mut o.amplitude_tol), ("tail_tol", &mut o.tail_tol)] {
        if let Some(v) = r.float("quadrature", key) {
            if v > 0.0 && v < 1.0 {
                *slot = v;
            } else {
                let line = r.raw("quadrature", key).map_or(0, |e| e.0);
                r.issue(line, format!("[quadrature] {key} must lie in (0, 1), got {v}"));
            }
        }
    }
    match r.word("quadrature", "channels") {
        None => {}
        Some((_, w)) if w == "auto" => o.channels = ChannelPolicy::Auto,
        Some((_, w)) if w == "right" => o.channels = ChannelPolicy::RightOnly,
        Some((_, w)) if w == "all" => o.channels = ChannelPolicy::AllOpen,
        Some((l, w)) => r.issue(l, format!("[quadrature] channels must be auto, right or all, got '{w}'")),
    }
    o
}

fn parse_output(r: &mut Reader) -> OutputConfig {
    let mut o = OutputConfig::default();
    if let Some((_, d)) = r.word("output", "dir") {
        o.dir = PathBuf::from(d);
    }
    if let Some((l, p)) = r.word("output", "prefix") {
        if p.is_empty() || p.contains(['/', '\\']) {
            r.issue(l, format!("[output] prefix must be a plain file name stem, got '{p}'"));
        } else {
            o.prefix = p;
        }
    }
    match r.word("output", "svg") {
        None => {}
        Some((_, w)) if w == "true" => o.svg = true,
        Some((_, w)) if w == "false" => o.svg = false,
        Some((l, w)) => r.issue(l, format!("[output] svg must be true or false, got '{w}'")),
    }
    o
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

/// Writes a config back in the scenario format; `parse_scenario` inverts it.
pub fn render_scenario(cfg: &ScenarioConfig) -> String {
    let mut s = String::new();
    let p = &cfg.packet;
    let _ = writeln!(s, "[packet]\nq0 = {}\np0 = {}\ndelta = {}\nmass = {}\n", p.q0, p.p0, p.delta, p.mass);
    s.push_str("[potential]\n");
    match &cfg.potential {
        PotentialConfig::Free => s.push_str("kind = free\n"),
        PotentialConfig::Step { height } => {
            let _ = writeln!(s, "kind = step\nheight = {height}");
        }
        PotentialConfig::SquareBarrier { height, width } => {
            s.push_str("kind = square_barrier\n");
            if let Some(h) = height {
                let _ = writeln!(s, "height = {h}");
            }
            if let Some(a) = width {
                let _ = writeln!(s, "width = {a}");
            }
        }
        PotentialConfig::LinearRamp { force } => {
            let _ = writeln!(s, "kind = linear_ramp\nforce = {force}");
        }
        PotentialConfig::Sampled { q, v } => {
            let _ = writeln!(s, "kind = sampled\nq = {}\nv = {}", join(q), join(v));
        }
    }
    let _ = writeln!(s, "model = {}\n", cfg.model.name());
    let _ = writeln!(s, "[detectors]\nx = {}\n", join(&cfg.detectors));
    match cfg.grid {
        GridPolicy::Auto => s.push_str("[grid]\npolicy = auto\n\n"),
        GridPolicy::Fixed(g) => {
            let _ = writeln!(s, "[grid]\npolicy = fixed\nt_min = {}\nt_max = {}\nn = {}\n", g.t_min, g.t_max, g.n_points);
        }
    }
    if let Some(sw) = cfg.sweep {
        let _ = writeln!(s, "[sweep]\nparameter = {}\nfrom = {}\nto = {}\ncount = {}\n", sw.parameter.name(), sw.from, sw.to, sw.count);
    }
    let o = &cfg.options;
    let channels = match o.channels {
        ChannelPolicy::Auto => "auto",
        ChannelPolicy::RightOnly => "right",
        ChannelPolicy::AllOpen => "all",
    };
    let _ = writeln!(s, "[quadrature]\nrel_tol = {}\namplitude_tol = {}\ntail_tol = {}\nchannels = {channels}\n", o.rel_tol, o.amplitude_tol, o.tail_tol);
    let out = &cfg.output;
    let _ = writeln!(s, "[output]\ndir = {}\nprefix = {}\nsvg = {}", out.dir.display(), out.prefix, out.svg);
    s
}
