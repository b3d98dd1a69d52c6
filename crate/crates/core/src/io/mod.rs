//! Scenario files, CSV and SVG output, and the command runner used by the
//! `toa` binary.

mod output;
mod scenario;
mod svg;
pub mod validate;

pub use output::{columns_csv, csv_string, num, write_atomic};
pub use scenario::{issues_to_error, parse_scenario, render_scenario, Model, OutputConfig, PotentialConfig, ScenarioConfig, ScenarioIssue, SweepConfig};
pub use svg::line_plot;
pub use validate::{validate, Check};

use crate::analysis::{
    find_peaks, sweep_barrier_height_with, sweep_barrier_width_with, Execution, PeakReport, SweepParameter, SweepResult, DEFAULT_PROMINENCE,
};
use crate::classical::{classical_ensemble_mean, classical_toa, lie_toa, ClassicalState};
use crate::engine::{mean_toa_moment, ArrivalDistribution, Engine};
use crate::error::{Result, ToaError};
use output::opt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Reads and parses a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| ToaError::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|issues| issues_to_error(&issues))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Distribution,
    Sweep,
    Classical,
    Validate,
}

impl FromStr for Command {
    type Err = ToaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distribution" => Ok(Self::Distribution),
            "sweep" => Ok(Self::Sweep),
            "classical" => Ok(Self::Classical),
            "validate" => Ok(Self::Validate),
            other => Err(ToaError::InvalidParameter(format!("unknown command '{other}'"))),
        }
    }
}

/// Files written and lines to show the user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub artifacts: Vec<PathBuf>,
    pub messages: Vec<String>,
    pub success: bool,
}

struct Out<'a> {
    cfg: &'a ScenarioConfig,
    report: RunReport,
}

impl Out<'_> {
    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.cfg.output.dir.join(format!("{}_{stem}.{ext}", self.cfg.output.prefix))
    }

    fn write(&mut self, stem: &str, ext: &str, contents: &str) -> Result<()> {
        let p = self.path(stem, ext);
        write_atomic(&p, contents)?;
        self.report.artifacts.push(p);
        Ok(())
    }
}

/// Runs `command` on a parsed scenario and writes its artifacts.
pub fn run(cfg: &ScenarioConfig, command: Command) -> Result<RunReport> {
    let mut out = Out { cfg, report: RunReport { success: true, ..Default::default() } };
    match command {
        Command::Distribution => distribution(&mut out)?,
        Command::Sweep => sweep(&mut out)?,
        Command::Classical => classical(&mut out)?,
        Command::Validate => {
            let checks = validate(cfg);
            let text: String = checks.iter().map(|c| format!("{c}\n")).collect();
            out.report.success = checks.iter().all(|c| c.passed);
            out.report.messages.extend(checks.iter().map(ToString::to_string));
            out.write("validate", "txt", &text)?;
        }
    }
    Ok(out.report)
}

fn peak_lines(report: &PeakReport) -> String {
    let mut s = format!("peaks = {}\n", report.len());
    for (k, p) in report.peaks.iter().enumerate() {
        let _ = writeln!(s, "peak_{k} = {}, {}, {}", num(p.t), num(p.height), num(p.half_width));
    }
    s
}

/// Summary text for one distribution.
pub fn distribution_summary(dist: &ArrivalDistribution, mean_phase: Option<f64>, peaks: &PeakReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "x = {}", num(dist.x));
    let _ = writeln!(s, "probability = {}", num(dist.total_probability));
    let _ = writeln!(s, "defined = {}", dist.is_defined());
    let _ = writeln!(s, "grid = {}, {}, {}", num(dist.grid.t_min), num(dist.grid.t_max), dist.grid.n_points);
    let _ = writeln!(s, "tail_mass = {}", num(dist.tail_mass));
    let _ = writeln!(s, "mean_moment = {}", opt(mean_toa_moment(dist).ok()));
    let _ = writeln!(s, "mean_phase = {}", opt(mean_phase));
    s.push_str(&peak_lines(peaks));
    s
}

fn distribution(out: &mut Out) -> Result<()> {
    let cfg = out.cfg;
    let spec = cfg.potential_spec()?;
    let engine = Engine::new(cfg.options);
    for (i, &x) in cfg.detectors.iter().enumerate() {
        let basis = validate::basis_for(cfg, &spec, x)?;
        let dist = engine.distribution(basis.as_ref(), x, &cfg.packet, cfg.grid)?;
        let mean_phase = if dist.is_defined() { engine.mean_phase(basis.as_ref(), x, &cfg.packet).ok() } else { None };
        let peaks = find_peaks(&dist, None, DEFAULT_PROMINENCE)?;
        let stem = format!("x{i}");
        let times = dist.times();
        let nan = vec![f64::NAN; times.len()];
        let density = dist.density.clone().unwrap_or_else(|| nan.clone());
        let (tr, rf, int) = match &dist.components {
            Some(c) => (c.transmitted.clone(), c.reflected.clone(), c.interference.clone()),
            None => (nan.clone(), nan.clone(), nan),
        };
        out.write(&stem, "csv", &columns_csv(&["t", "density", "density_tr", "density_ref", "density_int"], &[&times, &density, &tr, &rf, &int]))?;
        out.write(&format!("{stem}_summary"), "txt", &distribution_summary(&dist, mean_phase, &peaks))?;
        if cfg.output.svg {
            let mut series: Vec<(&str, &[f64])> = vec![("density", &density)];
            if dist.components.is_some() {
                series.extend([("transmitted", &tr[..]), ("reflected", &rf[..]), ("interference", &int[..])]);
            }
            out.write(&stem, "svg", &line_plot(&format!("arrival density at x = {x}"), "t", "P(t, x)", &times, &series))?;
        }
        out.report.messages.push(format!(
            "x = {x}: P = {:.6e}, mean = {}, {} peak(s)",
            dist.total_probability,
            mean_toa_moment(&dist).map_or_else(|e| e.to_string(), |m| format!("{m:.6}")),
            peaks.len()
        ));
    }
    Ok(())
}

/// CSV table of a sweep.
pub fn sweep_csv(result: &SweepResult) -> String {
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| vec![num(r.value), opt(r.mean), opt(r.phase_time), num(r.hartman), opt(r.probability), r.error.clone().unwrap_or_default()])
        .collect();
    csv_string(&[result.parameter.name(), "mean", "phase_time", "hartman", "probability", "error"], &rows)
}

fn sweep(out: &mut Out) -> Result<()> {
    let cfg = out.cfg;
    let sw = cfg.sweep.ok_or_else(|| ToaError::Scenario("the sweep command needs a [sweep] section".into()))?;
    let PotentialConfig::SquareBarrier { height, width } = cfg.potential else {
        return Err(ToaError::Scenario("sweeps need kind = square_barrier".into()));
    };
    let engine = Engine::new(cfg.options);
    let (pk, x) = (&cfg.packet, cfg.detectors[0]);
    let missing = |what: &str| ToaError::Scenario(format!("[potential] needs '{what}' for this sweep"));
    let result = match sw.parameter {
        SweepParameter::Height => {
            sweep_barrier_height_with(&engine, pk, width.ok_or_else(|| missing("width"))?, x, (sw.from, sw.to), sw.count, Execution::Parallel)?
        }
        SweepParameter::Width => {
            let h = height.ok_or_else(|| missing("height"))?;
            sweep_barrier_width_with(&engine, pk, (2.0 * pk.mass * h).sqrt(), x, (sw.from, sw.to), sw.count, Execution::Parallel)?
        }
    };
    out.write("sweep", "csv", &sweep_csv(&result))?;
    let mut summary = format!("parameter = {}\nt0 = {}\n", result.parameter.name(), num(result.t0));
    let describe = |name: &str, v: Option<(usize, f64)>| match v {
        Some((k, d)) => format!("{name} = {}, {}, {}\n", num(result.rows[k].value), num(result.rows[k + 1].value), num(d)),
        None => format!("{name} = none\n"),
    };
    summary.push_str(&describe("largest_drop", result.largest_drop()));
    summary.push_str(&describe("largest_jump", result.largest_jump()));
    if let Some((k, m)) = result.max_mean() {
        let _ = writeln!(summary, "max_mean = {}, {}", num(result.rows[k].value), num(m));
    }
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    let _ = writeln!(summary, "failed_rows = {failed}");
    out.write("sweep_summary", "txt", &summary)?;
    if cfg.output.svg {
        let v = result.values();
        let col = |f: &dyn Fn(&crate::analysis::SweepRow) -> Option<f64>| result.rows.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect::<Vec<_>>();
        let (m, ph, h) = (col(&|r| r.mean), col(&|r| r.phase_time), col(&|r| Some(r.hartman)));
        let t0 = vec![result.t0; v.len()];
        let title = format!("mean arrival time at x = {x}");
        out.write("sweep", "svg", &line_plot(&title, result.parameter.name(), "t", &v, &[("mean", &m), ("phase time", &ph), ("Hartman", &h), ("free", &t0)]))?;
    }
    out.report.messages.extend(summary.lines().map(String::from));
    Ok(())
}

fn classical(out: &mut Out) -> Result<()> {
    let cfg = out.cfg;
    let spec = cfg.potential_spec()?;
    let pk = &cfg.packet;
    let (lo, hi) = pk.momentum_window();
    let lo = lo.max(1e-3 * pk.p0);
    let n = 201;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for &x in &cfg.detectors {
        for k in 0..n {
            let p = lo + (hi - lo) * k as f64 / (n - 1) as f64;
            let st = ClassicalState::new(pk.q0, p, pk.mass)?;
            let t = classical_toa(&st, x, &spec)?.time();
            let t_lie = lie_toa(&st, x, &spec).ok().and_then(|t| t.time());
            rows.push(vec![num(x), num(p), opt(t), opt(t_lie), num(pk.momentum_density(p))]);
        }
        let mean = classical_ensemble_mean(pk, x, &spec);
        let _ = writeln!(summary, "x = {}, ensemble_mean = {}", num(x), mean.as_ref().map_or_else(|e| e.to_string(), |m| num(*m)));
    }
    out.write("classical", "csv", &csv_string(&["x", "p", "t_classical", "t_lie", "weight"], &rows))?;
    out.write("classical_summary", "txt", &summary)?;
    out.report.messages.extend(summary.lines().map(String::from));
    Ok(())
}
