//! Barrier sweeps and peak detection on arrival densities.

use crate::engine::{hartman_time, wigner_phase_time, ArrivalDistribution, Engine, ExactBasis};
use crate::error::{Result, ToaError};
use crate::kinematics::GaussianPacket;
use crate::par;
use crate::scattering::PotentialSpec;

/// Default peak threshold, as a fraction of the maximum density.
pub const DEFAULT_PROMINENCE: f64 = 0.02;

/// Local maxima whose rise above the deeper neighbouring dip is below this
/// fraction of the maximum density are treated as ripple.
const RIPPLE: f64 = 1e-3;

/// How a sweep distributes its rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Swept barrier parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Height,
    Width,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::Height => "p_v",
            Self::Width => "a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean: Option<f64>,
    /// Phase time at `p0`.
    pub phase_time: Option<f64>,
    pub hartman: f64,
    pub probability: Option<f64>,
    /// Engine error for this row, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    /// Free arrival time `m (x - q0)/p0`.
    pub t0: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn steps(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows.windows(2).enumerate().filter_map(|(k, w)| Some((k, w[1].mean? - w[0].mean?)))
    }

    /// Index `k` and size of the largest fall `mean[k] - mean[k+1]`.
    pub fn largest_drop(&self) -> Option<(usize, f64)> {
        self.steps().filter(|s| s.1 < 0.0).min_by(|a, b| a.1.total_cmp(&b.1)).map(|(k, d)| (k, -d))
    }

    /// Index `k` and size of the largest rise `mean[k+1] - mean[k]`.
    pub fn largest_jump(&self) -> Option<(usize, f64)> {
        self.steps().filter(|s| s.1 > 0.0).max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest mean in the sweep and its row.
    pub fn max_mean(&self) -> Option<(usize, f64)> {
        self.rows.iter().enumerate().filter_map(|(k, r)| Some((k, r.mean?))).max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    pub fn means(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.mean).collect()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn check_range(lo: f64, hi: f64, n: usize) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) || n == 0 {
        return Err(ToaError::InvalidParameter(format!("sweep range [{lo}, {hi}] with {n} points must be positive and ordered")));
    }
    Ok(())
}

fn row(engine: &Engine, packet: &GaussianPacket, x: f64, value: f64, p_v: f64, a: f64, t0: f64) -> SweepRow {
    let hartman = t0 - packet.mass * a / packet.p0;
    let height = p_v * p_v / (2.0 * packet.mass);
    let eval = || -> Result<(f64, f64)> {
        let spec = PotentialSpec::square_barrier(height, a)?;
        let basis = ExactBasis::new(&spec, packet.mass)?;
        Ok((engine.mean_phase(&basis, x, packet)?, engine.probability(&basis, x, packet)?))
    };
    let phase_time = PotentialSpec::square_barrier(height, a).and_then(|s| wigner_phase_time(packet.p0, x, packet.q0, &s, packet.mass)).ok();
    match eval() {
        Ok((mean, prob)) => SweepRow { value, mean: Some(mean), phase_time, hartman, probability: Some(prob), error: None },
        Err(e) => SweepRow { value, mean: None, phase_time, hartman, probability: None, error: Some(e.to_string()) },
    }
}

fn sweep(engine: &Engine, packet: &GaussianPacket, x: f64, parameter: SweepParameter, fixed: f64, values: &[f64], exec: Execution) -> Result<SweepResult> {
    packet.validate()?;
    let end = values.iter().copied().fold(fixed, f64::max);
    let a_max = if parameter == SweepParameter::Width { end } else { fixed };
    if !(x > a_max) {
        return Err(ToaError::InvalidParameter(format!("detector x = {x} must lie beyond the barrier (width up to {a_max})")));
    }
    let t0 = packet.mass * (x - packet.q0) / packet.p0;
    hartman_time(t0, a_max, packet.p0, packet.mass)?;
    let one = |v: &f64| match parameter {
        SweepParameter::Height => row(engine, packet, x, *v, *v, fixed, t0),
        SweepParameter::Width => row(engine, packet, x, *v, fixed, *v, t0),
    };
    let rows = match exec {
        Execution::Parallel => par::map(values, one),
        Execution::Sequential => par::map_seq(values, one),
    };
    Ok(SweepResult { parameter, t0, rows })
}

/// Mean arrival time beyond a barrier of width `a` as `p_V` runs over
/// `[lo, hi]` in `n` steps.
pub fn sweep_barrier_height(packet: &GaussianPacket, a: f64, x: f64, range: (f64, f64), n: usize) -> Result<SweepResult> {
    sweep_barrier_height_with(&Engine::default(), packet, a, x, range, n, Execution::Parallel)
}

pub fn sweep_barrier_height_with(
    engine: &Engine,
    packet: &GaussianPacket,
    a: f64,
    x: f64,
    range: (f64, f64),
    n: usize,
    exec: Execution,
) -> Result<SweepResult> {
    check_range(range.0, range.1, n)?;
    if !(a.is_finite() && a > 0.0) {
        return Err(ToaError::InvalidParameter(format!("barrier width must be positive, got {a}")));
    }
    sweep(engine, packet, x, SweepParameter::Height, a, &linspace(range.0, range.1, n), exec)
}

/// Mean arrival time beyond a barrier of momentum `p_V` as the width runs
/// over `[lo, hi]` in `n` steps.
pub fn sweep_barrier_width(packet: &GaussianPacket, p_v: f64, x: f64, range: (f64, f64), n: usize) -> Result<SweepResult> {
    sweep_barrier_width_with(&Engine::default(), packet, p_v, x, range, n, Execution::Parallel)
}

pub fn sweep_barrier_width_with(
    engine: &Engine,
    packet: &GaussianPacket,
    p_v: f64,
    x: f64,
    range: (f64, f64),
    n: usize,
    exec: Execution,
) -> Result<SweepResult> {
    check_range(range.0, range.1, n)?;
    if !(p_v.is_finite() && p_v >= 0.0) {
        return Err(ToaError::InvalidParameter(format!("barrier momentum must be nonnegative, got {p_v}")));
    }
    sweep(engine, packet, x, SweepParameter::Width, p_v, &linspace(range.0, range.1, n), exec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub height: f64,
    /// Half width at half maximum.
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub window: (f64, f64),
}

impl PeakReport {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    /// Peaks with `t` inside `[t1, t2]`.
    pub fn within(&self, t1: f64, t2: f64) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(move |p| p.t >= t1 && p.t <= t2)
    }
}

/// Local maxima of the density inside `window` (the whole grid when `None`)
/// that reach `prominence` times the maximum density.
pub fn find_peaks(dist: &ArrivalDistribution, window: Option<(f64, f64)>, prominence: f64) -> Result<PeakReport> {
    if !(prominence.is_finite() && (0.0..1.0).contains(&prominence)) {
        return Err(ToaError::InvalidParameter(format!("prominence must lie in [0, 1), got {prominence}")));
    }
    let grid = dist.grid;
    let window = window.unwrap_or((grid.t_min, grid.t_max));
    let Some(density) = dist.density.as_deref() else {
        return Ok(PeakReport { peaks: Vec::new(), window });
    };
    Ok(PeakReport { peaks: peaks_in(density, |k| grid.time(k), grid.spacing(), window, prominence), window })
}

/// Peak search on raw samples `y[k]` at times `time(k)` spaced by `h`.
pub fn peaks_in(y: &[f64], time: impl Fn(usize) -> f64, h: f64, window: (f64, f64), prominence: f64) -> Vec<Peak> {
    let n = y.len();
    let ymax = y.iter().copied().fold(0.0, f64::max);
    if n < 3 || ymax <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for k in 1..n - 1 {
        let t = time(k);
        if t < window.0 || t > window.1 || !(y[k] > y[k - 1] && y[k] >= y[k + 1]) || y[k] < prominence * ymax {
            continue;
        }
        // rise above the deeper of the two surrounding dips
        let dip = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = y[k];
            for j in range {
                if y[j] > y[k] {
                    break;
                }
                low = low.min(y[j]);
            }
            low
        };
        let left = dip(&mut (0..k).rev());
        let right = dip(&mut (k + 1..n));
        if y[k] - left.max(right) < RIPPLE * ymax {
            continue;
        }
        let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
        let curv = a - 2.0 * b + c;
        let (shift, height) = if curv < 0.0 { (0.5 * (a - c) / curv, b - (a - c) * (a - c) / (8.0 * curv)) } else { (0.0, b) };
        let half = 0.5 * height;
        let cross = |dir: isize| -> f64 {
            let mut j = k as isize;
            while (0..n as isize).contains(&(j + dir)) {
                let next = (j + dir) as usize;
                if y[next] < half {
                    let (y0, y1) = (y[j as usize], y[next]);
                    return time(j as usize) + dir as f64 * h * (y0 - half) / (y0 - y1);
                }
                j += dir;
            }
            time(j as usize)
        };
        out.push(Peak { t: t + shift * h, height, half_width: 0.5 * (cross(1) - cross(-1)) });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian(t0: f64, w: f64) -> impl Fn(f64) -> f64 {
        move |t| (-(t - t0) * (t - t0) / (2.0 * w * w)).exp()
    }

    #[test]
    fn single_gaussian_peak() {
        let g = gaussian(3.37, 0.8);
        let h = 0.05;
        let y: Vec<f64> = (0..200).map(|k| g(k as f64 * h)).collect();
        let peaks = peaks_in(&y, |k| k as f64 * h, h, (0.0, 10.0), DEFAULT_PROMINENCE);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].t - 3.37).abs() < 1e-3);
        assert_relative_eq!(peaks[0].half_width, 0.8 * (2.0 * 2f64.ln()).sqrt(), max_relative = 1e-3);
    }

    #[test]
    fn threshold_and_window() {
        let (a, b) = (gaussian(2.0, 0.3), gaussian(6.0, 0.3));
        let h = 0.02;
        let y: Vec<f64> = (0..500).map(|k| a(k as f64 * h) + 0.01 * b(k as f64 * h)).collect();
        assert_eq!(peaks_in(&y, |k| k as f64 * h, h, (0.0, 10.0), 0.02).len(), 1);
        assert_eq!(peaks_in(&y, |k| k as f64 * h, h, (0.0, 10.0), 0.005).len(), 2);
        assert!(peaks_in(&y, |k| k as f64 * h, h, (3.0, 4.0), 0.005).is_empty());
    }

    #[test]
    fn ripple_is_ignored() {
        let g = gaussian(5.0, 1.0);
        let h = 0.01;
        let y: Vec<f64> = (0..1000).map(|k| g(k as f64 * h) + 1e-6 * ((k % 2) as f64)).collect();
        assert_eq!(peaks_in(&y, |k| k as f64 * h, h, (0.0, 10.0), 0.02).len(), 1);
    }

    #[test]
    fn drops_and_jumps() {
        let mk = |v: f64, m: f64| SweepRow { value: v, mean: Some(m), phase_time: None, hartman: 0.0, probability: None, error: None };
        let s = SweepResult { parameter: SweepParameter::Height, t0: 40.0, rows: vec![mk(1.0, 40.0), mk(2.0, 60.0), mk(3.0, 35.0), mk(4.0, 34.0)] };
        assert_eq!(s.largest_drop(), Some((1, 25.0)));
        assert_eq!(s.largest_jump(), Some((0, 20.0)));
        assert_eq!(s.max_mean(), Some((1, 60.0)));
    }

    #[test]
    fn small_sweep() {
        let pk = GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap();
        let s = sweep_barrier_height(&pk, 15.0, 50.0, (0.1, 0.1), 1).unwrap();
        assert!((s.rows[0].mean.unwrap() - 40.0).abs() < 0.4);
        assert_relative_eq!(s.rows[0].hartman, 32.5);
        assert!(sweep_barrier_height(&pk, 15.0, 10.0, (0.1, 1.0), 3).is_err());
    }
}
