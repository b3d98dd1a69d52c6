//! Arrival amplitudes, time-of-arrival densities and mean arrival times.
//!
//! For a detector at `x` the arrival amplitude of channel `s` is
//!
//! ```text
//! A_s(t, x) = (1/sqrt(2π)) ∫ dp sqrt(p/m) exp(-ip²t/2m) W_s(x, p) O_s(p)
//! ```
//!
//! with `W_s` the stripped eigenfunction and `O_s` the packet overlap
//! (`ψ̃(p)` for a right mover prepared left of the potential). The density
//! is `Σ_s |A_s|² / P(x)` with `P(x) = Σ_s ∫ |W_s O_s|² dp`.

pub mod basis;
mod detector;
mod grid;
mod reflection;

pub use basis::{EigenBasis, ExactBasis, WithSlope};
pub use grid::{GridPolicy, TimeGrid, MIN_POINTS};
pub use reflection::{
    decompose_reflection, decompose_reflection_in, incident_reflected_times, mean_round_trip_time, split_mean_toa_total_reflection, Decomposition,
    TotalReflectionSplit,
};

use crate::error::{Result, ToaError};
use crate::kinematics::GaussianPacket;
use crate::scattering::{barrier_coefficient_slopes, step_coefficient_slope, step_coefficients, PotentialSpec};
use detector::{single_amplitude, Detector, Solved};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Arrival probability below which the density is left undefined.
pub const UNDEFINED_BELOW: f64 = 1e-12;
/// Largest tail mass accepted by [`mean_toa_moment`].
pub const MOMENT_TAIL: f64 = 1e-6;

/// Which energy-eigenstate channels enter the sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelPolicy {
    /// Right movers only for well-separated packets, every open channel
    /// otherwise.
    #[default]
    Auto,
    RightOnly,
    AllOpen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Relative tolerance of the momentum quadratures.
    pub rel_tol: f64,
    /// Accepted amplitude change when every panel is halved, relative to
    /// the largest amplitude.
    pub amplitude_tol: f64,
    /// Tail mass left outside an automatic time grid.
    pub tail_tol: f64,
    /// Cap on automatic grid size.
    pub max_grid_points: usize,
    pub channels: ChannelPolicy,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, amplitude_tol: 1e-8, tail_tol: 1e-9, max_grid_points: 1 << 21, channels: ChannelPolicy::Auto }
    }
}

/// Normalized transmitted, reflected and interference densities.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub transmitted: Vec<f64>,
    pub reflected: Vec<f64>,
    pub interference: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalDistribution {
    pub x: f64,
    pub grid: TimeGrid,
    /// `P(x)`.
    pub total_probability: f64,
    /// `P(t, x)` on the grid; `None` when `P(x)` is too small to normalize.
    pub density: Option<Vec<f64>>,
    /// First moment of the density on the grid.
    pub mean: Option<f64>,
    /// Fraction of `P(x)` not captured by the grid.
    pub tail_mass: f64,
    pub components: Option<Components>,
}

impl ArrivalDistribution {
    pub fn is_defined(&self) -> bool {
        self.density.is_some()
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// Trapezoid integral of the density.
    pub fn normalization(&self) -> Option<f64> {
        self.density.as_ref().map(|d| self.grid.trapezoid(d))
    }
}

/// Engine with explicit options; the free functions use the defaults.
#[derive(Debug, Clone, Copy, Default)]
pub struct Engine {
    pub options: EngineOptions,
}

impl Engine {
    pub fn new(options: EngineOptions) -> Self {
        Self { options }
    }

    fn detector<'a>(&self, basis: &'a dyn EigenBasis, packet: &GaussianPacket, x: f64) -> Result<Detector<'a>> {
        Detector::new(basis, packet, x, &self.options)
    }

    pub fn amplitude(&self, basis: &dyn EigenBasis, t: f64, x: f64, packet: &GaussianPacket) -> Result<Complex64> {
        let det = self.detector(basis, packet, x)?;
        let solved = det.solve()?;
        single_amplitude(&det, &solved, t)
    }

    pub fn probability(&self, basis: &dyn EigenBasis, x: f64, packet: &GaussianPacket) -> Result<f64> {
        Ok(self.detector(basis, packet, x)?.solve()?.probability)
    }

    /// Mean arrival time from the momentum-space phase derivative,
    /// `(1/P) Σ_s ∫ dp (m/p) Im(g_s* dg_s/dp)`.
    pub fn mean_phase(&self, basis: &dyn EigenBasis, x: f64, packet: &GaussianPacket) -> Result<f64> {
        let s = self.detector(basis, packet, x)?.solve()?;
        if !(s.probability > 0.0) {
            return Err(ToaError::Domain { what: "arrival probability", value: s.probability, expected: "P(x) > 0" });
        }
        Ok(s.phase_moment / s.probability)
    }

    pub fn distribution(&self, basis: &dyn EigenBasis, x: f64, packet: &GaussianPacket, policy: GridPolicy) -> Result<ArrivalDistribution> {
        let det = self.detector(basis, packet, x)?;
        let solved = det.solve()?;
        let with_split = basis.splits_at(x);
        if !(solved.probability > UNDEFINED_BELOW) {
            let grid = match policy {
                GridPolicy::Fixed(g) => g,
                GridPolicy::Auto => self.guess_grid(&det, &solved).unwrap_or(TimeGrid { t_min: 0.0, t_max: 1.0, n_points: MIN_POINTS }),
            };
            return Ok(ArrivalDistribution { x, grid, total_probability: solved.probability, density: None, mean: None, tail_mass: 1.0, components: None });
        }
        let (grid, amps) = match policy {
            GridPolicy::Fixed(g) => {
                g.validate()?;
                (g, det.amplitudes(&solved, &g, with_split)?)
            }
            GridPolicy::Auto => self.auto_grid(&det, &solved, with_split)?,
        };
        Ok(assemble(x, grid, solved.probability, amps, with_split))
    }

    fn guess_grid(&self, det: &Detector, solved: &Solved) -> Result<TimeGrid> {
        let (t_lo, t_hi, de) = det.phase_time_range(solved)?;
        let pk = &det.packet;
        let pad = 8.0 * pk.mass * pk.delta / pk.p0;
        make_grid(t_lo - pad, t_hi + pad, de, self.options.max_grid_points)
    }

    fn auto_grid(&self, det: &Detector, solved: &Solved, with_split: bool) -> Result<(TimeGrid, Amps)> {
        let (t_lo, t_hi, de) = det.phase_time_range(solved)?;
        let pk = &det.packet;
        let pad = 8.0 * pk.mass * pk.delta / pk.p0;
        let (mut lo, mut hi) = (t_lo - pad, t_hi + pad);
        let mut tail = 1.0;
        for _ in 0..24 {
            let grid = make_grid(lo, hi, de, self.options.max_grid_points)?;
            let amps = det.amplitudes(solved, &grid, with_split)?;
            let dens: Vec<f64> = amps.0.iter().map(|a| a.norm_sqr()).collect();
            tail = 1.0 - grid.trapezoid(&dens) / solved.probability;
            if tail.abs() <= self.options.tail_tol {
                return Ok((grid, amps));
            }
            // widen toward the heavier edge
            let span = hi - lo;
            let edge_max = dens.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            let left = dens[0] / edge_max;
            let right = dens[dens.len() - 1] / edge_max;
            let (wl, wr) = if left > 1e3 * right {
                (1.0, 0.25)
            } else if right > 1e3 * left {
                (0.25, 1.0)
            } else {
                (0.5, 0.5)
            };
            lo -= wl * span;
            hi += wr * span;
        }
        Err(ToaError::GridTooSmall { captured: 1.0 - tail, required: 1.0 - self.options.tail_tol })
    }

    pub fn phase_time(&self, p: f64, x: f64, q0: f64, spec: &PotentialSpec, mass: f64) -> Result<f64> {
        wigner_phase_time(p, x, q0, spec, mass)
    }
}

type Amps = (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>);

fn make_grid(lo: f64, hi: f64, energy_spread: f64, max_points: usize) -> Result<TimeGrid> {
    let dt = PI / (2.0 * energy_spread);
    let n = (((hi - lo) / dt).ceil() as usize + 1).max(512);
    if n > max_points {
        return Err(ToaError::GridTooSmall { captured: f64::NAN, required: max_points as f64 });
    }
    TimeGrid::new(lo, hi, n)
}

fn assemble(x: f64, grid: TimeGrid, prob: f64, amps: Amps, with_split: bool) -> ArrivalDistribution {
    let (a, tr, rf) = amps;
    let density: Vec<f64> = a.iter().map(|v| v.norm_sqr() / prob).collect();
    let captured = grid.trapezoid(&density);
    let times = grid.times();
    let first: Vec<f64> = times.iter().zip(&density).map(|(t, d)| t * d).collect();
    let components = with_split.then(|| Components {
        transmitted: tr.iter().map(|v| v.norm_sqr() / prob).collect(),
        reflected: rf.iter().map(|v| v.norm_sqr() / prob).collect(),
        interference: tr.iter().zip(&rf).map(|(a, b)| 2.0 * (a * b.conj()).re / prob).collect(),
    });
    ArrivalDistribution { x, grid, total_probability: prob, mean: Some(grid.trapezoid(&first)), density: Some(density), tail_mass: 1.0 - captured, components }
}

fn exact(spec: &PotentialSpec, packet: &GaussianPacket) -> Result<ExactBasis> {
    packet.validate()?;
    ExactBasis::new(spec, packet.mass)
}

/// `⟨t, x|ψ⟩` for a packet scattering off `spec`.
pub fn arrival_amplitude(t: f64, x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<Complex64> {
    Engine::default().amplitude(&exact(spec, packet)?, t, x, packet)
}

/// Normalized time-of-arrival density at `x`.
pub fn arrival_distribution(x: f64, packet: &GaussianPacket, spec: &PotentialSpec, grid: GridPolicy) -> Result<ArrivalDistribution> {
    Engine::default().distribution(&exact(spec, packet)?, x, packet, grid)
}

/// Probability `P(x)` that the particle arrives at `x` at any time.
pub fn arrival_probability(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<f64> {
    Engine::default().probability(&exact(spec, packet)?, x, packet)
}

/// Trapezoid first moment of a distribution.
pub fn mean_toa_moment(dist: &ArrivalDistribution) -> Result<f64> {
    let mean = dist.mean.ok_or(ToaError::Domain { what: "arrival probability", value: dist.total_probability, expected: "P(x) > 1e-12" })?;
    if !(dist.tail_mass.abs() <= MOMENT_TAIL) {
        return Err(ToaError::GridTooSmall { captured: 1.0 - dist.tail_mass, required: 1.0 - MOMENT_TAIL });
    }
    Ok(mean)
}

/// Mean arrival time from the phase of the arrival integrand.
pub fn mean_toa_phase(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<f64> {
    Engine::default().mean_phase(&exact(spec, packet)?, x, packet)
}

/// `(m/p)(x - q0 + d arg T/dp)` at a single momentum.
pub fn wigner_phase_time(p: f64, x: f64, q0: f64, spec: &PotentialSpec, mass: f64) -> Result<f64> {
    crate::scattering::solve(spec, p, mass)?;
    let darg = match spec {
        PotentialSpec::Free => 0.0,
        PotentialSpec::Step { height } => {
            let t = step_coefficients(p, *height, mass)?.transmission;
            let pv = (2.0 * mass * height).sqrt();
            if p <= pv {
                return Err(ToaError::Domain { what: "momentum", value: p, expected: "above the step (no transmission below it)" });
            }
            (step_coefficient_slope(p, pv) / t).im
        }
        PotentialSpec::SquareBarrier { height, width } => {
            let [(t, dt), _] = barrier_coefficient_slopes(p, (2.0 * mass * height).sqrt(), *width);
            if t.norm() == 0.0 {
                return Err(ToaError::PhaseDerivative { p, reason: "transmission amplitude underflows".into() });
            }
            (dt / t).im
        }
        _ => return Err(ToaError::Unsupported("phase time without a transmitted wave".into())),
    };
    Ok(mass / p * (x - q0 + darg))
}

/// Hartman value `t0 - m a / p0`.
pub fn hartman_time(t0: f64, a: f64, p0: f64, mass: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0.is_finite()) {
        return Err(ToaError::Domain { what: "p0", value: p0, expected: "p0 > 0" });
    }
    Ok(t0 - mass * a / p0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn standard() -> GaussianPacket {
        GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap()
    }

    #[test]
    fn hartman_values() {
        assert_eq!(hartman_time(40.0, 15.0, 2.0, 1.0).unwrap(), 32.5);
        assert_eq!(hartman_time(40.0, 0.0, 2.0, 1.0).unwrap(), 40.0);
        assert_eq!(hartman_time(40.0, 10.0, 2.0, 1.0).unwrap(), 35.0);
        assert!(hartman_time(40.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn free_phase_time_is_kinematic() {
        let t = wigner_phase_time(2.0, 50.0, -30.0, &PotentialSpec::Free, 1.0).unwrap();
        assert_eq!(t, 40.0);
    }

    #[test]
    fn free_probability_and_means() {
        let pk = standard();
        let p = arrival_probability(50.0, &pk, &PotentialSpec::Free).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-10);
        let mean = mean_toa_phase(50.0, &pk, &PotentialSpec::Free).unwrap();
        // <m(x - q0)/p> = 80 <1/p>
        assert!((mean - 40.0).abs() < 0.2, "{mean}");
        let d = arrival_distribution(50.0, &pk, &PotentialSpec::Free, GridPolicy::Auto).unwrap();
        assert!((d.normalization().unwrap() - 1.0).abs() < 1e-8);
        assert_relative_eq!(mean_toa_moment(&d).unwrap(), mean, max_relative = 1e-6);
    }

    #[test]
    fn tiny_probability_leaves_density_undefined() {
        let pk = standard();
        let spec = PotentialSpec::square_barrier(2.6 * 2.6 / 2.0, 15.0).unwrap();
        let d = arrival_distribution(50.0, &pk, &spec, GridPolicy::Auto).unwrap();
        assert!(!d.is_defined());
        assert!(mean_toa_moment(&d).is_err());
    }
}
