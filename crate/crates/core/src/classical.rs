//! Classical equation of time and the Jacobi-Lie map.
//!
//! Every potential model is piecewise linear in `q`, so the equation of time
//! is summed in closed form piece by piece. The Jacobi-Lie route integrates
//! `dQ/dq = 1/sqrt(1 - V/H)` numerically and serves as an independent check.

use crate::error::{Result, ToaError};
use crate::kinematics::GaussianPacket;
use crate::quadrature::{integrate_adaptive, integrate_adaptive_scalar, AdaptiveOptions, Segment};
use crate::scattering::PotentialSpec;

/// Relative slack on `H - V` at the end of a path, so that a detector placed
/// exactly at the turning point still counts as reached.
const END_SLACK: f64 = 1e-14;

/// Minimum fraction of the packet that must reach the detector.
pub const MIN_COVERAGE: f64 = 0.99;

/// Phase-space point of a particle of mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub q: f64,
    pub p: f64,
    pub m: f64,
}

impl ClassicalState {
    pub fn new(q: f64, p: f64, m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(ToaError::InvalidParameter(format!("mass must be positive, got {m}")));
        }
        if !(q.is_finite() && p.is_finite()) {
            return Err(ToaError::InvalidParameter(format!("state ({q}, {p}) must be finite")));
        }
        Ok(Self { q, p, m })
    }

    /// `H = p²/2m + V(q)`.
    pub fn energy(&self, spec: &PotentialSpec) -> Result<f64> {
        Ok(self.p * self.p / (2.0 * self.m) + spec.value(self.q)?)
    }
}

/// Outcome of the equation of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalToa {
    Reached(f64),
    Unreachable,
}

impl ClassicalToa {
    pub fn time(self) -> Option<f64> {
        match self {
            Self::Reached(t) => Some(t),
            Self::Unreachable => None,
        }
    }

    pub fn is_reached(self) -> bool {
        matches!(self, Self::Reached(_))
    }
}

/// Linear pieces `(c, d, V(c+), V(d-))` covering `[lo, hi]`.
pub(crate) fn pieces(spec: &PotentialSpec, lo: f64, hi: f64) -> Result<Vec<(f64, f64, f64, f64)>> {
    let mut cuts = vec![lo];
    let mut inner = vec![0.0];
    match spec {
        PotentialSpec::SquareBarrier { width, .. } => inner.push(*width),
        PotentialSpec::SampledSmooth(s) => inner.extend_from_slice(s.grid()),
        _ => {}
    }
    cuts.extend(inner.into_iter().filter(|&k| k > lo && k < hi));
    cuts.push(hi);
    let constant = matches!(spec, PotentialSpec::Free | PotentialSpec::Step { .. } | PotentialSpec::SquareBarrier { .. });
    cuts.windows(2)
        .map(|w| {
            let (c, d) = (w[0], w[1]);
            if constant {
                let v = spec.value(0.5 * (c + d))?;
                Ok((c, d, v, v))
            } else {
                Ok((c, d, spec.value(c)?, spec.value(d)?))
            }
        })
        .collect()
}

/// Equation of time from `from` to `to` at energy `energy`, moving in the
/// direction of `sign`: `sign √(m/2) ∫ dq / √(H - V)`.
pub fn classical_toa_from(energy: f64, sign: f64, mass: f64, from: f64, to: f64, spec: &PotentialSpec) -> Result<ClassicalToa> {
    if from == to {
        return Ok(ClassicalToa::Reached(0.0));
    }
    if sign == 0.0 {
        return Ok(ClassicalToa::Unreachable);
    }
    let (lo, hi, orient) = if to > from { (from, to, 1.0) } else { (to, from, -1.0) };
    let slack = END_SLACK * energy.abs().max(f64::MIN_POSITIVE);
    let mut integral = 0.0;
    for (c, d, vc, vd) in pieces(spec, lo, hi)? {
        let (kc, kd) = (energy - vc, energy - vd);
        // only the detector end may sit on a turning point
        let ok = |k: f64, at: f64| if at == to { k >= -slack } else { k > 0.0 };
        if !(ok(kc, c) && ok(kd, d)) {
            return Ok(ClassicalToa::Unreachable);
        }
        // exact for linear V, free of cancellation when V is nearly flat
        integral += 2.0 * (d - c) / (kc.max(0.0).sqrt() + kd.max(0.0).sqrt());
    }
    Ok(ClassicalToa::Reached(sign.signum() * orient * (0.5 * mass).sqrt() * integral))
}

/// Classical time of arrival of `state` at `x`.
pub fn classical_toa(state: &ClassicalState, x: f64, spec: &PotentialSpec) -> Result<ClassicalToa> {
    spec.validate()?;
    let h = state.energy(spec)?;
    if state.p == 0.0 {
        return Ok(if x == state.q { ClassicalToa::Reached(0.0) } else { ClassicalToa::Unreachable });
    }
    classical_toa_from(h, state.p, state.m, state.q, x, spec)
}

/// Smallest `q >= 0` with `V(q) >= E`, if any.
pub fn turning_point(energy: f64, spec: &PotentialSpec) -> Result<Option<f64>> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(ToaError::Domain { what: "energy", value: energy, expected: "E > 0" });
    }
    spec.validate()?;
    Ok(match spec {
        PotentialSpec::Free => None,
        PotentialSpec::Step { height } | PotentialSpec::SquareBarrier { height, .. } => (*height >= energy).then_some(0.0),
        PotentialSpec::LinearRamp { force } => Some(energy / force),
        PotentialSpec::SampledSmooth(s) => s.cells().find_map(|((c, d), (vc, vd))| {
            if vc >= energy {
                Some(c)
            } else if vd >= energy {
                Some(c + (d - c) * (energy - vc) / (vd - vc))
            } else {
                None
            }
        }),
    })
}

/// Canonical position `Q(q) = ∫_0^q dq' / sqrt(1 - V(q')/H)` at energy `H`.
pub fn lie_position(q: f64, energy: f64, spec: &PotentialSpec) -> Result<f64> {
    if q <= 0.0 {
        return Ok(q);
    }
    spec.value(q)?;
    let mut cuts = vec![0.0];
    match spec {
        PotentialSpec::SquareBarrier { width, .. } if *width < q => cuts.push(*width),
        PotentialSpec::SampledSmooth(s) => cuts.extend(s.grid().iter().copied().filter(|&g| g > 0.0 && g < q)),
        _ => {}
    }
    cuts.push(q);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (c, len) = (w[0], w[1] - w[0]);
        for at in [c + 0.5 * len, w[1]] {
            let k = energy - spec.value(at.min(q))?;
            if k < -END_SLACK * energy || (at != q && k <= 0.0) {
                return Err(ToaError::Unreachable { from: 0.0, to: q });
            }
        }
        // q = c + len·s(2 - s) absorbs a square-root zero at the right end
        total += integrate_adaptive_scalar(
            0.0,
            1.0,
            |s| {
                let x = c + len * s * (2.0 - s);
                let v = spec.value(x).unwrap_or(f64::INFINITY);
                2.0 * len * (1.0 - s) / (1.0 - v / energy).max(f64::MIN_POSITIVE).sqrt()
            },
            1e-13,
            0.0,
        )?;
    }
    Ok(total)
}

/// Jacobi-Lie map `(q, p) -> (Q, P)` with `P = sign(p) sqrt(2mH)`.
pub fn jacobi_lie_map(state: &ClassicalState, spec: &PotentialSpec) -> Result<(f64, f64)> {
    let h = state.energy(spec)?;
    let big_p = state.p.signum() * (2.0 * state.m * h).sqrt();
    Ok((lie_position(state.q, h, spec)?, big_p))
}

/// Time of arrival through the Jacobi-Lie variables, `m (X - Q) / P`.
pub fn lie_toa(state: &ClassicalState, x: f64, spec: &PotentialSpec) -> Result<ClassicalToa> {
    if !classical_toa(state, x, spec)?.is_reached() {
        return Ok(ClassicalToa::Unreachable);
    }
    let (big_q, big_p) = jacobi_lie_map(state, spec)?;
    let h = state.energy(spec)?;
    let big_x = lie_position(x, h, spec)?;
    Ok(ClassicalToa::Reached(state.m * (big_x - big_q) / big_p))
}

/// Lowest forward momentum for which a particle starting at `q0` clears
/// every barrier on the way to `x` (`x > q0`).
fn reach_threshold(q0: f64, x: f64, mass: f64, spec: &PotentialSpec) -> Result<f64> {
    let v0 = spec.value(q0)?;
    let mut vmax = v0;
    for (_, _, vc, vd) in pieces(spec, q0, x)? {
        vmax = vmax.max(vc).max(vd);
    }
    Ok((2.0 * mass * (vmax - v0)).sqrt())
}

/// `|ψ̃(p)|²`-weighted classical arrival time at `x`, over the momenta that
/// get there (moving toward `x`), renormalized.
pub fn classical_ensemble_mean(packet: &GaussianPacket, x: f64, spec: &PotentialSpec) -> Result<f64> {
    packet.validate()?;
    spec.validate()?;
    let (lo, hi) = packet.momentum_window();
    let forward = x >= packet.q0;
    let mut branches = vec![0.0];
    if forward {
        branches.push(reach_threshold(packet.q0, x, packet.mass, spec)?);
    }
    let segments = Segment::split_at_branches(lo, hi, &branches);
    let res = integrate_adaptive::<3, _>(
        &segments,
        |p| {
            let w = packet.momentum_density(p);
            if (p > 0.0) != forward || p == 0.0 {
                return Ok([w, 0.0, 0.0]);
            }
            let st = ClassicalState::new(packet.q0, p, packet.mass)?;
            Ok(match classical_toa(&st, x, spec)? {
                ClassicalToa::Reached(t) => [w, w, w * t],
                ClassicalToa::Unreachable => [w, 0.0, 0.0],
            })
        },
        &AdaptiveOptions::default(),
    )?;
    let fraction = res.value[1] / res.value[0];
    if !(fraction >= MIN_COVERAGE) {
        return Err(ToaError::Coverage { fraction, required: MIN_COVERAGE });
    }
    Ok(res.value[2] / res.value[1])
}
