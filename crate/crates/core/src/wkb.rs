//! Quasi-classical (WKB) eigenstates for smooth potentials, with reflection
//! neglected:
//!
//! ```text
//! ⟨x|E⟩ = sqrt(m/2πp) exp(ipx)                       x < 0
//!       = sqrt(m/2πp(x)) exp(i ∫_0^x p(q) dq)         x >= 0
//! ```

use crate::classical::pieces;
use crate::engine::{ArrivalDistribution, EigenBasis, Engine, GridPolicy, WithSlope};
use crate::error::{Result, ToaError};
use crate::kinematics::GaussianPacket;
use crate::quadrature::{integrate_adaptive, integrate_adaptive_scalar, AdaptiveOptions, Segment};
use crate::scattering::{Channel, PotentialSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Guard band around turning points, as a fraction of the energy.
pub const TURN_GUARD: f64 = 1e-3;

const ACTION_TOL: f64 = 1e-10;

/// Points where `V` is not smooth, inside `(0, x)`.
fn kinks(spec: &PotentialSpec, x: f64) -> Vec<f64> {
    let mut out = match spec {
        PotentialSpec::SquareBarrier { width, .. } => vec![*width],
        PotentialSpec::SampledSmooth(s) => s.grid().to_vec(),
        _ => Vec::new(),
    };
    out.retain(|&k| k > 0.0 && k < x);
    out
}

/// Largest `V` on `[0, x]` and where it occurs.
pub fn max_potential(spec: &PotentialSpec, x: f64) -> Result<(f64, f64)> {
    if x < 0.0 {
        return Ok((0.0, x));
    }
    let mut best = (spec.value(0.0)?, 0.0);
    let mut consider = |q: f64| -> Result<()> {
        let v = spec.value(q)?;
        if v > best.0 {
            best = (v, q);
        }
        Ok(())
    };
    for k in kinks(spec, x) {
        consider(k)?;
        consider(k - f64::EPSILON * k.abs().max(1.0))?;
    }
    consider(x)?;
    Ok(best)
}

/// Local momentum `p(q) = sqrt(2m(E - V(q)))` and action integrals at one energy.
#[derive(Debug, Clone, PartialEq)]
pub struct WkbState {
    pub energy: f64,
    pub mass: f64,
    spec: PotentialSpec,
}

impl WkbState {
    pub fn new(energy: f64, spec: &PotentialSpec, mass: f64) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(ToaError::Domain { what: "energy", value: energy, expected: "E > 0" });
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ToaError::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        spec.validate()?;
        Ok(Self { energy, mass, spec: spec.clone() })
    }

    pub fn momentum(&self) -> f64 {
        (2.0 * self.mass * self.energy).sqrt()
    }

    fn margin_ok(&self, q: f64) -> Result<f64> {
        let margin = self.energy - self.spec.value(q)?;
        if margin < TURN_GUARD * self.energy {
            return Err(ToaError::TurningPoint { position: q, margin });
        }
        Ok(margin)
    }

    /// `p(q)`; errors inside the turning-point guard band.
    pub fn local_momentum(&self, q: f64) -> Result<f64> {
        Ok((2.0 * self.mass * self.margin_ok(q)?).sqrt())
    }

    fn check_path(&self, x: f64) -> Result<()> {
        let (v, q) = max_potential(&self.spec, x)?;
        let margin = self.energy - v;
        if margin < TURN_GUARD * self.energy {
            return Err(ToaError::TurningPoint { position: q, margin });
        }
        Ok(())
    }

    fn pieces(&self, x: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![0.0];
        cuts.extend(kinks(&self.spec, x));
        cuts.push(x);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    fn integrate<F: Fn(f64) -> f64>(&self, x: f64, f: F) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in self.pieces(x) {
            // sample the interior so one-sided potential values at the cuts are used
            total += integrate_adaptive_scalar(a, b, &f, ACTION_TOL, 0.0)?;
        }
        Ok(total)
    }

    fn p_inside(&self, q: f64) -> f64 {
        let v = self.spec.value(q).unwrap_or(f64::INFINITY);
        (2.0 * self.mass * (self.energy - v)).max(0.0).sqrt()
    }

    /// `S(x) = ∫_0^x p(q) dq`, or `p x` left of the origin. Summed cell by
    /// cell in closed form, which is exact for piecewise-linear `V`.
    pub fn action(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(self.momentum() * x);
        }
        self.check_path(x)?;
        let c = (2.0 * self.mass).sqrt();
        let mut total = 0.0;
        for (a, b, va, vb) in pieces(&self.spec, 0.0, x)? {
            let (ka, kb) = (self.energy - va, self.energy - vb);
            total += 2.0 / 3.0 * c * (b - a) * (ka + (ka * kb).sqrt() + kb) / (ka.sqrt() + kb.sqrt());
        }
        Ok(total)
    }

    /// `dS/dp = ∫_0^x p/p(q) dq`, or `x` left of the origin.
    pub fn action_slope(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(x);
        }
        self.check_path(x)?;
        let c = (2.0 * self.mass).sqrt();
        let mut total = 0.0;
        for (a, b, va, vb) in pieces(&self.spec, 0.0, x)? {
            total += 2.0 * (b - a) / (c * ((self.energy - va).sqrt() + (self.energy - vb).sqrt()));
        }
        Ok(self.momentum() * total)
    }

    /// `S(x)` by adaptive Gauss-Legendre quadrature, independent of the
    /// closed form.
    pub fn action_quadrature(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(self.momentum() * x);
        }
        self.check_path(x)?;
        self.integrate(x, |q| self.p_inside(q))
    }

    /// `dS/dp` by quadrature.
    pub fn action_slope_quadrature(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(x);
        }
        self.check_path(x)?;
        let p = self.momentum();
        self.integrate(x, |q| p / self.p_inside(q))
    }

    /// `m ∫_0^x dq/p(q)`, the classical flight time from the origin.
    pub fn flight_time(&self, x: f64) -> Result<f64> {
        Ok(self.mass * self.action_slope(x)? / self.momentum())
    }
}

/// `⟨x|E⟩` in the WKB approximation.
pub fn wkb_eigenfunction(x: f64, energy: f64, spec: &PotentialSpec, mass: f64) -> Result<Complex64> {
    let st = WkbState::new(energy, spec, mass)?;
    let p = st.momentum();
    if x < 0.0 {
        return Ok(Complex64::from_polar((mass / (2.0 * PI * p)).sqrt(), p * x));
    }
    let px = st.local_momentum(x)?;
    Ok(Complex64::from_polar((mass / (2.0 * PI * px)).sqrt(), st.action(x)?))
}

/// WKB eigenbasis seen from a detector at `x`.
///
/// Only right movers are represented, and momenta below the guard band of
/// the highest point of `V` on `[0, x]` are closed.
#[derive(Debug, Clone)]
pub struct WkbBasis {
    spec: PotentialSpec,
    mass: f64,
    x: f64,
    threshold: f64,
}

impl WkbBasis {
    pub fn for_detector(spec: &PotentialSpec, mass: f64, x: f64) -> Result<Self> {
        spec.validate()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ToaError::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        let (vmax, _) = max_potential(spec, x)?;
        let threshold = (2.0 * mass * vmax / (1.0 - TURN_GUARD)).sqrt();
        Ok(Self { spec: spec.clone(), mass, x, threshold })
    }

    fn check(&self, channel: Channel, x: f64) -> Result<()> {
        if channel != Channel::RightMover {
            return Err(ToaError::Unsupported("left-incident WKB states".into()));
        }
        if x > self.x {
            return Err(ToaError::InvalidParameter(format!("WKB basis prepared for x <= {}, asked for {x}", self.x)));
        }
        Ok(())
    }
}

impl EigenBasis for WkbBasis {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn channels(&self) -> Vec<Channel> {
        vec![Channel::RightMover]
    }

    fn threshold(&self, _channel: Channel) -> f64 {
        self.threshold
    }

    fn wave(&self, channel: Channel, x: f64, p: f64) -> Result<WithSlope> {
        self.check(channel, x)?;
        let i = Complex64::i();
        if x < 0.0 {
            let e = Complex64::from_polar(1.0, p * x);
            return Ok((e, i * x * e));
        }
        let st = WkbState::new(p * p / (2.0 * self.mass), &self.spec, self.mass)?;
        let px = st.local_momentum(x)?;
        let w = Complex64::from_polar((p / px).sqrt(), st.action(x)?);
        let dlog = 0.5 / p - 0.5 * p / (px * px) + i * st.action_slope(x)?;
        Ok((w, w * dlog))
    }

    fn far_left(&self, channel: Channel, _p: f64) -> Result<WithSlope> {
        self.check(channel, f64::NEG_INFINITY)?;
        Ok((Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)))
    }

    fn split(&self, channel: Channel, x: f64, p: f64) -> Result<(Complex64, Complex64)> {
        Ok((self.wave(channel, x, p)?.0, Complex64::new(0.0, 0.0)))
    }
}

fn check_window(packet: &GaussianPacket, basis: &WkbBasis) -> Result<()> {
    packet.validate()?;
    let (lo, _) = packet.momentum_window();
    if lo <= basis.threshold {
        let e = lo * lo / (2.0 * packet.mass);
        let (v, q) = max_potential(&basis.spec, basis.x)?;
        return Err(ToaError::TurningPoint { position: q, margin: e - v });
    }
    Ok(())
}

/// Arrival distribution at `x` built from WKB eigenstates.
pub fn wkb_arrival(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<ArrivalDistribution> {
    wkb_arrival_with(&Engine::default(), x, packet, spec, GridPolicy::Auto)
}

pub fn wkb_arrival_with(engine: &Engine, x: f64, packet: &GaussianPacket, spec: &PotentialSpec, grid: GridPolicy) -> Result<ArrivalDistribution> {
    let basis = WkbBasis::for_detector(spec, packet.mass, x)?;
    check_window(packet, &basis)?;
    engine.distribution(&basis, x, packet, grid)
}

/// `P₊(x) = ∫ dp (p/p(x)) |ψ̃(p)|²`.
pub fn wkb_probability(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<f64> {
    let basis = WkbBasis::for_detector(spec, packet.mass, x)?;
    check_window(packet, &basis)?;
    Engine::default().probability(&basis, x, packet)
}

/// `|ψ̃|²`-weighted classical time of arrival: `m(x - q0)/p` for `x < 0`,
/// `-m q0/p + m ∫_0^x dq/p(q)` otherwise.
pub fn wkb_mean(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<f64> {
    let basis = WkbBasis::for_detector(spec, packet.mass, x)?;
    check_window(packet, &basis)?;
    let (lo, hi) = packet.momentum_window();
    let m = packet.mass;
    let res = integrate_adaptive::<2, _>(
        &[Segment::plain(lo, hi)],
        |p| {
            let w = packet.momentum_density(p);
            let t = if x < 0.0 {
                m * (x - packet.q0) / p
            } else {
                let st = WkbState::new(p * p / (2.0 * m), spec, m)?;
                -m * packet.q0 / p + st.flight_time(x)?
            };
            Ok([w, w * t])
        },
        &AdaptiveOptions::default(),
    )?;
    Ok(res.value[1] / res.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn free_reduces_to_plane_wave() {
        let v = wkb_eigenfunction(3.0, 2.0, &PotentialSpec::Free, 1.0).unwrap();
        let expected = Complex64::from_polar((1.0 / (2.0 * PI * 2.0)).sqrt(), 6.0);
        assert!((v - expected).norm() < 1e-12);
    }

    #[test]
    fn modulus_ratio_at_half_energy() {
        // V(x) = E/2 at x = 0.25 for f = 100, E = 50
        let spec = PotentialSpec::linear_ramp(100.0).unwrap();
        let w = wkb_eigenfunction(0.25, 50.0, &spec, 1.0).unwrap();
        let free = wkb_eigenfunction(-0.25, 50.0, &spec, 1.0).unwrap();
        assert_relative_eq!(w.norm() / free.norm(), 2f64.powf(0.25), max_relative = 1e-12);
    }

    #[test]
    fn ramp_action_closed_form() {
        // (p³ - p(x)³)/(3mf)
        let st = WkbState::new(50.0, &PotentialSpec::linear_ramp(100.0).unwrap(), 1.0).unwrap();
        let p: f64 = 10.0;
        let px: f64 = 50f64.sqrt();
        assert_relative_eq!(st.action(0.25).unwrap(), (p.powi(3) - px.powi(3)) / 300.0, max_relative = 1e-10);
        assert_relative_eq!(st.action(0.25).unwrap(), 2.154_822_031_355_65, max_relative = 1e-10);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let spec = PotentialSpec::sampled(vec![0.0, 0.3, 1.0, 1.7, 2.0], vec![0.0, 2.0, 9.0, 4.0, 4.5]).unwrap();
        let st = WkbState::new(12.0, &spec, 1.3).unwrap();
        for x in [0.1, 0.3, 0.95, 1.9, 2.0] {
            assert_relative_eq!(st.action(x).unwrap(), st.action_quadrature(x).unwrap(), max_relative = 1e-10);
            assert_relative_eq!(st.action_slope(x).unwrap(), st.action_slope_quadrature(x).unwrap(), max_relative = 1e-10);
        }
        let barrier = WkbState::new(5.0, &PotentialSpec::square_barrier(1.0, 2.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(barrier.action(3.0).unwrap(), barrier.action_quadrature(3.0).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn action_is_monotone() {
        let st = WkbState::new(50.0, &PotentialSpec::linear_ramp(100.0).unwrap(), 1.0).unwrap();
        let mut prev = st.action(0.0).unwrap();
        for k in 1..=40 {
            let s = st.action(0.01 * k as f64).unwrap();
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn guard_band_is_enforced() {
        let spec = PotentialSpec::linear_ramp(100.0).unwrap();
        assert!(matches!(wkb_eigenfunction(0.4996, 50.0, &spec, 1.0), Err(ToaError::TurningPoint { .. })));
        assert!(wkb_eigenfunction(0.499, 50.0, &spec, 1.0).is_ok());
    }

    #[test]
    fn sampled_table_matches_ramp() {
        let q: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
        let v: Vec<f64> = q.iter().map(|q| 10.0 * q).collect();
        let sampled = PotentialSpec::sampled(q, v).unwrap();
        let ramp = PotentialSpec::linear_ramp(10.0).unwrap();
        let a = WkbState::new(50.0, &sampled, 1.0).unwrap().action(0.73).unwrap();
        let b = WkbState::new(50.0, &ramp, 1.0).unwrap().action(0.73).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn free_mean_and_probability() {
        let pk = GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap();
        let m = wkb_mean(50.0, &pk, &PotentialSpec::Free).unwrap();
        assert!((m - 40.0).abs() < 0.2);
        assert_relative_eq!(wkb_probability(50.0, &pk, &PotentialSpec::Free).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn left_of_origin_is_free() {
        let pk = GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap();
        let spec = PotentialSpec::linear_ramp(0.1).unwrap();
        let a = wkb_mean(-5.0, &pk, &spec).unwrap();
        let b = wkb_mean(-5.0, &pk, &PotentialSpec::Free).unwrap();
        assert_eq!(a, b);
    }
}
