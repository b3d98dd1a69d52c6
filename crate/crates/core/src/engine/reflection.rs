//! Transmitted/reflected decomposition and the total-reflection time split.

use super::basis::{EigenBasis, ExactBasis};
use super::detector::Detector;
use super::{ArrivalDistribution, Engine, GridPolicy};
use crate::error::{Result, ToaError};
use crate::kinematics::GaussianPacket;
use crate::quadrature::{integrate_adaptive, AdaptiveOptions, Segment};
use crate::scattering::{PotentialSpec, RampState};

/// `P(x) = P_tr + P_ref + I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub transmitted: f64,
    pub reflected: f64,
    pub interference: f64,
    pub total: f64,
}

/// Splits the arrival probability into positive-current, negative-current
/// and interference parts:
/// `P_tr = ∫|Φ_tr O|²`, `P_ref = ∫|Φ_ref O|²`, `I = 2∫|O|² Re(Φ_tr Φ_ref*)`.
pub fn decompose_reflection(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<Decomposition> {
    decompose_reflection_in(&Engine::default(), &ExactBasis::new(spec, packet.mass)?, x, packet)
}

pub fn decompose_reflection_in(engine: &Engine, basis: &dyn EigenBasis, x: f64, packet: &GaussianPacket) -> Result<Decomposition> {
    if !basis.splits_at(x) {
        return Err(ToaError::Unsupported(format!("current split at x = {x}")));
    }
    let det = Detector::new(basis, packet, x, &engine.options)?;
    let solved = det.solve()?;
    let [tr, rf, int] = det.integrate::<3, _>(&solved, |ch, p| {
        let (a, b) = basis.split(ch, x, p)?;
        let (o, _) = det.overlap(ch, p)?;
        let n = o.norm_sqr();
        Ok([a.norm_sqr() * n, b.norm_sqr() * n, 2.0 * (a * b.conj()).re * n])
    })?;
    Ok(Decomposition { transmitted: tr, reflected: rf, interference: int, total: solved.probability })
}

fn ramp_force(spec: &PotentialSpec) -> Result<f64> {
    match spec {
        PotentialSpec::LinearRamp { force } => Ok(*force),
        other => Err(ToaError::Unsupported(format!("total-reflection times for the {} potential", other.name()))),
    }
}

/// Arrival times of the incoming and reflected waves at energy `E`:
/// `t_i = (m/p)(dφ/dp - dδ/dp - q0)` and `t_r = (m/p)(-dφ/dp - dδ/dp - q0)`.
pub fn incident_reflected_times(x: f64, energy: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<(f64, f64)> {
    let force = ramp_force(spec)?;
    packet.validate()?;
    if !(energy.is_finite() && energy > 0.0) {
        return Err(ToaError::Domain { what: "energy", value: energy, expected: "E > 0" });
    }
    let m = packet.mass;
    let p = (2.0 * m * energy).sqrt();
    times_at(&RampState::new(p, force, m)?, x, packet)
}

fn times_at(st: &RampState, x: f64, packet: &GaussianPacket) -> Result<(f64, f64)> {
    let k = packet.mass / st.momentum();
    let dd = st.phase_shift_slope();
    // dφ/dp - dδ/dp, which is exactly x left of the ramp
    let rel = if x <= 0.0 { x } else { st.phase_slope(x)? - dd };
    Ok((k * (rel - packet.q0), k * (-rel - 2.0 * dd - packet.q0)))
}

/// Packet average of `t_i + t_r` with weight `|ψ̃(p)|²`.
pub fn mean_round_trip_time(packet: &GaussianPacket, spec: &PotentialSpec) -> Result<f64> {
    let force = ramp_force(spec)?;
    packet.validate()?;
    let (lo, hi) = packet.momentum_window();
    let res = integrate_adaptive::<2, _>(
        &[Segment::plain(lo, hi)],
        |p| {
            let st = RampState::new(p, force, packet.mass)?;
            let (ti, tr) = times_at(&st, 0.0, packet)?;
            let w = packet.momentum_density(p);
            Ok([w, w * (ti + tr)])
        },
        &AdaptiveOptions::default(),
    )?;
    Ok(res.value[1] / res.value[0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalReflectionSplit {
    pub mean_incident: f64,
    pub mean_reflected: f64,
    pub distribution: ArrivalDistribution,
}

/// Means of `t_i` and `t_r` weighted by `M² cos²φ |ψ̃|²`, with the full
/// arrival distribution at `x`.
pub fn split_mean_toa_total_reflection(x: f64, packet: &GaussianPacket, spec: &PotentialSpec) -> Result<TotalReflectionSplit> {
    let force = ramp_force(spec)?;
    let engine = Engine::default();
    let basis = ExactBasis::new(spec, packet.mass)?;
    let distribution = engine.distribution(&basis, x, packet, GridPolicy::Auto)?;
    let det = Detector::new(&basis, packet, x, &engine.options)?;
    let solved = det.solve()?;
    let [w, wi, wr] = det.integrate::<3, _>(&solved, |_, p| {
        let st = RampState::new(p, force, packet.mass)?;
        let (m_mod, phi) = st.modulus_phase(x)?;
        let (ti, tr) = times_at(&st, x, packet)?;
        let w = m_mod * m_mod * phi.cos().powi(2) * packet.momentum_density(p);
        Ok([w, w * ti, w * tr])
    })?;
    if !(w > 0.0) {
        return Err(ToaError::Domain { what: "weight", value: w, expected: "nonzero wave at x" });
    }
    Ok(TotalReflectionSplit { mean_incident: wi / w, mean_reflected: wr / w, distribution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp_packet() -> GaussianPacket {
        GaussianPacket::new(-2.0, 10.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn round_trip_is_x_independent() {
        let pk = ramp_packet();
        let spec = PotentialSpec::linear_ramp(100.0).unwrap();
        let (a, b) = incident_reflected_times(-2.0, 50.0, &pk, &spec).unwrap();
        for x in [-1.5, -0.7, 0.0, 0.3] {
            let (c, d) = incident_reflected_times(x, 50.0, &pk, &spec).unwrap();
            assert_relative_eq!(a + b, c + d, max_relative = 1e-12);
        }
    }

    #[test]
    fn incident_time_at_origin_of_packet() {
        let pk = ramp_packet();
        let spec = PotentialSpec::linear_ramp(100.0).unwrap();
        let (ti, _) = incident_reflected_times(-2.0, 50.0, &pk, &spec).unwrap();
        assert_eq!(ti, 0.0);
    }

    #[test]
    fn free_potential_has_no_reflection() {
        let pk = GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap();
        let d = decompose_reflection(-5.0, &pk, &PotentialSpec::Free).unwrap();
        assert_eq!(d.reflected, 0.0);
        assert_eq!(d.interference, 0.0);
        assert_relative_eq!(d.transmitted, d.total, max_relative = 1e-12);
    }

    #[test]
    fn rejects_other_potentials() {
        let pk = ramp_packet();
        assert!(incident_reflected_times(0.0, 50.0, &pk, &PotentialSpec::Free).is_err());
    }
}
