use super::check_momentum;
use crate::error::{Result, ToaError};
use crate::specfun::airy_pair;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Beyond this Airy argument the wave is zero to double precision.
const DEAD_ZONE: f64 = 200.0;

/// Airy representation of a right-incident state on `V = f q` for `q > 0`.
///
/// With `k_f = (2mf)^{1/3}` and `z = k_f q - p²/k_f²` the standing wave is
/// `M cos φ`, where `M exp(iφ) ∝ Ai(z) - i (k_f/p) Ai'(z)`, normalized so
/// `M = 1` for `q <= 0`, and `φ = pq + δ` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampState {
    p: f64,
    kf: f64,
    n0: f64,
    delta: f64,
    ddelta: f64,
}

/// `u = Ai(z)`, `v = -c Ai'(z)` and their momentum derivatives.
#[derive(Debug, Clone, Copy)]
struct Raw {
    u: f64,
    v: f64,
    du: f64,
    dv: f64,
    z: f64,
}

impl RampState {
    pub fn new(p: f64, force: f64, mass: f64) -> Result<Self> {
        check_momentum(p)?;
        if !(force.is_finite() && force > 0.0) {
            return Err(ToaError::Domain { what: "force", value: force, expected: "f > 0" });
        }
        let kf = (2.0 * mass * force).cbrt();
        let mut st = Self { p, kf, n0: 1.0, delta: 0.0, ddelta: 0.0 };
        let r0 = st.raw(0.0)?;
        let n2 = r0.u * r0.u + r0.v * r0.v;
        st.n0 = n2.sqrt();
        st.delta = branch(r0.v.atan2(r0.u), r0.z);
        st.ddelta = (r0.u * r0.dv - r0.v * r0.du) / n2;
        Ok(st)
    }

    fn raw(&self, q: f64) -> Result<Raw> {
        let (p, kf) = (self.p, self.kf);
        let z = kf * q.max(0.0) - p * p / (kf * kf);
        if z > DEAD_ZONE {
            return Ok(Raw { u: 0.0, v: 0.0, du: 0.0, dv: 0.0, z });
        }
        let a = airy_pair(z)?;
        let c = kf / p;
        let dz = -2.0 * p / (kf * kf);
        Ok(Raw { u: a.ai, v: -c * a.ai_prime, du: a.ai_prime * dz, dv: kf / (p * p) * a.ai_prime - c * z * a.ai * dz, z })
    }

    pub fn momentum(&self) -> f64 {
        self.p
    }

    /// `δ(E) = φ(0, E)`.
    pub fn phase_shift(&self) -> f64 {
        self.delta
    }

    /// `dδ/dp`.
    pub fn phase_shift_slope(&self) -> f64 {
        self.ddelta
    }

    /// `(M, φ)` at position `q`.
    pub fn modulus_phase(&self, q: f64) -> Result<(f64, f64)> {
        if q <= 0.0 {
            return Ok((1.0, self.p * q + self.delta));
        }
        let r = self.raw(q)?;
        let n = r.u.hypot(r.v);
        Ok((n / self.n0, branch(r.v.atan2(r.u), r.z)))
    }

    /// `dφ/dp` at position `q`.
    pub fn phase_slope(&self, q: f64) -> Result<f64> {
        if q <= 0.0 {
            return Ok(q + self.ddelta);
        }
        let r = self.raw(q)?;
        let n2 = r.u * r.u + r.v * r.v;
        if n2 == 0.0 {
            return Ok(0.0);
        }
        Ok((r.u * r.dv - r.v * r.du) / n2)
    }

    /// Real standing wave `2 M cos φ` (incoming wave of unit amplitude)
    /// and its `x` derivative.
    pub fn standing_wave(&self, q: f64) -> Result<(Complex64, Complex64)> {
        if q <= 0.0 {
            let th = self.p * q + self.delta;
            return Ok((Complex64::new(2.0 * th.cos(), 0.0), Complex64::new(-2.0 * self.p * th.sin(), 0.0)));
        }
        let r = self.raw(q)?;
        let c = self.kf / self.p;
        Ok((Complex64::new(2.0 * r.u / self.n0, 0.0), Complex64::new(-2.0 * r.v / c * self.kf / self.n0, 0.0)))
    }

    /// `2 M cos φ` and its momentum derivative.
    pub fn standing_wave_slope(&self, q: f64) -> Result<(f64, f64)> {
        if q <= 0.0 {
            let th = self.p * q + self.delta;
            return Ok((2.0 * th.cos(), -2.0 * th.sin() * (q + self.ddelta)));
        }
        let r0 = self.raw(0.0)?;
        let dn0 = (r0.u * r0.du + r0.v * r0.dv) / self.n0;
        let r = self.raw(q)?;
        Ok((2.0 * r.u / self.n0, 2.0 * (r.du * self.n0 - r.u * dn0) / (self.n0 * self.n0)))
    }
}

/// Picks the branch of `atan2` closest to the semiclassical phase
/// `π/4 - (2/3)(-z)^{3/2}`, which makes φ continuous in `q` and in `E`.
fn branch(raw: f64, z: f64) -> f64 {
    let reference = FRAC_PI_4 - 2.0 / 3.0 * (-z).max(0.0).powf(1.5);
    raw + 2.0 * PI * ((reference - raw) / (2.0 * PI)).round()
}

fn ramp_momentum(energy: f64, mass: f64) -> Result<f64> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(ToaError::Domain { what: "energy", value: energy, expected: "E > 0" });
    }
    Ok((2.0 * mass * energy).sqrt())
}

/// Modulus and phase `(M, φ)` of the ramp eigenfunction at `q`.
pub fn linear_modulus_phase(q: f64, energy: f64, force: f64, mass: f64) -> Result<(f64, f64)> {
    RampState::new(ramp_momentum(energy, mass)?, force, mass)?.modulus_phase(q)
}

/// Phase shift `δ(E) = φ(0, E)` of the linear ramp.
pub fn phase_shift(energy: f64, force: f64, mass: f64) -> Result<f64> {
    Ok(RampState::new(ramp_momentum(energy, mass)?, force, mass)?.phase_shift())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_modulus_left_of_origin() {
        for q in [-10.0, -0.5, 0.0] {
            let (m, _) = linear_modulus_phase(q, 50.0, 100.0, 1.0).unwrap();
            assert_eq!(m, 1.0);
        }
    }

    #[test]
    fn continuous_across_origin() {
        let st = RampState::new(10.0, 100.0, 1.0).unwrap();
        let (m_l, phi_l) = st.modulus_phase(-1e-14).unwrap();
        let (m_r, phi_r) = st.modulus_phase(1e-14).unwrap();
        assert!((m_l - m_r).abs() < 1e-10);
        assert!((phi_l - phi_r).abs() < 1e-10);
    }

    #[test]
    fn decays_past_turning_point() {
        let st = RampState::new(10.0, 100.0, 1.0).unwrap();
        let (m1, _) = st.modulus_phase(0.6).unwrap();
        let (m2, _) = st.modulus_phase(1.5).unwrap();
        let (m3, _) = st.modulus_phase(5.0).unwrap();
        assert!(m2 < m1 * 1e-3);
        assert!(m3 < 1e-30);
    }

    #[test]
    fn phase_continuous_in_q() {
        let st = RampState::new(10.0, 100.0, 1.0).unwrap();
        let mut prev = st.modulus_phase(0.0).unwrap().1;
        for k in 1..=1000 {
            let phi = st.modulus_phase(0.6 * k as f64 / 1000.0).unwrap().1;
            assert!((phi - prev).abs() < 0.2, "jump at step {k}");
            prev = phi;
        }
    }

    #[test]
    fn phase_shift_smooth_in_energy() {
        let mut prev = phase_shift(0.5, 100.0, 1.0).unwrap();
        for k in 1..1000 {
            let e = 0.5 + 99.5 * k as f64 / 999.0;
            let d = phase_shift(e, 100.0, 1.0).unwrap();
            assert!((d - prev).abs() < PI);
            prev = d;
        }
    }

    #[test]
    fn slopes_match_finite_differences() {
        let h = 1e-6;
        for q in [-1.0, 0.0, 0.2, 0.45, 0.55] {
            let st = RampState::new(10.0, 100.0, 1.0).unwrap();
            let up = RampState::new(10.0 + h, 100.0, 1.0).unwrap();
            let dn = RampState::new(10.0 - h, 100.0, 1.0).unwrap();
            let fd = (up.modulus_phase(q).unwrap().1 - dn.modulus_phase(q).unwrap().1) / (2.0 * h);
            assert_relative_eq!(st.phase_slope(q).unwrap(), fd, max_relative = 1e-6, epsilon = 1e-8);
            let fd = (up.standing_wave_slope(q).unwrap().0 - dn.standing_wave_slope(q).unwrap().0) / (2.0 * h);
            assert_relative_eq!(st.standing_wave_slope(q).unwrap().1, fd, max_relative = 1e-6, epsilon = 1e-7);
            let hx = 1e-7;
            let fd = (st.standing_wave(q + hx).unwrap().0 - st.standing_wave(q - hx).unwrap().0).re / (2.0 * hx);
            assert_relative_eq!(st.standing_wave(q).unwrap().1.re, fd, max_relative = 1e-5, epsilon = 1e-6);
        }
    }

    #[test]
    fn hard_wall_limit_has_vanishing_delay() {
        let slope = |f: f64| {
            let st = RampState::new(10.0, f, 1.0).unwrap();
            st.phase_shift_slope() / 10.0
        };
        assert!((slope(1e6) - slope(1e8)).abs() <= 1e-3);
    }

    #[test]
    fn delay_close_to_classical_for_deep_penetration() {
        // classical time to the turning point: p/f; exact Airy value frozen
        let st = RampState::new(10.0, 100.0, 1.0).unwrap();
        let dd_de = st.phase_shift_slope() / 10.0;
        assert_relative_eq!(dd_de, -0.104_597, max_relative = 1e-4);
        assert!((dd_de + 0.1).abs() / 0.1 < 0.05);
    }
}
