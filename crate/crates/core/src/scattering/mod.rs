//! Stationary scattering states `⟨x|E r(+)⟩` for the supported potentials.
//!
//! Wave functions are handled in a *stripped* form: the physical state is
//! `sqrt(m / 2πp)` times the stripped wave, so a free right-mover is just
//! `exp(ipx)`. Step and square-barrier states come from interface
//! matching, the linear ramp from Airy functions.

mod barrier;
mod potential;
mod ramp;
mod step;

pub(crate) use barrier::{barrier_coefficient_slopes, barrier_wave_slope};
pub use barrier::{barrier_solution, barrier_transfer_transmission, barrier_transmission};
pub use potential::{PotentialSpec, SampledPotential};
pub use ramp::{linear_modulus_phase, phase_shift, RampState};
pub use step::step_coefficients;
pub(crate) use step::{step_coefficient_slope, step_left_split, step_left_transmission_slope, step_left_wave_slope, step_wave_slope};

use crate::error::{Result, ToaError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Degeneracy label of an energy eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Incoming from the left, moving right.
    RightMover,
    /// Incoming from the right, moving left.
    LeftMover,
}

/// Per-momentum stationary-state data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub p: f64,
    pub energy: f64,
    /// Reduced momentum `sqrt(p² - p_V²)` on the principal branch
    /// (`i|p'|` below the barrier momentum).
    pub p_prime: Complex64,
    pub transmission: Complex64,
    pub reflection: Complex64,
    /// Interior amplitudes `(α, β)` of `α cos(p'q) + β sin(p'q)/p'` on
    /// `0 <= q <= a`. Empty when the potential has no finite interior.
    pub interior: Vec<Complex64>,
    pub channel: Channel,
}

impl ScatteringSolution {
    pub fn free(p: f64, mass: f64) -> Self {
        Self {
            p,
            energy: p * p / (2.0 * mass),
            p_prime: Complex64::new(p, 0.0),
            transmission: Complex64::new(1.0, 0.0),
            reflection: Complex64::new(0.0, 0.0),
            interior: Vec::new(),
            channel: Channel::RightMover,
        }
    }
}

pub(crate) fn check_momentum(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(ToaError::Domain { what: "momentum", value: p, expected: "p > 0" })
    }
}

/// Principal square root of `p² - p_V²` as a complex number.
pub fn reduced_momentum(p: f64, barrier_momentum: f64) -> Complex64 {
    let d = p * p - barrier_momentum * barrier_momentum;
    if d >= 0.0 {
        Complex64::new(d.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-d).sqrt())
    }
}

/// Stationary right-mover solution of `spec` at momentum `p`.
pub fn solve(spec: &PotentialSpec, p: f64, mass: f64) -> Result<ScatteringSolution> {
    check_momentum(p)?;
    match spec {
        PotentialSpec::Free => Ok(ScatteringSolution::free(p, mass)),
        PotentialSpec::Step { height } => step_coefficients(p, *height, mass),
        PotentialSpec::SquareBarrier { height, width } => barrier_solution(p, *height, *width, mass),
        PotentialSpec::LinearRamp { force } => {
            let st = RampState::new(p, *force, mass)?;
            Ok(ScatteringSolution {
                p,
                energy: p * p / (2.0 * mass),
                p_prime: Complex64::new(p, 0.0),
                transmission: Complex64::new(0.0, 0.0),
                reflection: Complex64::from_polar(1.0, -2.0 * st.phase_shift()),
                interior: Vec::new(),
                channel: Channel::RightMover,
            })
        }
        PotentialSpec::SampledSmooth(_) => Err(ToaError::Unsupported("exact matching for sampled potentials (use the WKB module)".into())),
    }
}

/// Stripped right-mover wave and its `x` derivative.
pub(crate) fn stripped_wave(x: f64, sol: &ScatteringSolution, spec: &PotentialSpec, mass: f64) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let p = sol.p;
    let incident = |x: f64| {
        let e = Complex64::from_polar(1.0, p * x);
        let r = sol.reflection * Complex64::from_polar(1.0, -p * x);
        (e + r, i * p * (e - r))
    };
    match spec {
        PotentialSpec::Free => {
            let e = Complex64::from_polar(1.0, p * x);
            Ok((e, i * p * e))
        }
        PotentialSpec::Step { .. } => {
            if x < 0.0 {
                Ok(incident(x))
            } else {
                let w = sol.transmission * (i * sol.p_prime * x).exp();
                Ok((w, i * sol.p_prime * w))
            }
        }
        PotentialSpec::SquareBarrier { height, width } => {
            if x < 0.0 {
                Ok(incident(x))
            } else if x >= *width {
                let w = sol.transmission * Complex64::from_polar(1.0, p * x);
                Ok((w, i * p * w))
            } else {
                let pv = (2.0 * mass * height).sqrt();
                Ok(barrier::interior_wave(x, p, pv, *width))
            }
        }
        PotentialSpec::LinearRamp { force } => {
            let st = RampState::new(p, *force, mass)?;
            let (w, dw) = st.standing_wave(x)?;
            let phase = Complex64::from_polar(1.0, -st.phase_shift());
            Ok((phase * w, phase * dw))
        }
        PotentialSpec::SampledSmooth(_) => Err(ToaError::Unsupported("exact eigenfunction of a sampled potential".into())),
    }
}

/// The normalized eigenfunction `⟨x|E r(+)⟩`.
///
/// For finite-range potentials this is `sqrt(m/2πp)` times incident plus
/// reflected, interior, or transmitted waves. For the linear ramp it is the
/// real standing wave `(1/sqrt(2π)) (m/2E)^{1/4} M cos φ`.
pub fn eigenfunction(x: f64, sol: &ScatteringSolution, spec: &PotentialSpec, mass: f64) -> Result<Complex64> {
    check_momentum(sol.p)?;
    if let PotentialSpec::LinearRamp { force } = spec {
        let st = RampState::new(sol.p, *force, mass)?;
        let (m_mod, phi) = st.modulus_phase(x)?;
        let e = sol.energy;
        return Ok(Complex64::new((mass / (2.0 * e)).powf(0.25) * m_mod * phi.cos() / (2.0 * PI).sqrt(), 0.0));
    }
    if let PotentialSpec::SampledSmooth(s) = spec {
        s.value(x)?;
    }
    let (w, _) = stripped_wave(x, sol, spec, mass)?;
    Ok(w * (mass / (2.0 * PI * sol.p)).sqrt())
}

/// Splits the stripped wave at `x` into its positive-current (`Φ_tr`) and
/// negative-current (`Φ_ref`) parts.
///
/// Left of a finite barrier `Φ_tr = exp(ipx)` and `Φ_ref = R exp(-ipx)`,
/// which is the `R exp(-i(px + 2δ))` form with the phase of `R` written as
/// `-2δ`. Beyond the barrier `Φ_ref = 0`. On the linear ramp the two parts
/// are `M exp(i(φ - δ))` and `M exp(-i(φ + δ))`.
pub fn split_currents(x: f64, sol: &ScatteringSolution, spec: &PotentialSpec, mass: f64) -> Result<(Complex64, Complex64)> {
    let p = sol.p;
    let zero = Complex64::new(0.0, 0.0);
    let left = || (Complex64::from_polar(1.0, p * x), sol.reflection * Complex64::from_polar(1.0, -p * x));
    match spec {
        PotentialSpec::Free => Ok((Complex64::from_polar(1.0, p * x), zero)),
        PotentialSpec::Step { .. } => {
            if x < 0.0 {
                Ok(left())
            } else {
                Ok((stripped_wave(x, sol, spec, mass)?.0, zero))
            }
        }
        PotentialSpec::SquareBarrier { width, .. } => {
            if x < 0.0 {
                Ok(left())
            } else if x >= *width {
                Ok((sol.transmission * Complex64::from_polar(1.0, p * x), zero))
            } else {
                let pp = sol.p_prime;
                if pp.im != 0.0 || pp.re == 0.0 {
                    return Err(ToaError::Unsupported("current split inside a barrier below or at the barrier momentum".into()));
                }
                let (alpha, beta) = (sol.interior[0], sol.interior[1]);
                let a = alpha / 2.0 + beta / (2.0 * Complex64::i() * pp);
                let b = alpha / 2.0 - beta / (2.0 * Complex64::i() * pp);
                Ok((a * (Complex64::i() * pp * x).exp(), b * (-Complex64::i() * pp * x).exp()))
            }
        }
        PotentialSpec::LinearRamp { force } => {
            let st = RampState::new(p, *force, mass)?;
            let (m_mod, phi) = st.modulus_phase(x)?;
            let d = st.phase_shift();
            Ok((Complex64::from_polar(m_mod, phi - d), Complex64::from_polar(m_mod, -phi - d)))
        }
        PotentialSpec::SampledSmooth(_) => Err(ToaError::Unsupported("current split for sampled potentials".into())),
    }
}
