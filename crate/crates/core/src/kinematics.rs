//! The Gaussian initial state in position and momentum representation.

use crate::error::{Result, ToaError};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Number of momentum standard deviations kept on each side of `p0`.
pub const WINDOW_SIGMAS: f64 = 8.0;

/// Relative lower cutoff of the momentum window (the `1/sqrt(p)` measure is
/// singular at `p = 0`).
pub const P_FLOOR_FRACTION: f64 = 1e-6;

/// Whether the "narrow packet far from the interaction" approximations hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketQuality {
    /// `p0 * delta >= 5` and `|q0| >= 3 * delta`.
    Good,
    /// One of the thresholds fails; the negative-momentum tail and the
    /// part of the packet at `q > 0` are no longer negligible.
    Marginal,
}

/// Gaussian wave packet of width `Δq = 2δ` centred at `q0` with mean
/// momentum `p0`:
///
/// ```text
/// ψ̃(p) = (2δ²/π)^{1/4} exp(-δ²(p - p0)² - i p q0)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub q0: f64,
    pub p0: f64,
    pub delta: f64,
    pub mass: f64,
}

impl GaussianPacket {
    pub fn new(q0: f64, p0: f64, delta: f64, mass: f64) -> Result<Self> {
        let packet = Self { q0, p0, delta, mass };
        packet.validate()?;
        Ok(packet)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.q0.is_finite() {
            return Err(ToaError::InvalidParameter(format!("q0 must be finite, got {}", self.q0)));
        }
        for (name, v) in [("p0", self.p0), ("delta", self.delta), ("mass", self.mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ToaError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Standard deviation of `|ψ̃(p)|²`.
    pub fn sigma_p(&self) -> f64 {
        0.5 / self.delta
    }

    /// Mean kinetic energy at `p0`.
    pub fn energy(&self) -> f64 {
        self.p0 * self.p0 / (2.0 * self.mass)
    }

    pub fn quality(&self) -> PacketQuality {
        if self.p0 * self.delta >= 5.0 && self.q0.abs() >= 3.0 * self.delta {
            PacketQuality::Good
        } else {
            PacketQuality::Marginal
        }
    }

    /// `ψ̃(p)`.
    pub fn momentum_amplitude(&self, p: f64) -> Complex64 {
        let d2 = self.delta * self.delta;
        let norm = (2.0 * d2 / PI).powf(0.25);
        let dp = p - self.p0;
        Complex64::from_polar(norm * (-d2 * dp * dp).exp(), -p * self.q0)
    }

    /// `dψ̃/dp`.
    pub fn momentum_amplitude_slope(&self, p: f64) -> Complex64 {
        let d2 = self.delta * self.delta;
        self.momentum_amplitude(p) * Complex64::new(-2.0 * d2 * (p - self.p0), -self.q0)
    }

    /// `|ψ̃(p)|²`.
    pub fn momentum_density(&self, p: f64) -> f64 {
        let d2 = self.delta * self.delta;
        let dp = p - self.p0;
        (2.0 * d2 / PI).sqrt() * (-2.0 * d2 * dp * dp).exp()
    }

    /// `ψ(q)`, written without the `exp(-δ²p0²)` prefactor so it does not
    /// overflow for large `δ p0`.
    pub fn position_amplitude(&self, q: f64) -> Complex64 {
        let d2 = self.delta * self.delta;
        let norm = (1.0 / (2.0 * PI * d2)).powf(0.25);
        let s = q - self.q0;
        Complex64::from_polar(norm * (-s * s / (4.0 * d2)).exp(), self.p0 * s)
    }

    /// Momentum interval used by the arrival quadratures:
    /// `[max(p_floor, p0 - 8σ_p), p0 + 8σ_p]`, or `[p_floor, p0 + 8σ_p]`
    /// for marginal packets, whose negative-momentum tail matters.
    pub fn momentum_window(&self) -> (f64, f64) {
        let s = WINDOW_SIGMAS * self.sigma_p();
        let hi = self.p0 + s;
        match self.quality() {
            PacketQuality::Good => ((self.p0 - s).max(P_FLOOR_FRACTION * self.p0), hi),
            PacketQuality::Marginal => (1e-9 * hi, hi),
        }
    }

    /// The same packet displaced by `shift` in position.
    pub fn translated(&self, shift: f64) -> Self {
        Self { q0: self.q0 + shift, ..*self }
    }
}
