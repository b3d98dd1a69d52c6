//! Energy eigenbases seen from a detector: stripped waves, their momentum
//! derivatives, and the coefficients needed for packet overlaps.

use crate::error::{Result, ToaError};
use crate::scattering::{
    barrier_coefficient_slopes, barrier_solution, barrier_wave_slope, split_currents, step_coefficient_slope, step_coefficients, step_left_split,
    step_left_transmission_slope, step_left_wave_slope, step_wave_slope, Channel, PotentialSpec, RampState,
};
use num_complex::Complex64;

/// A value together with its derivative in `p`.
pub type WithSlope = (Complex64, Complex64);

/// Eigenfunction source for the engine.
///
/// Waves are stripped of the `sqrt(m/2πp)` normalization and carry unit
/// incoming flux. Left of the potential the right mover is
/// `exp(ipq) + c exp(-ipq)` and the left mover `c exp(-ipq)`, where `c` is
/// what [`far_left`](EigenBasis::far_left) returns.
pub trait EigenBasis: Sync {
    fn mass(&self) -> f64;

    /// Channels the potential supports.
    fn channels(&self) -> Vec<Channel>;

    /// Lowest momentum at which `channel` is open.
    fn threshold(&self, _channel: Channel) -> f64 {
        0.0
    }

    /// Momenta with square-root branch behaviour.
    fn branch_points(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Stripped wave at `x` and its momentum derivative.
    fn wave(&self, channel: Channel, x: f64, p: f64) -> Result<WithSlope>;

    /// Coefficient of `exp(-ipq)` left of the potential, with its derivative.
    fn far_left(&self, channel: Channel, p: f64) -> Result<WithSlope>;

    /// Positive- and negative-current parts of the stripped wave at `x`.
    fn split(&self, channel: Channel, x: f64, p: f64) -> Result<(Complex64, Complex64)>;

    /// Whether [`split`](EigenBasis::split) is meaningful at `x`.
    fn splits_at(&self, _x: f64) -> bool {
        true
    }
}

/// Exact eigenstates of the closed-form potentials.
#[derive(Debug, Clone)]
pub struct ExactBasis {
    spec: PotentialSpec,
    mass: f64,
}

impl ExactBasis {
    pub fn new(spec: &PotentialSpec, mass: f64) -> Result<Self> {
        spec.validate()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(ToaError::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if let PotentialSpec::SampledSmooth(_) = spec {
            return Err(ToaError::Unsupported("exact eigenstates of a sampled potential (use the WKB basis)".into()));
        }
        Ok(Self { spec: spec.clone(), mass })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    fn pv(&self) -> f64 {
        self.spec.barrier_momentum(self.mass).unwrap_or(0.0)
    }

    fn ramp(&self, p: f64) -> Result<RampState> {
        match self.spec {
            PotentialSpec::LinearRamp { force } => RampState::new(p, force, self.mass),
            _ => unreachable!("ramp state requested for another potential"),
        }
    }

    fn check_open(&self, channel: Channel, p: f64) -> Result<()> {
        if channel == Channel::LeftMover && !self.channels().contains(&channel) {
            return Err(ToaError::Unsupported(format!("left-incident states of the {} potential", self.spec.name())));
        }
        if p <= self.threshold(channel) {
            return Err(ToaError::Domain { what: "momentum", value: p, expected: "above the channel threshold" });
        }
        Ok(())
    }
}

fn plane(p: f64, x: f64) -> WithSlope {
    let e = Complex64::from_polar(1.0, p * x);
    (e, Complex64::i() * x * e)
}

impl EigenBasis for ExactBasis {
    fn mass(&self) -> f64 {
        self.mass
    }

    fn channels(&self) -> Vec<Channel> {
        match self.spec {
            PotentialSpec::LinearRamp { .. } => vec![Channel::RightMover],
            _ => vec![Channel::RightMover, Channel::LeftMover],
        }
    }

    fn threshold(&self, channel: Channel) -> f64 {
        match (&self.spec, channel) {
            (PotentialSpec::Step { .. }, Channel::LeftMover) => self.pv(),
            _ => 0.0,
        }
    }

    fn branch_points(&self) -> Vec<f64> {
        match self.spec {
            PotentialSpec::Step { .. } => vec![self.pv()],
            _ => Vec::new(),
        }
    }

    fn wave(&self, channel: Channel, x: f64, p: f64) -> Result<WithSlope> {
        self.check_open(channel, p)?;
        let i = Complex64::i();
        Ok(match (&self.spec, channel) {
            (PotentialSpec::Free, Channel::RightMover) => plane(p, x),
            (PotentialSpec::Free, Channel::LeftMover) => plane(p, -x),
            (PotentialSpec::Step { .. }, Channel::RightMover) => step_wave_slope(x, p, self.pv()),
            (PotentialSpec::Step { .. }, Channel::LeftMover) => step_left_wave_slope(x, p, self.pv()),
            (PotentialSpec::SquareBarrier { width, .. }, Channel::RightMover) => barrier_wave_slope(x, p, self.pv(), *width),
            (PotentialSpec::SquareBarrier { width, .. }, Channel::LeftMover) => {
                let (w, dw) = barrier_wave_slope(width - x, p, self.pv(), *width);
                let e = Complex64::from_polar(1.0, -p * width);
                (e * w, e * (dw - i * width * w))
            }
            (PotentialSpec::LinearRamp { .. }, _) => {
                let st = self.ramp(p)?;
                let (w, dw) = st.standing_wave_slope(x)?;
                let e = Complex64::from_polar(1.0, -st.phase_shift());
                (e * w, e * (dw - i * st.phase_shift_slope() * w))
            }
            (PotentialSpec::SampledSmooth(_), _) => unreachable!(),
        })
    }

    fn far_left(&self, channel: Channel, p: f64) -> Result<WithSlope> {
        self.check_open(channel, p)?;
        let zero = Complex64::new(0.0, 0.0);
        Ok(match (&self.spec, channel) {
            (PotentialSpec::Free, Channel::RightMover) => (zero, zero),
            (PotentialSpec::Free, Channel::LeftMover) => (Complex64::new(1.0, 0.0), zero),
            (PotentialSpec::Step { height }, Channel::RightMover) => {
                let s = step_coefficients(p, *height, self.mass)?;
                (s.reflection, step_coefficient_slope(p, self.pv()))
            }
            (PotentialSpec::Step { .. }, Channel::LeftMover) => step_left_transmission_slope(p, self.pv()),
            (PotentialSpec::SquareBarrier { width, .. }, Channel::RightMover) => barrier_coefficient_slopes(p, self.pv(), *width)[1],
            (PotentialSpec::SquareBarrier { width, .. }, Channel::LeftMover) => barrier_coefficient_slopes(p, self.pv(), *width)[0],
            (PotentialSpec::LinearRamp { .. }, _) => {
                let st = self.ramp(p)?;
                let r = Complex64::from_polar(1.0, -2.0 * st.phase_shift());
                (r, -2.0 * Complex64::i() * st.phase_shift_slope() * r)
            }
            (PotentialSpec::SampledSmooth(_), _) => unreachable!(),
        })
    }

    fn split(&self, channel: Channel, x: f64, p: f64) -> Result<(Complex64, Complex64)> {
        self.check_open(channel, p)?;
        let zero = Complex64::new(0.0, 0.0);
        match (&self.spec, channel) {
            (PotentialSpec::Free, Channel::LeftMover) => Ok((zero, Complex64::from_polar(1.0, -p * x))),
            (PotentialSpec::Step { .. }, Channel::LeftMover) => Ok(step_left_split(x, p, self.pv())),
            (PotentialSpec::SquareBarrier { height, width }, Channel::LeftMover) => {
                let sol = barrier_solution(p, *height, *width, self.mass)?;
                let (tr, rf) = split_currents(width - x, &sol, &self.spec, self.mass)?;
                let e = Complex64::from_polar(1.0, -p * width);
                Ok((e * rf, e * tr))
            }
            (PotentialSpec::Step { height }, Channel::RightMover) => {
                let sol = step_coefficients(p, *height, self.mass)?;
                split_currents(x, &sol, &self.spec, self.mass)
            }
            (PotentialSpec::SquareBarrier { height, width }, Channel::RightMover) => {
                let sol = barrier_solution(p, *height, *width, self.mass)?;
                split_currents(x, &sol, &self.spec, self.mass)
            }
            (PotentialSpec::Free, Channel::RightMover) => Ok((Complex64::from_polar(1.0, p * x), zero)),
            (PotentialSpec::LinearRamp { .. }, _) => {
                let st = self.ramp(p)?;
                let (m, phi) = st.modulus_phase(x)?;
                let d = st.phase_shift();
                Ok((Complex64::from_polar(m, phi - d), Complex64::from_polar(m, -phi - d)))
            }
            (PotentialSpec::SampledSmooth(_), _) => unreachable!(),
        }
    }

    fn splits_at(&self, x: f64) -> bool {
        // the current split is undefined for evanescent waves inside a barrier
        !matches!(self.spec, PotentialSpec::SquareBarrier { width, .. } if (0.0..width).contains(&x))
    }
}
