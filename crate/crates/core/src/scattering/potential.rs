use crate::error::{Result, ToaError};

/// Potential table interpolated linearly between grid points.
///
/// The grid starts at `q = 0`; the potential vanishes to the left of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPotential {
    q: Vec<f64>,
    v: Vec<f64>,
}

impl SampledPotential {
    pub fn new(q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if q.len() != v.len() || q.len() < 2 {
            return Err(ToaError::InvalidParameter(format!(
                "sampled potential needs at least two (q, V) pairs of equal length, got {} and {}",
                q.len(),
                v.len()
            )));
        }
        if q[0] != 0.0 {
            return Err(ToaError::InvalidParameter(format!("sampled potential grid must start at q = 0, got {}", q[0])));
        }
        if q.windows(2).any(|w| !(w[1] > w[0])) || q.iter().any(|x| !x.is_finite()) {
            return Err(ToaError::InvalidParameter("sampled potential grid must be finite and strictly increasing".into()));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(ToaError::InvalidParameter(format!("sampled potential values must be finite and nonnegative, got {bad}")));
        }
        Ok(Self { q, v })
    }

    pub fn grid(&self) -> &[f64] {
        &self.q
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn end(&self) -> f64 {
        *self.q.last().expect("nonempty grid")
    }

    /// Interpolated potential; zero for `q < 0`, range error past the table.
    pub fn value(&self, q: f64) -> Result<f64> {
        if q < 0.0 {
            return Ok(0.0);
        }
        if !(q <= self.end()) {
            return Err(ToaError::Range { value: q, range: "sampled potential table [0, q_max]" });
        }
        let k = match self.q.partition_point(|&g| g <= q) {
            0 => 0,
            k if k >= self.q.len() => self.q.len() - 2,
            k => k - 1,
        };
        let (q0, q1) = (self.q[k], self.q[k + 1]);
        let t = (q - q0) / (q1 - q0);
        Ok(self.v[k] + t * (self.v[k + 1] - self.v[k]))
    }

    /// Index range of grid cells and their end points, for piecewise integration.
    pub fn cells(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.q.windows(2).zip(self.v.windows(2)).map(|(q, v)| ((q[0], q[1]), (v[0], v[1])))
    }
}

/// Potential model. Every variant vanishes for `q < 0` and is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Free,
    Step { height: f64 },
    SquareBarrier { height: f64, width: f64 },
    LinearRamp { force: f64 },
    SampledSmooth(SampledPotential),
}

impl PotentialSpec {
    pub fn step(height: f64) -> Result<Self> {
        let s = Self::Step { height };
        s.validate()?;
        Ok(s)
    }

    pub fn square_barrier(height: f64, width: f64) -> Result<Self> {
        let s = Self::SquareBarrier { height, width };
        s.validate()?;
        Ok(s)
    }

    pub fn linear_ramp(force: f64) -> Result<Self> {
        let s = Self::LinearRamp { force };
        s.validate()?;
        Ok(s)
    }

    pub fn sampled(q: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Ok(Self::SampledSmooth(SampledPotential::new(q, v)?))
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |name: &str, x: f64| {
            if x.is_finite() && x >= 0.0 {
                Ok(())
            } else {
                Err(ToaError::InvalidParameter(format!("{name} must be finite and nonnegative, got {x}")))
            }
        };
        match self {
            Self::Free => Ok(()),
            Self::Step { height } => nonneg("step height", *height),
            Self::SquareBarrier { height, width } => {
                nonneg("barrier height", *height)?;
                if width.is_finite() && *width > 0.0 {
                    Ok(())
                } else {
                    Err(ToaError::InvalidParameter(format!("barrier width must be positive, got {width}")))
                }
            }
            Self::LinearRamp { force } => {
                if force.is_finite() && *force > 0.0 {
                    Ok(())
                } else {
                    Err(ToaError::InvalidParameter(format!("ramp force must be positive, got {force}")))
                }
            }
            Self::SampledSmooth(s) => SampledPotential::new(s.q.clone(), s.v.clone()).map(|_| ()),
        }
    }

    /// `V(q)`.
    pub fn value(&self, q: f64) -> Result<f64> {
        Ok(match self {
            Self::Free => 0.0,
            Self::Step { height } => {
                if q < 0.0 {
                    0.0
                } else {
                    *height
                }
            }
            Self::SquareBarrier { height, width } => {
                if (0.0..=*width).contains(&q) {
                    *height
                } else {
                    0.0
                }
            }
            Self::LinearRamp { force } => force * q.max(0.0),
            Self::SampledSmooth(s) => s.value(q)?,
        })
    }

    /// `p_V = sqrt(2mV)` for the step and the barrier.
    pub fn barrier_momentum(&self, mass: f64) -> Option<f64> {
        match self {
            Self::Step { height } | Self::SquareBarrier { height, .. } => Some((2.0 * mass * height).sqrt()),
            _ => None,
        }
    }

    /// Right edge of the interaction region for potentials that are
    /// constant beyond it.
    pub fn range_end(&self) -> Option<f64> {
        match self {
            Self::Free => Some(0.0),
            Self::Step { .. } => Some(0.0),
            Self::SquareBarrier { width, .. } => Some(*width),
            Self::LinearRamp { .. } => None,
            Self::SampledSmooth(s) => Some(s.end()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Free => "free",
            Self::Step { .. } => "step",
            Self::SquareBarrier { .. } => "square_barrier",
            Self::LinearRamp { .. } => "linear_ramp",
            Self::SampledSmooth(_) => "sampled",
        }
    }
}
