use crate::error::{Result, ToaError};

/// Smallest accepted number of grid points.
pub const MIN_POINTS: usize = 16;

/// Uniform time grid `t_min, t_min + dt, ..., t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        let g = Self { t_min, t_max, n_points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return Err(ToaError::InvalidParameter(format!("time grid needs t_min < t_max, got [{}, {}]", self.t_min, self.t_max)));
        }
        if self.n_points < MIN_POINTS {
            return Err(ToaError::InvalidParameter(format!("time grid needs at least {MIN_POINTS} points, got {}", self.n_points)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.n_points {
            self.t_max
        } else {
            self.t_min + k as f64 * self.spacing()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.time(k)).collect()
    }

    /// Trapezoid rule over the grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let inner: f64 = values[1..values.len() - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (values[0] + values[values.len() - 1]))
    }
}

/// How the engine chooses the time axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GridPolicy {
    /// Sized from the packet's energy spread and widened until the tail
    /// mass outside the grid is negligible.
    #[default]
    Auto,
    Fixed(TimeGrid),
}
