//! Quantum time-of-arrival (TOA) distributions for one-dimensional
//! Gaussian wave packets.
//!
//! The arrival amplitude at a detector `x` is built from the stationary
//! scattering states of the potential, so the same machinery covers free
//! motion, steps, square barriers (tunneling and the Hartman effect),
//! a linear ramp (total reflection through Airy functions) and smooth
//! sampled potentials in the WKB approximation. Natural units with
//! `hbar = 1` are used everywhere.
//!
//! Module map:
//!
//! * [`kinematics`]: the Gaussian initial state.
//! * [`specfun`]: real Airy functions `Ai`, `Ai'`.
//! * [`scattering`]: stationary states, transmission and reflection.
//! * [`wkb`]: quasi-classical eigenstates and arrival distributions.
//! * [`engine`]: arrival amplitudes, densities, probabilities and mean times.
//! * [`classical`]: the classical equation of time and Jacobi-Lie map.
//! * [`analysis`]: barrier sweeps and peak detection.
//! * [`io`]: scenario files, CSV/SVG output and the command runner.

pub mod analysis;
pub mod classical;
pub mod engine;
mod error;
pub mod io;
pub mod kinematics;
pub mod par;
pub mod quadrature;
pub mod scattering;
pub mod specfun;
pub mod wkb;

pub use error::{Result, ToaError};
pub use kinematics::GaussianPacket;
pub use num_complex::Complex64;
pub use scattering::PotentialSpec;
