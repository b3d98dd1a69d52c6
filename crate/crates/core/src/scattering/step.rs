use super::{check_momentum, reduced_momentum, Channel, ScatteringSolution};
use crate::error::{Result, ToaError};
use num_complex::Complex64;

/// Step of height `V` at the origin: `T = 2p/(p+p')`, `R = (p-p')/(p+p')`.
///
/// Below the threshold `p'` is `i sqrt(p_V² - p²)`, which gives the
/// totally reflecting form `T = 2p/(p + i|p'|)`.
pub fn step_coefficients(p: f64, height: f64, mass: f64) -> Result<ScatteringSolution> {
    check_momentum(p)?;
    if !(height.is_finite() && height >= 0.0) {
        return Err(ToaError::InvalidParameter(format!("step height must be nonnegative, got {height}")));
    }
    let pp = reduced_momentum(p, (2.0 * mass * height).sqrt());
    let den = p + pp;
    Ok(ScatteringSolution {
        p,
        energy: p * p / (2.0 * mass),
        p_prime: pp,
        transmission: 2.0 * p / den,
        reflection: (p - pp) / den,
        interior: Vec::new(),
        channel: Channel::RightMover,
    })
}

/// `dT/dp`, which equals `dR/dp`; infinite at the threshold.
pub(crate) fn step_coefficient_slope(p: f64, pv: f64) -> Complex64 {
    let pp = reduced_momentum(p, pv);
    let den = p + pp;
    -2.0 * pv * pv / (pp * den * den)
}

/// Stripped wave of the step and its momentum derivative.
pub(crate) fn step_wave_slope(x: f64, p: f64, pv: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let pp = reduced_momentum(p, pv);
    let den = p + pp;
    let t = 2.0 * p / den;
    let r = (p - pp) / den;
    let dt = step_coefficient_slope(p, pv);
    if x < 0.0 {
        let e = Complex64::from_polar(1.0, p * x);
        let ec = e.conj();
        (e + r * ec, i * x * e + (dt - i * x * r) * ec)
    } else {
        let w = t * (i * pp * x).exp();
        (w, dt * (i * pp * x).exp() + w * i * x * p / pp)
    }
}

/// Left-incident channel of the step, open only above the threshold.
///
/// Amplitude `c = sqrt(p/p') T_l` of the transmitted wave `c exp(-ipx)` on
/// the left, with its momentum derivative.
pub(crate) fn step_left_transmission_slope(p: f64, pv: f64) -> (Complex64, Complex64) {
    let pp = (p * p - pv * pv).sqrt();
    let dpp = p / pp;
    let den = p + pp;
    let amp = (p / pp).sqrt();
    let damp = 0.5 / amp * (pp - p * dpp) / (pp * pp);
    let tl = 2.0 * pp / den;
    let dtl = 2.0 * (dpp * den - pp * (1.0 + dpp)) / (den * den);
    (Complex64::new(amp * tl, 0.0), Complex64::new(damp * tl + amp * dtl, 0.0))
}

/// Positive- and negative-current parts of the left-incident stripped wave.
pub(crate) fn step_left_split(x: f64, p: f64, pv: f64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    if x < 0.0 {
        let (c, _) = step_left_transmission_slope(p, pv);
        return (zero, c * Complex64::from_polar(1.0, -p * x));
    }
    let pp = (p * p - pv * pv).sqrt();
    let amp = (p / pp).sqrt();
    let rl = (pp - p) / (p + pp);
    (Complex64::from_polar(amp * rl, pp * x), Complex64::from_polar(amp, -pp * x))
}

/// Left-incident stripped wave (unit incoming flux) and its momentum
/// derivative; `p` is the momentum on the left side.
pub(crate) fn step_left_wave_slope(x: f64, p: f64, pv: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    if x < 0.0 {
        let (c, dc) = step_left_transmission_slope(p, pv);
        let e = Complex64::from_polar(1.0, -p * x);
        return (c * e, (dc - i * x * c) * e);
    }
    let pp = (p * p - pv * pv).sqrt();
    let dpp = p / pp;
    let den = p + pp;
    let rl = (pp - p) / den;
    let drl = ((dpp - 1.0) * den - (pp - p) * (1.0 + dpp)) / (den * den);
    let amp = (p / pp).sqrt();
    let damp = 0.5 / amp * (pp - p * dpp) / (pp * pp);
    let e = Complex64::from_polar(1.0, -pp * x);
    let ec = e.conj();
    let w = e + rl * ec;
    let dw = -i * x * dpp * e + (drl + rl * i * x * dpp) * ec;
    (amp * w, damp * w + amp * dw)
}
