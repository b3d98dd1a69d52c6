use super::{check_momentum, reduced_momentum, Channel, ScatteringSolution};
use crate::error::{Result, ToaError};
use num_complex::Complex64;

/// `cos(k L)` and `sin(k L)/k` as functions of `w = k²`, with derivatives
/// in `w`. Above the barrier momentum `w < 0` and all four values are
/// multiplied by `exp(log_scale)` to keep `cosh` from overflowing.
#[derive(Debug, Clone, Copy)]
struct Trig {
    c: f64,
    s: f64,
    dc: f64,
    ds: f64,
    log_scale: f64,
}

fn trig(w: f64, len: f64) -> Trig {
    let u = w * len * len;
    if u.abs() < 1e-2 {
        // cos and sin(x)/x series in u = (kL)²
        let (mut c, mut s, mut dc, mut ds) = (0.0, 0.0, 0.0, 0.0);
        let mut fc = 1.0; // 1/(2k)!
        let mut fs = 1.0; // 1/(2k+1)!
        let mut pow = 1.0; // (-u)^k
        let mut prev = 0.0; // (-u)^(k-1)
        for k in 0..10 {
            c += fc * pow;
            s += fs * pow;
            // d/du (-u)^k = -k (-u)^(k-1)
            let d = -(k as f64) * prev;
            dc += fc * d;
            ds += fs * d;
            let k2 = 2.0 * k as f64;
            fc /= (k2 + 1.0) * (k2 + 2.0);
            fs /= (k2 + 2.0) * (k2 + 3.0);
            prev = pow;
            pow *= -u;
        }
        let l2 = len * len;
        return Trig { c, s: len * s, dc: l2 * dc, ds: len * l2 * ds, log_scale: 0.0 };
    }
    let (c, s, log_scale) = if w > 0.0 {
        let k = w.sqrt();
        ((k * len).cos(), (k * len).sin() / k, 0.0)
    } else {
        let kappa = (-w).sqrt();
        let e = (-2.0 * kappa * len).exp();
        ((1.0 + e) / 2.0, -(-2.0 * kappa * len).exp_m1() / (2.0 * kappa), -kappa * len)
    };
    Trig { c, s, dc: -len * s / 2.0, ds: (len * c - s) / (2.0 * w), log_scale }
}

/// Scaled barrier denominator `D = 2ipC + (p²+p'²)S` and `dD/dp`,
/// both multiplied by the scale of `t`.
fn denominator(p: f64, w: f64, t: &Trig) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let d = 2.0 * i * p * t.c + (p * p + w) * t.s;
    let dd = 2.0 * i * t.c + 4.0 * i * p * p * t.dc + 4.0 * p * t.s + 2.0 * p * (p * p + w) * t.ds;
    (d, dd)
}

fn check_barrier(height: f64, width: f64) -> Result<()> {
    if !(height.is_finite() && height >= 0.0) {
        return Err(ToaError::InvalidParameter(format!("barrier height must be nonnegative, got {height}")));
    }
    if !(width.is_finite() && width >= 0.0) {
        return Err(ToaError::InvalidParameter(format!("barrier width must be nonnegative, got {width}")));
    }
    Ok(())
}

/// Transmission amplitude of a square barrier from the closed form
/// `T = 2pp' exp(-ipa) / (2pp' cos p'a - i(p²+p'²) sin p'a)`,
/// evaluated as `2p exp(-ipa) / (2p C - i(p²+p'²) S)` with `S = sin(p'a)/p'`.
pub fn barrier_transmission(p: f64, height: f64, width: f64, mass: f64) -> Result<Complex64> {
    check_momentum(p)?;
    check_barrier(height, width)?;
    let w = p * p - 2.0 * mass * height;
    let t = trig(w, width);
    let den = Complex64::new(2.0 * p * t.c, -(p * p + w) * t.s);
    Ok(Complex64::from_polar(2.0 * p * t.log_scale.exp(), -p * width) / den)
}

/// Transmission amplitude from interface matching: the transmitted wave
/// `exp(ipx)` at `x = a` is carried back through the barrier and split
/// into incident and reflected waves at the origin.
pub fn barrier_transfer_transmission(p: f64, height: f64, width: f64, mass: f64) -> Result<Complex64> {
    Ok(matched(p, height, width, mass)?.0)
}

fn matched(p: f64, height: f64, width: f64, mass: f64) -> Result<(Complex64, Complex64)> {
    check_momentum(p)?;
    check_barrier(height, width)?;
    let i = Complex64::i();
    let w = p * p - 2.0 * mass * height;
    let t = trig(w, width);
    // (ψ, ψ') at the origin for ψ(a) = 1, ψ'(a) = ip, in units of the scale
    let psi0 = t.c - i * p * t.s;
    let dpsi0 = w * t.s + i * p * t.c;
    let inc = (psi0 + dpsi0 / (i * p)) / 2.0;
    let refl = (psi0 - dpsi0 / (i * p)) / 2.0;
    let tau = t.log_scale.exp() / inc;
    Ok((tau * Complex64::from_polar(1.0, -p * width), refl / inc))
}

/// Stationary right-mover state of a square barrier of height `V` on `[0, a]`.
pub fn barrier_solution(p: f64, height: f64, width: f64, mass: f64) -> Result<ScatteringSolution> {
    let (t, r) = matched(p, height, width, mass)?;
    let i = Complex64::i();
    Ok(ScatteringSolution {
        p,
        energy: p * p / (2.0 * mass),
        p_prime: reduced_momentum(p, (2.0 * mass * height).sqrt()),
        transmission: t,
        reflection: r,
        interior: vec![1.0 + r, i * p * (1.0 - r)],
        channel: Channel::RightMover,
    })
}

/// Wave inside the barrier and its `x` derivative, propagated back from
/// the transmitted side so that deep tunneling does not cancel.
pub(crate) fn interior_wave(x: f64, p: f64, pv: f64, width: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let w = p * p - pv * pv;
    let ta = trig(w, width);
    let td = trig(w, width - x);
    let (den, _) = denominator(p, w, &ta);
    let amp = 2.0 * i * p * (ta.log_scale - td.log_scale).exp() / den;
    (amp * (td.c - i * p * td.s), amp * (w * td.s + i * p * td.c))
}

/// `(T, dT/dp)` and `(R, dR/dp)` of the barrier.
pub(crate) fn barrier_coefficient_slopes(p: f64, pv: f64, width: f64) -> [(Complex64, Complex64); 2] {
    let i = Complex64::i();
    let w = p * p - pv * pv;
    let ta = trig(w, width);
    let (den, dden) = denominator(p, w, &ta);
    let t = Complex64::from_polar(1.0, -p * width) * 2.0 * i * p * ta.log_scale.exp() / den;
    let dt = t * (1.0 / p - dden / den - i * width);
    let r = pv * pv * ta.s / den;
    let dr = pv * pv * (2.0 * p * ta.ds * den - ta.s * dden) / (den * den);
    [(t, dt), (r, dr)]
}

/// Stripped right-mover wave of the barrier and its momentum derivative.
pub(crate) fn barrier_wave_slope(x: f64, p: f64, pv: f64, width: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let w = p * p - pv * pv;
    let ta = trig(w, width);
    let (den, dden) = denominator(p, w, &ta);
    // d ln(T exp(ipa)) / dp
    let dlog_tau = 1.0 / p - dden / den;
    if x < 0.0 {
        let r = pv * pv * ta.s / den;
        let dr = pv * pv * (2.0 * p * ta.ds * den - ta.s * dden) / (den * den);
        let e = Complex64::from_polar(1.0, p * x);
        let ec = e.conj();
        (e + r * ec, i * x * e + (dr - i * x * r) * ec)
    } else if x >= width {
        let tau = 2.0 * i * p * ta.log_scale.exp() / den;
        let v = tau * Complex64::from_polar(1.0, p * (x - width));
        (v, v * (dlog_tau + i * (x - width)))
    } else {
        let td = trig(w, width - x);
        let amp = 2.0 * i * p * (ta.log_scale - td.log_scale).exp() / den;
        let xs = td.c - i * p * td.s;
        let dxs = 2.0 * p * td.dc - i * td.s - 2.0 * i * p * p * td.ds;
        let v = amp * xs;
        (v, amp * (xs * dlog_tau + dxs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trig_series_agrees_with_direct_form() {
        for w in [0.011f64, -0.011, 0.02, -0.02] {
            let a = trig(w, 1.0);
            let k = Complex64::new(w, 0.0).sqrt();
            let c = (k).cos().re;
            let s = ((k).sin() / k).re;
            let sc = a.log_scale.exp();
            assert_relative_eq!(a.c / sc, c, max_relative = 1e-14);
            assert_relative_eq!(a.s / sc, s, max_relative = 1e-14);
        }
        let lo = trig(0.009_999, 1.0);
        let hi = trig(0.010_001, 1.0);
        assert_relative_eq!(lo.dc, hi.dc, max_relative = 1e-4);
        assert_relative_eq!(lo.ds, hi.ds, max_relative = 1e-4);
    }

    #[test]
    fn trig_zero_argument() {
        let t = trig(0.0, 3.0);
        assert_eq!(t.c, 1.0);
        assert_eq!(t.s, 3.0);
        assert_relative_eq!(t.dc, -4.5, epsilon = 1e-15);
        assert_relative_eq!(t.ds, -4.5, epsilon = 1e-15);
    }

    #[test]
    fn transparent_limits() {
        let t = barrier_transmission(1.7, 0.0, 5.0, 1.0).unwrap();
        assert_relative_eq!((t - 1.0).norm(), 0.0, epsilon = 1e-14);
        let t = barrier_transmission(1.7, 3.0, 0.0, 1.0).unwrap();
        assert_relative_eq!((t - 1.0).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn threshold_limit() {
        let t = barrier_transmission(2.0, 2.0, 15.0, 1.0).unwrap();
        assert_relative_eq!(t.norm_sqr(), 1.0 / 226.0, max_relative = 1e-13);
    }

    #[test]
    fn deep_tunneling_does_not_overflow() {
        let s = barrier_solution(1.0, 50.0, 200.0, 1.0).unwrap();
        assert!(s.transmission.norm() < 1e-300 || s.transmission.norm().is_finite());
        assert_relative_eq!(s.reflection.norm(), 1.0, epsilon = 1e-12);
        let (v, d) = interior_wave(100.0, 1.0, 10.0, 200.0);
        assert!(v.norm().is_finite() && d.norm().is_finite());
    }

    #[test]
    fn closed_form_equals_matching() {
        for (p, v, a) in [(0.5, 2.0, 3.0), (2.1, 2.0, 10.0), (2.0, 2.0, 15.0), (3.0, 1.0, 0.2)] {
            let t1 = barrier_transmission(p, v, a, 1.0).unwrap();
            let t2 = barrier_transfer_transmission(p, v, a, 1.0).unwrap();
            assert!((t1 - t2).norm() <= 1e-12 * (1.0 + t1.norm()));
        }
    }

    #[test]
    fn momentum_slope_matches_finite_difference() {
        let (pv, a) = (2.0, 4.0);
        for p in [0.8, 1.9, 1.999, 2.0005, 2.4] {
            for x in [-3.0, 0.0, 1.3, 3.9, 4.0, 7.5] {
                let h = 1e-6;
                let (_, d) = barrier_wave_slope(x, p, pv, a);
                let fd = (barrier_wave_slope(x, p + h, pv, a).0 - barrier_wave_slope(x, p - h, pv, a).0) / (2.0 * h);
                assert!((d - fd).norm() < 1e-6 * (1.0 + d.norm()), "x={x} p={p}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn coefficient_slopes_match_finite_difference() {
        let h = 1e-6;
        for p in [0.9, 2.0, 2.7] {
            let [(t, dt), (r, dr)] = barrier_coefficient_slopes(p, 2.2, 4.0);
            let s = barrier_solution(p, 2.42, 4.0, 1.0).unwrap();
            assert!((t - s.transmission).norm() < 1e-13);
            assert!((r - s.reflection).norm() < 1e-13);
            let [(tp, _), (rp, _)] = barrier_coefficient_slopes(p + h, 2.2, 4.0);
            let [(tm, _), (rm, _)] = barrier_coefficient_slopes(p - h, 2.2, 4.0);
            assert!((dt - (tp - tm) / (2.0 * h)).norm() < 1e-6);
            assert!((dr - (rp - rm) / (2.0 * h)).norm() < 1e-6);
        }
    }

    #[test]
    fn slope_wave_agrees_with_solution() {
        let s = barrier_solution(1.5, 2.0, 4.0, 1.0).unwrap();
        let (w, _) = barrier_wave_slope(-2.0, 1.5, 2.0, 4.0);
        let e = Complex64::from_polar(1.0, -3.0);
        assert!((w - (e + s.reflection * e.conj())).norm() < 1e-13);
        let (w, _) = barrier_wave_slope(6.0, 1.5, 2.0, 4.0);
        assert!((w - s.transmission * Complex64::from_polar(1.0, 9.0)).norm() < 1e-13);
    }
}
