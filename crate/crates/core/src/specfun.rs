//! Airy function of the first kind and its derivative for real argument.
//!
//! For `|z| <= 8` the Maclaurin series is summed in double-double
//! arithmetic: at `z = 8` the terms exceed `Ai(8)` by about nineteen
//! orders of magnitude, which plain `f64` cannot absorb. Beyond that the
//! standard large-argument expansions are summed up to their smallest
//! term (DLMF 9.7.5-9.7.10).

use crate::error::{Result, ToaError};
use std::f64::consts::PI;

/// Largest supported `|z|`.
pub const MAX_ARGUMENT: f64 = 1e4;

/// Switch between the Maclaurin series and the asymptotic expansions.
pub const SERIES_SWITCH: f64 = 8.0;

/// `Ai(z)` and `Ai'(z)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
    pub argument: f64,
}

/// Evaluates `Ai` and `Ai'` at `z`, `|z| <= 1e4`.
///
/// For large positive `z` the values underflow to zero (from `z ≈ 105`,
/// where `Ai` leaves the normal floating-point range).
pub fn airy_pair(z: f64) -> Result<AiryPair> {
    if !z.is_finite() || z.abs() > MAX_ARGUMENT {
        return Err(ToaError::Range { value: z, range: "|z| <= 1e4" });
    }
    let (ai, ai_prime) = if z.abs() <= SERIES_SWITCH {
        maclaurin(z)
    } else if z > 0.0 {
        asymptotic_positive(z)
    } else {
        asymptotic_negative(-z)
    };
    // subnormal results carry too few digits to be useful
    if ai.abs() < f64::MIN_POSITIVE && z > 0.0 {
        return Ok(AiryPair { ai: 0.0, ai_prime: 0.0, argument: z });
    }
    Ok(AiryPair { ai, ai_prime, argument: z })
}

// Ai(0) and -Ai'(0) as double-double constants.
const C1: dd::Dd = dd::Dd { hi: 0.355_028_053_887_817_2, lo: 2.052_336_324_362_12e-17 };
const C2: dd::Dd = dd::Dd { hi: 0.258_819_403_792_806_8, lo: -2.522_243_111_610_832e-17 };

fn maclaurin(z: f64) -> (f64, f64) {
    use dd::Dd;
    let zd = Dd::from(z);
    let z2 = zd * zd;
    let z3 = z2 * zd;
    // f = Σ a_k z^{3k}, g = Σ b_k z^{3k+1}; Ai = c1 f - c2 g
    let mut uf = Dd::from(1.0); // a_k z^{3k}
    let mut ug = zd; // b_k z^{3k+1}
    let mut f = uf;
    let mut g = ug;
    let mut df = Dd::from(0.0);
    let mut dg = Dd::from(1.0);
    for k in 1..200 {
        let kf = k as f64;
        // derivative terms use the previous power
        let tdf = uf * z2 / (3.0 * kf - 1.0);
        let tdg = ug * z2 / (3.0 * kf);
        uf = uf * z3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        ug = ug * z3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f = f + uf;
        g = g + ug;
        df = df + tdf;
        dg = dg + tdg;
        let small = |t: Dd, s: Dd| t.hi.abs() <= 1e-34 * s.hi.abs().max(1e-300);
        if k > 2 && small(uf, f) && small(ug, g) && small(tdf, df) && small(tdg, dg) {
            break;
        }
    }
    let ai = C1 * f - C2 * g;
    let aip = C1 * df - C2 * dg;
    (ai.to_f64(), aip.to_f64())
}

// u_k and v_k coefficients of the asymptotic expansions.
fn uv_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

fn coefficients() -> &'static (Vec<f64>, Vec<f64>) {
    static C: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    C.get_or_init(|| uv_coefficients(60))
}

// Σ (±1)^k c_k / ζ^k truncated at the smallest term; `stride` and `offset`
// select even or odd terms with alternating sign.
fn asymptotic_sum(c: &[f64], zeta: f64, offset: usize, stride: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut j = offset;
    while j < c.len() {
        let term = c[j] / zeta.powi(j as i32);
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        last = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        if alternate {
            sign = -sign;
        }
        j += stride;
    }
    sum
}

fn asymptotic_positive(z: f64) -> (f64, f64) {
    let (u, v) = coefficients();
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let q = z.powf(0.25);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let su = alternating(u, zeta);
    let sv = alternating(v, zeta);
    (e / q * su, -e * q * sv)
}

fn alternating(c: &[f64], zeta: f64) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut zk = 1.0;
    for &ck in c {
        let term = ck / zk;
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        last = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        sign = -sign;
        zk *= zeta;
    }
    sum
}

// Ai(-s), Ai'(-s) for s > 0.
fn asymptotic_negative(s: f64) -> (f64, f64) {
    let (u, v) = coefficients();
    let zeta = 2.0 / 3.0 * s * s.sqrt();
    let q = s.powf(0.25);
    let theta = zeta - PI / 4.0;
    let (sn, cs) = theta.sin_cos();
    let ue = asymptotic_sum(u, zeta, 0, 2, true);
    let uo = asymptotic_sum(u, zeta, 1, 2, true);
    let ve = asymptotic_sum(v, zeta, 0, 2, true);
    let vo = asymptotic_sum(v, zeta, 1, 2, true);
    let rp = PI.sqrt();
    let ai = (cs * ue + sn * uo) / (rp * q);
    let aip = q / rp * (sn * ve - cs * vo);
    (ai, aip)
}

/// Minimal double-double arithmetic (about 32 significant digits).
mod dd {
    use std::ops::{Add, Div, Mul, Sub};

    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    impl From<f64> for Dd {
        fn from(x: f64) -> Self {
            Dd { hi: x, lo: 0.0 }
        }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    impl Dd {
        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }

    impl Add for Dd {
        type Output = Dd;
        fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.hi, o.hi);
            let (t, f) = two_sum(self.lo, o.lo);
            let (s, e) = quick_two_sum(s, e + t);
            let (hi, lo) = quick_two_sum(s, e + f);
            Dd { hi, lo }
        }
    }

    impl Sub for Dd {
        type Output = Dd;
        fn sub(self, o: Dd) -> Dd {
            self + Dd { hi: -o.hi, lo: -o.lo }
        }
    }

    impl Mul for Dd {
        type Output = Dd;
        fn mul(self, o: Dd) -> Dd {
            let (p, e) = two_prod(self.hi, o.hi);
            let e = e + (self.hi * o.lo + self.lo * o.hi);
            let (hi, lo) = quick_two_sum(p, e);
            Dd { hi, lo }
        }
    }

    impl Div<f64> for Dd {
        type Output = Dd;
        fn div(self, d: f64) -> Dd {
            let q1 = self.hi / d;
            let (p, e) = two_prod(q1, d);
            let (s, f) = two_sum(self.hi, -p);
            let f = f - e + self.lo;
            let q2 = (s + f) / d;
            let (hi, lo) = quick_two_sum(q1, q2);
            Dd { hi, lo }
        }
    }
}
