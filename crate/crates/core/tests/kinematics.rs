use proptest::prelude::*;
use std::f64::consts::PI;
use toa_core::kinematics::PacketQuality;
use toa_core::quadrature::integrate_adaptive_scalar;
use toa_core::{Complex64, GaussianPacket};

fn packet() -> impl Strategy<Value = GaussianPacket> {
    (-100.0..100.0f64, 0.2..20.0f64, 0.1..20.0f64, 0.1..10.0f64).prop_map(|(q0, p0, d, m)| GaussianPacket::new(q0, p0, d, m).unwrap())
}

// (1/sqrt(2π)) ∫ ψ̃(p) e^{ipq} dp by adaptive quadrature
fn inverse_transform(pk: &GaussianPacket, q: f64) -> Complex64 {
    let s = 12.0 * pk.sigma_p();
    let (a, b) = (pk.p0 - s, pk.p0 + s);
    let f = |p: f64| pk.momentum_amplitude(p) * Complex64::from_polar(1.0, p * q);
    let re = integrate_adaptive_scalar(a, b, |p| f(p).re, 1e-13, 1e-16).unwrap();
    let im = integrate_adaptive_scalar(a, b, |p| f(p).im, 1e-13, 1e-16).unwrap();
    Complex64::new(re, im) / (2.0 * PI).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_pair(pk in packet(), u in -2.0..2.0f64) {
        let q = pk.q0 + u * pk.delta;
        let num = inverse_transform(&pk, q);
        let exact = pk.position_amplitude(q);
        let scale = pk.position_amplitude(pk.q0).norm();
        prop_assert!((num - exact).norm() <= 1e-10 * scale, "{num} vs {exact}");
    }

    #[test]
    fn translation_covariance(pk in packet(), shift in -50.0..50.0f64, u in -6.0..6.0f64) {
        let p = pk.p0 + u * pk.sigma_p();
        let moved = pk.translated(shift).momentum_amplitude(p);
        let expected = pk.momentum_amplitude(p) * Complex64::from_polar(1.0, -p * shift);
        prop_assert!((moved - expected).norm() <= 1e-12 * pk.momentum_amplitude(p).norm().max(1e-300) + 1e-14);
    }

    #[test]
    fn momentum_density_is_normalized(pk in packet()) {
        let s = 12.0 * pk.sigma_p();
        let total = integrate_adaptive_scalar(pk.p0 - s, pk.p0 + s, |p| pk.momentum_density(p), 1e-13, 0.0).unwrap();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_is_positive_and_covers_peak(pk in packet()) {
        let (lo, hi) = pk.momentum_window();
        prop_assert!(lo > 0.0 && lo < pk.p0 && hi > pk.p0);
    }
}

#[test]
fn quality_flag() {
    assert_eq!(GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap().quality(), PacketQuality::Good);
    assert_eq!(GaussianPacket::new(-2.0, 10.0, 1.0, 1.0).unwrap().quality(), PacketQuality::Marginal);
    assert_eq!(GaussianPacket::new(-29.0, 2.0, 10.0, 1.0).unwrap().quality(), PacketQuality::Marginal);
    assert!(GaussianPacket::new(0.0, 0.0, 1.0, 1.0).is_err());
}
