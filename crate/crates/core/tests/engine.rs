use toa_core::engine::{
    arrival_distribution, arrival_probability, decompose_reflection, incident_reflected_times, mean_round_trip_time, mean_toa_moment, mean_toa_phase,
    GridPolicy, TimeGrid,
};
use toa_core::{GaussianPacket, PotentialSpec};

fn packet() -> GaussianPacket {
    GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap()
}

fn barrier(pv: f64, a: f64) -> PotentialSpec {
    PotentialSpec::square_barrier(pv * pv / 2.0, a).unwrap()
}

#[test]
fn free_completeness_at_every_x() {
    for x in [-20.0, 0.0, 13.0, 50.0, 200.0] {
        let p = arrival_probability(x, &packet(), &PotentialSpec::Free).unwrap();
        assert!((p - 1.0).abs() <= 1e-8, "x = {x}: P = {p}");
    }
}

#[test]
fn probability_is_x_independent_beyond_the_barrier() {
    for (pv, a) in [(1.0, 5.0), (2.0, 15.0), (2.2, 4.0), (2.4, 10.0)] {
        let spec = barrier(pv, a);
        let p0 = arrival_probability(a + 0.5, &packet(), &spec).unwrap();
        for x in [a + 7.0, 50.0, 120.0] {
            let p = arrival_probability(x, &packet(), &spec).unwrap();
            assert!((p - p0).abs() <= 1e-9 * p0.max(1e-300), "p_V = {pv}, a = {a}, x = {x}: {p} vs {p0}");
        }
    }
}

#[test]
fn decomposition_closes() {
    let pk = GaussianPacket::new(-150.0, 2.0, 10.0, 1.0).unwrap();
    for (pv, a, x) in [(2.2, 4.0, -100.0), (1.9, 6.0, -100.0), (1.5, 3.0, 20.0)] {
        let d = decompose_reflection(x, &pk, &barrier(pv, a)).unwrap();
        assert!((d.transmitted + d.reflected + d.interference - d.total).abs() <= 1e-9 * d.total);
    }
    let ramp = PotentialSpec::linear_ramp(100.0).unwrap();
    let d = decompose_reflection(-1.0, &GaussianPacket::new(-2.0, 10.0, 1.0, 1.0).unwrap(), &ramp).unwrap();
    assert!((d.transmitted + d.reflected + d.interference - d.total).abs() <= 1e-9 * d.total);
}

#[test]
fn distributions_are_normalized_and_routes_agree() {
    let pk = packet();
    let far = GaussianPacket::new(-150.0, 2.0, 10.0, 1.0).unwrap();
    let ramp_pk = GaussianPacket::new(-2.0, 10.0, 1.0, 1.0).unwrap();
    let cases = [
        (pk, PotentialSpec::Free, 50.0),
        (pk, barrier(1.0, 15.0), 50.0),
        (pk, barrier(2.0, 15.0), 50.0),
        (pk, barrier(2.3, 15.0), 50.0),
        (pk, PotentialSpec::step(1.0).unwrap(), 40.0),
        (far, barrier(2.2, 4.0), -100.0),
        (ramp_pk, PotentialSpec::linear_ramp(100.0).unwrap(), -1.0),
        (ramp_pk, PotentialSpec::linear_ramp(100.0).unwrap(), 0.3),
    ];
    for (pk, spec, x) in cases {
        let d = arrival_distribution(x, &pk, &spec, GridPolicy::Auto).unwrap();
        let n = d.normalization().unwrap();
        assert!((n - 1.0).abs() <= 1e-8, "{spec:?} x = {x}: norm {n}");
        let moment = mean_toa_moment(&d).unwrap();
        let phase = mean_toa_phase(x, &pk, &spec).unwrap();
        assert!((moment - phase).abs() <= 5e-3 * phase.abs(), "{spec:?} x = {x}: {moment} vs {phase}");
    }
}

#[test]
fn fixed_grid_reports_tail() {
    let grid = TimeGrid::new(30.0, 40.0, 400).unwrap();
    let d = arrival_distribution(50.0, &packet(), &PotentialSpec::Free, GridPolicy::Fixed(grid)).unwrap();
    assert!(d.tail_mass > 0.4);
    assert!(mean_toa_moment(&d).is_err());
}

#[test]
fn tiny_probability_leaves_density_undefined() {
    let d = arrival_distribution(50.0, &packet(), &barrier(3.5, 30.0), GridPolicy::Auto).unwrap();
    assert!(d.density.is_none() && d.mean.is_none());
    assert!(mean_toa_moment(&d).is_err());
}

#[test]
fn round_trip_on_the_ramp() {
    let pk = GaussianPacket::new(-2.0, 10.0, 1.0, 1.0).unwrap();
    let spec = PotentialSpec::linear_ramp(100.0).unwrap();
    for e in [30.0, 50.0, 80.0] {
        let (a, b) = incident_reflected_times(-2.0, e, &pk, &spec).unwrap();
        let turn = e / 100.0;
        for x in [-1.3, 0.0, 0.25 * turn, 0.6 * turn] {
            let (c, d) = incident_reflected_times(x, e, &pk, &spec).unwrap();
            assert!(((c + d) - (a + b)).abs() <= 1e-6 * (a + b).abs(), "E = {e}, x = {x}");
        }
    }
    let t = mean_round_trip_time(&pk, &spec).unwrap();
    assert!((t - 0.6).abs() <= 0.012, "{t}");
}
