//! Acceptance suite: one PASS/FAIL line per criterion.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;
use toa_core::analysis::{find_peaks, sweep_barrier_height, SweepResult, DEFAULT_PROMINENCE};
use toa_core::engine::{
    arrival_distribution, arrival_probability, decompose_reflection, hartman_time, incident_reflected_times, mean_round_trip_time, mean_toa_moment,
    mean_toa_phase, GridPolicy,
};
use toa_core::io::validate::{airy_residual, barrier_unitarity, classical_lie, scenario_checks, transfer_agreement};
use toa_core::io::{load_scenario, PotentialConfig, ScenarioConfig};
use toa_core::{GaussianPacket, PotentialSpec, Result};

type Outcome = Result<(bool, String)>;

fn packet() -> GaussianPacket {
    GaussianPacket::new(-30.0, 2.0, 10.0, 1.0).unwrap()
}

fn barrier(pv: f64, a: f64) -> Result<PotentialSpec> {
    PotentialSpec::square_barrier(pv * pv / 2.0, a)
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn free_baseline() -> Outcome {
    let d = arrival_distribution(50.0, &packet(), &PotentialSpec::Free, GridPolicy::Auto)?;
    let mean = mean_toa_moment(&d)?;
    let p = arrival_probability(50.0, &packet(), &PotentialSpec::Free)?;
    Ok((within(mean, 40.0, 5e-3) && (p - 1.0).abs() <= 1e-8, format!("mean {mean:.6}, P - 1 = {:.2e}", p - 1.0)))
}

fn hartman_value() -> Outcome {
    let th = hartman_time(40.0, 15.0, 2.0, 1.0)?;
    let mean = mean_toa_phase(50.0, &packet(), &barrier(2.6, 15.0)?)?;
    Ok((th == 32.5 && within(mean, 32.5, 0.05), format!("t_H = {th}, mean at p_V = 2.6: {mean:.4}")))
}

fn fig1_shape() -> Outcome {
    let s = sweep_barrier_height(&packet(), 15.0, 50.0, (0.1, 3.0), 59)?;
    let m: Vec<f64> = s.means().into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let v = s.values();
    let low = within(m[0], 40.0, 5e-3);
    let (peak, _) = s.max_mean().unwrap_or((0, f64::NAN));
    let start = v.iter().position(|&p| p >= 2.0).unwrap_or(v.len());
    let rise = start < peak && m[start..=peak].windows(2).all(|w| w[1] > w[0]) && m[start] > 40.0;
    // the fall from the maximum down to the Hartman plateau
    let mut land = peak;
    while land + 1 < m.len() && m[land + 1] < m[land] && !within(m[land], 32.5, 0.05) {
        land += 1;
    }
    let (p_star, landing) = (v[land], m[land]);
    let plateau = m[land..].iter().all(|&t| within(t, 32.5, 0.05));
    let drops = (0..m.len() - 1).filter(|&k| m[k + 1] < 0.8 * m[k]).count();
    let drop_ok = land > peak && plateau && drops >= 1 && m[..peak].iter().all(|&t| t >= 0.99 * 40.0) && (2.2..=2.7).contains(&p_star);
    Ok((
        low && rise && drop_ok,
        format!(
            "mean(0.1) = {:.3}, rise {:.1} -> {:.1} up to p_V = {:.2}, falls to {landing:.3} at p_V* = {p_star:.2} over {} steps",
            m[0],
            m[start],
            m[peak],
            v[peak],
            land - peak
        ),
    ))
}

fn sweep_from(name: &str) -> Result<SweepResult> {
    let cfg = scenario(name)?;
    let (PotentialConfig::SquareBarrier { width: Some(a), .. }, Some(sw)) = (&cfg.potential, cfg.sweep) else {
        panic!("{name} is not a height sweep");
    };
    sweep_barrier_height(&cfg.packet, *a, cfg.detectors[0], (sw.from, sw.to), sw.count)
}

fn jump_scaling() -> Outcome {
    let a10 = sweep_from("fig1_a10.scenario")?.max_mean().map_or(f64::NAN, |m| m.1);
    let a20 = sweep_from("fig1_a20.scenario")?.max_mean().map_or(f64::NAN, |m| m.1);
    Ok((within(a10, 95.0, 0.2) && within(a20, 450.0, 0.2), format!("pre-jump maxima {a10:.2} (a = 10), {a20:.2} (a = 20)")))
}

fn fig5_peaks() -> Outcome {
    let pk = GaussianPacket::new(-150.0, 2.0, 10.0, 1.0)?;
    let d = arrival_distribution(-100.0, &pk, &barrier(2.2, 4.0)?, GridPolicy::Auto)?;
    let r = find_peaks(&d, None, DEFAULT_PROMINENCE)?;
    let first = r.peaks.first().map_or(f64::NAN, |p| p.t);
    let a = r.len() == 2 && (first - 25.0).abs() <= 1.0;
    let d = arrival_distribution(-100.0, &pk, &barrier(1.9, 6.0)?, GridPolicy::Auto)?;
    let inside = find_peaks(&d, Some((100.0, 180.0)), DEFAULT_PROMINENCE)?.len();
    Ok((a && inside >= 2, format!("(2.2, 4): {} peaks, incidence at {first:.3}; (1.9, 6): {inside} peaks in [100, 180]", r.len())))
}

fn ramp_bimodality() -> Outcome {
    let pk = GaussianPacket::new(-2.0, 10.0, 1.0, 1.0)?;
    let spec = PotentialSpec::linear_ramp(100.0)?;
    let turn = pk.p0 * pk.p0 / (2.0 * pk.mass) / 100.0;
    let mut seps = Vec::new();
    let mut counts = Vec::new();
    for x in [pk.q0, 0.5 * pk.q0, turn] {
        let d = arrival_distribution(x, &pk, &spec, GridPolicy::Auto)?;
        let r = find_peaks(&d, None, DEFAULT_PROMINENCE)?;
        counts.push(r.len());
        seps.push(match (r.peaks.first(), r.peaks.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => f64::NAN,
        });
    }
    let dec = decompose_reflection(pk.q0, &pk, &spec)?;
    let balance = (dec.transmitted - dec.reflected).abs() / (0.5 * (dec.transmitted + dec.reflected));
    let ok = counts[0] == 2 && balance <= 0.02 && seps[0] > seps[1] && seps[1] > seps[2];
    Ok((ok, format!("peaks {counts:?}, separations {:.4} > {:.4} > {:.4}, mass imbalance {balance:.2e}", seps[0], seps[1], seps[2])))
}

fn round_trip() -> Outcome {
    let pk = GaussianPacket::new(-2.0, 10.0, 1.0, 1.0)?;
    let spec = PotentialSpec::linear_ramp(100.0)?;
    let (lo, hi) = pk.momentum_window();
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let p = lo + (hi - lo) * i as f64 / 20.0;
        let e = p * p / (2.0 * pk.mass);
        let (a, b) = incident_reflected_times(pk.q0, e, &pk, &spec)?;
        for j in 1..=20 {
            let x = pk.q0 * (1.0 - j as f64 / 20.0);
            let (c, d) = incident_reflected_times(x, e, &pk, &spec)?;
            worst = worst.max(((c + d) - (a + b)).abs() / (a + b).abs());
        }
    }
    let avg = mean_round_trip_time(&pk, &spec)?;
    Ok((worst <= 1e-6 && within(avg, 0.6, 0.02), format!("max relative spread {worst:.2e}, packet average {avg:.6}")))
}

fn scenario(name: &str) -> Result<ScenarioConfig> {
    load_scenario(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name))
}

fn property_suites() -> Outcome {
    let mut checks = vec![barrier_unitarity(1000, 11), transfer_agreement(1000, 12), classical_lie(1000, 13), airy_residual(1000, 14)];
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut names: Vec<String> = std::fs::read_dir(dir)?.filter_map(|e| e.ok()?.file_name().into_string().ok()).filter(|n| n.ends_with(".scenario")).collect();
    names.sort();
    for name in &names {
        let mut cfg = scenario(name)?;
        checks.extend(scenario_checks(&cfg));
        // sweep scenarios: also the far end of the range
        if let (PotentialConfig::SquareBarrier { height, width }, Some(sw)) = (cfg.potential.clone(), cfg.sweep) {
            cfg.potential = match (height, width) {
                (None, w) => PotentialConfig::SquareBarrier { height: Some(sw.to * sw.to / (2.0 * cfg.packet.mass)), width: w },
                (h, _) => PotentialConfig::SquareBarrier { height: h, width: Some(sw.to) },
            };
            checks.extend(scenario_checks(&cfg));
        }
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.to_string()).collect();
    let detail = if failed.is_empty() { format!("{} checks over {} scenarios", checks.len(), names.len()) } else { failed.join("; ") };
    Ok((failed.is_empty(), detail))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("free baseline", free_baseline),
        ("Hartman value", hartman_value),
        ("barrier-height sweep shape", fig1_shape),
        ("pre-jump maxima", jump_scaling),
        ("reflection peaks", fig5_peaks),
        ("ramp bimodality", ramp_bimodality),
        ("total-reflection round trip", round_trip),
        ("property suites", property_suites),
    ];
    let mut all = true;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= ok;
        println!("criterion {} {name}: {} ({detail}; {:.2?})", k + 1, if ok { "PASS" } else { "FAIL" }, start.elapsed());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
