use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn toa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toa")).args(args).output().unwrap()
}

fn run_in(dir: &Path, cmd: &str, file: &str, extra: &[&str]) -> Output {
    let sc = scenario(file);
    let mut args = vec![cmd, "--scenario", sc.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    toa(&args)
}

#[test]
fn bad_scenario_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scenario");
    fs::write(&path, "[packet]\nq0 = -30\nbogus = 1\n").unwrap();
    let out = toa(&["distribution", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("[potential]"), "{err}");
}

#[test]
fn bad_arguments_exit_with_two() {
    assert_eq!(toa(&["distribution"]).status.code(), Some(2));
    let sc = scenario("free.scenario");
    assert_eq!(toa(&["teleport", "--scenario", sc.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(toa(&["distribution", "--scenario", sc.to_str().unwrap(), "--grid", "1,2"]).status.code(), Some(2));
    assert_eq!(toa(&["distribution", "--scenario", sc.to_str().unwrap(), "--tol", "3"]).status.code(), Some(2));
}

#[test]
fn free_distribution_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "distribution", "free.scenario", &["--svg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("free_x0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,density,density_tr,density_ref,density_int"));
    assert!(lines.count() > 100);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    let summary = fs::read_to_string(dir.path().join("free_x0_summary.txt")).unwrap();
    assert!(summary.contains("x = 5.0000000000000000e1"), "{summary}");
    assert!(summary.contains("peaks = 1"), "{summary}");
    assert!(dir.path().join("free_x0.svg").exists());
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run_in(d.path(), "distribution", "fig3.scenario", &[]).status.success());
        assert!(run_in(d.path(), "sweep", "fig1.scenario", &[]).status.success());
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn fig1_sweep_csv_shows_the_drop() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), "sweep", "fig1.scenario", &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("fig1_sweep.csv")).unwrap();
    let mut rdr = csv.lines();
    let header: Vec<&str> = rdr.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (v, m) = (col("p_v"), col("mean"));
    let rows: Vec<(f64, f64)> = rdr
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[v].parse().unwrap(), f[m].parse().unwrap())
        })
        .collect();
    assert!((rows[0].1 - 40.0).abs() < 0.2);
    let last = rows.last().unwrap().1;
    assert!((last - 32.5).abs() <= 0.05 * 32.5);
}

#[test]
fn fig5d_distribution_reports_reflection_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "distribution", "fig5d.scenario", &[]);
    assert!(out.status.success());
    let summary = fs::read_to_string(dir.path().join("fig5d_x0_summary.txt")).unwrap();
    let inside = summary
        .lines()
        .filter(|l| l.starts_with("peak_"))
        .filter_map(|l| l.split_once(" = ")?.1.split(',').next()?.trim().parse::<f64>().ok())
        .filter(|t| (100.0..=180.0).contains(t))
        .count();
    assert!(inside >= 2, "{summary}");
}

#[test]
fn validate_passes_on_bundled_scenarios() {
    for name in ["free.scenario", "fig3.scenario", "wkb_bump.scenario"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_in(dir.path(), "validate", name, &[]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        let report = fs::read_to_string(fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path()).unwrap();
        assert!(!report.contains("FAIL"), "{report}");
    }
}

#[test]
fn classical_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_in(dir.path(), "classical", "fig3.scenario", &[]).status.success());
    let csv = fs::read_to_string(dir.path().join("fig3_classical.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}
