use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cpforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpforce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Values of one column, skipping metadata.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

fn numbers(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn meta(csv: &str, key: &str) -> Option<String> {
    let prefix = format!("# {key} = ");
    csv.lines().find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn stationary_csv_layout() {
    let out = cpforce(&["stationary", "--r-grid", "0.01:100:5:log"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    assert_eq!(meta(&csv, "version").as_deref(), Some(env!("CARGO_PKG_VERSION")));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "r,u_stationary,f_electrostatic,f_retardation,f_total,abs_error,regime");
    assert_eq!(column(&csv, "regime"), ["near", "intermediate", "intermediate", "intermediate", "far"]);
    let r = numbers(&csv, "r");
    assert_eq!((r[0], r[4]), (0.01, 100.0));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = cpforce(&["transient", "--r", "2", "--tau-grid", "0:20:41", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let (a, b) = (fs::read(a).unwrap(), fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# stationary run\nr = 2\nalpha0 = 3\n");
    let out = cpforce(&["stationary", "--config", &cfg, "--r", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    assert_eq!(numbers(&csv, "r"), [5.0]);
    assert_eq!(meta(&csv, "alpha0").as_deref(), Some("3"));
}

#[test]
fn unknown_config_key_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "r = 1\n\nomga0 = 2\n");
    let out = cpforce(&["stationary", "--config", &cfg]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("bad.cfg:3") && err.contains("omga0"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["stationary", "--no-such-flag"][..],
        &["transient", "--r", "1", "--tau-grid", "0:10:0"],
        &["stationary"],
        &["stationary", "--r", "-1"],
        &["stationary", "--r", "1", "--units", "furlongs"],
        &["adiabatic", "--r", "1"],
        &["transient", "--preset", "fig3"],
    ] {
        let out = cpforce(args);
        assert_eq!(code(&out), 1, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&cpforce(&["--help"])), 0);
    let out = cpforce(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn non_convergence_exits_two() {
    let out = cpforce(&["transient", "--r", "1", "--tau-grid", "0:10:3", "--tol", "1e-15"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("no convergence"));
}

#[test]
fn release_from_infinity_doubles_the_force() {
    let out = cpforce(&["adiabatic", "--r-grid", "0.1:10:4:log", "--r0", "inf"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for ratio in numbers(&stdout(&out), "ratio_to_stationary") {
        assert!((ratio - 2.0).abs() < 1e-12, "{ratio}");
    }
}

#[test]
fn fig1_preset_peaks_at_round_trip_time() {
    let out = cpforce(&["transient", "--preset", "fig1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    let steady: f64 = meta(&csv, "f_steady").unwrap().parse().unwrap();
    let tau = numbers(&csv, "tau");
    let f = numbers(&csv, "f_z");
    assert_eq!(tau.len(), 201);
    let peak = (0..f.len()).max_by(|&a, &b| (f[a] - steady).abs().total_cmp(&(f[b] - steady).abs())).unwrap();
    assert_eq!(tau[peak], 6000.0);
}

#[test]
fn fig2_preset_spikes_at_light_cone() {
    let out = cpforce(&["transient", "--preset", "fig2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    let r = numbers(&csv, "r");
    let total = numbers(&csv, "coeff_total");
    let stationary = numbers(&csv, "coeff_stationary_total");
    assert_eq!(r.len(), 60);
    let peak = (0..r.len())
        .max_by(|&a, &b| (total[a] - stationary[a]).abs().total_cmp(&(total[b] - stationary[b]).abs()))
        .unwrap();
    assert_eq!(r[peak], 3000.0);
}

#[test]
fn curve_and_snapshot_need_separate_files() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let snap = dir.path().join("snap.csv");
    let base = ["transient", "--r", "3", "--tau-grid", "0:10:5", "--tau", "4", "--r-grid", "1:4:4:lin", "--out", curve.to_str().unwrap()];
    assert_eq!(code(&cpforce(&base)), 1);
    let mut args = base.to_vec();
    args.extend(["--snapshot-out", snap.to_str().unwrap()]);
    let out = cpforce(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(numbers(&fs::read_to_string(curve).unwrap(), "tau").len(), 5);
    assert_eq!(numbers(&fs::read_to_string(snap).unwrap(), "r").len(), 4);
}

#[test]
fn trajectory_report_lists_terms() {
    let dir = tempfile::tempdir().unwrap();
    let samples: String = (0..=4000)
        .map(|i| {
            let t = 10.0 * i as f64 / 4000.0;
            let w = std::f64::consts::PI / 10.0;
            format!("{t} {} {}\n", 1.5 + 0.5 * (w * t).cos(), -0.5 * w * (w * t).sin())
        })
        .collect();
    let traj = write(dir.path(), "path.txt", &samples);
    let out = cpforce(&["adiabatic", "--trajectory", &traj]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = stdout(&out);
    assert_eq!(column(&csv, "n").len(), 12);
    assert!(meta(&csv, "closed_form").is_some());
    assert!(meta(&csv, "bracket_contains_closed_form").is_some());
    let bounds = numbers(&csv, "remainder_bound");
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn verify_passes_and_reports_order() {
    let out = cpforce(&["verify"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("recursion orders"));
}

#[test]
fn corrupted_tolerance_fails_verification() {
    let out = cpforce(&["verify", "--tolerance-scale", "0"]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("FAIL"));
}
