use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cislunar");

fn shipped() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/paper.cfg")
}

fn shipped_text() -> String {
    std::fs::read_to_string(shipped()).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Writes a variant of the shipped scenario with `edit` applied to its text.
fn variant(dir: &Path, name: &str, edit: impl Fn(String) -> String) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, edit(shipped_text())).unwrap();
    path
}

fn with_duration(text: String, duration: &str) -> String {
    text.replace("duration = \"27.3 d\"", &format!("duration = {duration}"))
}

#[test]
fn full_timeseries_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ts.csv");
    let res = run(&[
        "timeseries",
        "--scenario",
        shipped().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 39_313 + 1);
    assert!(csv.starts_with("t_s,geo_id,llo_id,visible_count,d_er_km,d_rm_km,phi_opt_deg,"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn zero_duration_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    variant(dir.path(), "zero.cfg", |t| with_duration(t, "0"));
    let res = run_in(
        dir.path(),
        &["timeseries", "--scenario", "zero.cfg", "--out", "z.csv"],
    );
    assert_eq!(code(&res), 0);
    let csv = std::fs::read_to_string(dir.path().join("z.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn default_output_comes_from_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    variant(dir.path(), "day.cfg", |t| with_duration(t, "\"1 h\""));
    let res = run_in(dir.path(), &["timeseries", "--scenario", "day.cfg"]);
    assert_eq!(code(&res), 0);
    assert!(res.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 61);
}

#[test]
fn stdout_when_no_output_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "s.cfg", |t| {
        with_duration(t, "600").replace("output = \"timeseries.csv\"\n", "")
    });
    let res = run(&["timeseries", "--scenario", cfg.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 12);
}

fn single_llo(text: String) -> String {
    // Keep only the first [[llo]] table.
    let mut out = String::new();
    let mut llo_seen = 0;
    let mut skipping = false;
    for line in text.lines() {
        if line.starts_with('[') {
            if line.trim() == "[[llo]]" {
                llo_seen += 1;
                skipping = llo_seen > 1;
            } else {
                skipping = false;
            }
        }
        if !skipping {
            out.push_str(line);
            out.push('\n');
        }
    }
    assert_eq!(llo_seen, 4);
    out
}

#[test]
fn single_llo_has_outage_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "one.cfg", |t| {
        with_duration(single_llo(t), "\"1 d\"")
    });
    let out = dir.path().join("one.csv");
    let res = run(&[
        "timeseries",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let outages: Vec<&str> = csv.lines().filter(|l| l.ends_with(",true")).collect();
    assert!(!outages.is_empty());
    assert!(outages.iter().all(|l| l.contains(",,,0,,,,,,,false,true")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped();
    let cfg = cfg.to_str().unwrap();
    for (name, args) in [
        ("ts", vec!["timeseries"]),
        (
            "m",
            vec![
                "snr-elements",
                "--area-mode",
                "fixed-element",
                "--at",
                "86400",
            ],
        ),
        ("d", vec!["misalign", "--delta-grid", "-180:180:0.5"]),
    ] {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let path = dir.path().join(format!("{name}{k}.csv"));
            let mut full = args.clone();
            full.extend(["--scenario", cfg, "--out", path.to_str().unwrap()]);
            assert_eq!(code(&run(&full)), 0);
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}");
    }
}

#[test]
fn snr_elements_fixed_element_gaps() {
    let res = run(&[
        "snr-elements",
        "--scenario",
        shipped().to_str().unwrap(),
        "--area-mode",
        "fixed-element",
        "--m-list",
        "100,1,10",
        "--out",
        "/dev/stdout",
    ]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    let snr: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("0,"))
        .map(|l| l.split(',').nth(10).unwrap().parse().unwrap())
        .collect();
    assert_eq!(snr.len(), 3);
    assert!((snr[1] - snr[0] - 10.0).abs() < 1e-6);
    assert!((snr[2] - snr[0] - 20.0).abs() < 1e-6);
}

#[test]
fn usage_errors_exit_one() {
    let cfg = shipped();
    let cfg = cfg.to_str().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["timeseries"],
        vec!["snr-elements", "--scenario", cfg, "--m-list", "0,10"],
        vec!["snr-elements", "--scenario", cfg, "--area-mode", "sideways"],
        vec!["misalign", "--scenario", cfg, "--delta-grid", "-200:0:1"],
        vec!["misalign", "--scenario", cfg, "--at", "-5"],
    ] {
        let res = run(&args);
        assert_eq!(code(&res), 1, "{args:?}");
        assert!(!res.stderr.is_empty());
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_e = variant(dir.path(), "e.cfg", |t| {
        t.replacen("eccentricity = 0.0", "eccentricity = 1.5", 1)
    });
    let res = run(&["validate", "--scenario", bad_e.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("eccentricity") && msg.contains("1.5"), "{msg}");

    let typo = variant(dir.path(), "t.cfg", |t| {
        t.replacen("inclination", "incliation", 1)
    });
    let res = run(&["timeseries", "--scenario", typo.to_str().unwrap()]);
    assert_eq!(code(&res), 2);
    assert!(String::from_utf8_lossy(&res.stderr).contains("incliation"));
}

#[test]
fn io_errors_exit_three_and_leave_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "validate",
        "--scenario",
        dir.path().join("absent.cfg").to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 3);

    let out = dir.path().join("missing_dir/ts.csv");
    let res = run(&[
        "misalign",
        "--scenario",
        shipped().to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 3);
    assert!(!out.exists());
}

/// First outage time of the single-LLO variant over one day.
fn first_outage(cfg: &Path) -> String {
    let res = run(&[
        "timeseries",
        "--scenario",
        cfg.to_str().unwrap(),
        "--out",
        "/dev/stdout",
    ]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    let row = text
        .lines()
        .find(|l| l.ends_with(",true"))
        .expect("an outage row");
    row.split(',').next().unwrap().to_string()
}

#[test]
fn failed_run_keeps_previous_output_and_leaves_no_temp_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "one.cfg", |t| {
        with_duration(single_llo(t), "\"1 d\"")
    });
    let t = first_outage(&cfg);
    let out = dir.path().join("sweep.csv");
    std::fs::write(&out, "previous\n").unwrap();
    let res = run(&[
        "misalign",
        "--scenario",
        cfg.to_str().unwrap(),
        "--at",
        &t,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 3, "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no visible link"));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "previous\n");
    let names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn dump_round_trips_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&[
        "validate",
        "--scenario",
        shipped().to_str().unwrap(),
        "--dump",
    ]);
    assert_eq!(code(&res), 0);
    let dumped = dir.path().join("dumped.cfg");
    std::fs::write(&dumped, &res.stdout).unwrap();
    let again = run(&["validate", "--scenario", dumped.to_str().unwrap(), "--dump"]);
    assert_eq!(code(&again), 0);
    assert_eq!(res.stdout, again.stdout);

    let a = run(&[
        "misalign",
        "--scenario",
        shipped().to_str().unwrap(),
        "--out",
        "/dev/stdout",
    ]);
    let b = run(&[
        "misalign",
        "--scenario",
        dumped.to_str().unwrap(),
        "--out",
        "/dev/stdout",
    ]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
