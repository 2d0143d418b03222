use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sqz_sensor::io::CurveTable;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sqz-sensor"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn spectrum_all_curves_at_dc() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--normalize", "--out", "all.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t = CurveTable::read(&dir.path().join("all.csv")).unwrap();
    assert_eq!(t.omega.len(), 401);
    let expected = [
        ("no-squeeze", 0.216_071_428_571_428_58),
        ("input-squeeze", 0.118_196_428_571_428_58),
        ("double-squeeze", 0.065_463_917_525_773_2),
    ];
    for (name, v) in expected {
        let got = t.column(name).unwrap()[0];
        assert!((got / v - 1.0).abs() < 1e-12, "{name}: {got}");
    }
    assert_eq!(t.column("snl").unwrap()[0], 0.0);
    assert!(dir.path().join("all.csv.manifest.json").exists());
}

#[test]
fn spectrum_single_point() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"kappa_prime": 1, "kappa_double_prime": 0, "eta": 1, "n_photons": 1, "r_squeeze": 0}"#,
    )
    .unwrap();
    let args = [
        "spectrum", "--params", "p.json", "--scenario", "no-squeeze", "--omega-min", "1", "--omega-max", "1",
        "--omega-points", "1", "--out", "one.csv",
    ];
    let out = run(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, ["omega,S", "1,0.25"]);
}

#[test]
fn json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    for (file, format) in [("a.csv", "csv"), ("a.json", "json")] {
        let out = run(&["spectrum", "--scenario", "input-squeeze,snl", "--out", file, "--format", format], dir.path());
        assert!(out.status.success());
    }
    let csv = CurveTable::read(&dir.path().join("a.csv")).unwrap();
    let json = CurveTable::read(&dir.path().join("a.json")).unwrap();
    assert_eq!(csv, json);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--scenario", "bogus", "--out", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("x.csv").exists());

    fs::write(dir.path().join("bad.json"), r#"{"kappa_prime": 1, "kappa_double_prime": 0, "eta": 1.5, "n_photons": 1}"#)
        .unwrap();
    let out = run(&["spectrum", "--params", "bad.json", "--out", "x.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["optimize", "--target", "kc"])
        .env("SQZ_SENSOR_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fig2_files_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fig2", "--out", "fig"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fig = dir.path().join("fig");
    let read = |name: &str| CurveTable::read(&fig.join(format!("{name}.csv"))).unwrap();
    let snl = read("snl");
    for (w, s) in snl.omega.iter().zip(snl.column("S").unwrap()) {
        assert_eq!(*s, w / 4.0);
    }
    let at_one = |name: &str| {
        let t = read(name);
        let i = t.omega.iter().position(|w| *w == 1.0).unwrap();
        t.column("S").unwrap()[i]
    };
    for (name, v) in [
        ("no-squeeze", 0.3946428571428571),
        ("input-squeeze", 0.17593452380952381),
        ("double-squeeze", 0.12320201276386843),
    ] {
        assert!((at_one(name) / v - 1.0).abs() < 1e-12, "{name}");
    }

    let verify = run(&["verify", "fig/manifest.json"], dir.path());
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stderr));

    let path = fig.join("input-squeeze.csv");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replace("\n0,", "\n0.0000000001,")).unwrap();
    let verify = run(&["verify", "fig/manifest.json"], dir.path());
    assert_eq!(verify.status.code(), Some(1));
}

#[test]
fn optimize_targets() {
    let dir = tempfile::tempdir().unwrap();
    let kc = stdout_json(&run(&["optimize", "--target", "kc"], dir.path()));
    let closed = kc["closed_form"]["argmin"].as_f64().unwrap();
    assert!((closed + 0.955_670_103_092_783_6).abs() < 1e-15);
    assert!(kc["delta"].as_f64().unwrap() < 1e-8);

    let snl = stdout_json(&run(&["optimize", "--target", "snl-kappa", "--omega", "1"], dir.path()));
    assert!((snl["numeric"]["argmin"].as_f64().unwrap() - 1.0).abs() < 1e-8);

    let band = stdout_json(&run(&["optimize", "--target", "band"], dir.path()));
    assert!((band["band"]["lower"].as_f64().unwrap() - 0.279_956_742_574_944_85).abs() < 1e-8);
    assert!((band["band"]["upper"].as_f64().unwrap() - 4.049_940_164_641_55).abs() < 1e-8);

    let out = run(&["optimize", "--target", "band", "--scenario", "no-squeeze"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_json(&out)["band"].is_null());
}

#[test]
fn validate_passes_and_mutation_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate", "--out", "report.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 9);

    let out = run(&["validate", "--budget", "200", "--mutation", "drop-intrinsic-loss"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], false);
}

#[test]
fn validate_lossless_coherent_params() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("p.json"),
        r#"{"kappa_prime": 1, "kappa_double_prime": 0, "eta": 1, "n_photons": 1}"#,
    )
    .unwrap();
    let out = run(&["validate", "--params", "p.json", "--budget", "200"], dir.path());
    let report = stdout_json(&out);
    let checks = report["checks"].as_array().unwrap();
    let no_squeeze = checks.iter().find(|c| c["name"] == "oracle_a/no-squeeze").unwrap();
    assert!(no_squeeze["measured"].as_f64().unwrap() < 1e-12, "{no_squeeze}");
    let double = checks.iter().find(|c| c["name"] == "oracle_a/double-squeeze").unwrap();
    assert!(double["skipped"].is_string(), "{double}");
}

#[test]
fn simulation_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["simulate", "--budget", "64", "--seed", "3", "--omega-min", "0.2", "--omega-max", "3", "--omega-points", "15", "--out", out]
    };
    let a = bin().args(args("a.csv")).current_dir(dir.path()).env("SQZ_SENSOR_THREADS", "1").output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = bin().args(args("b.csv")).current_dir(dir.path()).env("SQZ_SENSOR_THREADS", "4").output().unwrap();
    assert!(b.status.success());
    let ta = CurveTable::read(&dir.path().join("a.csv")).unwrap();
    let tb = CurveTable::read(&dir.path().join("b.csv")).unwrap();
    assert_eq!(ta, tb);
    assert!(dir.path().join("a-raw.bin").exists());
    assert!(dir.path().join("a-raw.json").exists());

    let verify = run(&["verify", "a.csv.manifest.json"], dir.path());
    assert!(verify.status.success(), "{}", String::from_utf8_lossy(&verify.stderr));
}
