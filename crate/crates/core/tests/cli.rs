use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ahp::io::series_csv;
use ahp::simgen::gen_ar2;
use tempfile::TempDir;

fn ahp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahp")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ar2_input(dir: &Path) -> PathBuf {
    let p = dir.join("ar2.csv");
    fs::write(&p, series_csv(&gen_ar2(0.9, -0.9, 200, 500, 3).unwrap())).unwrap();
    p
}

// Parse `freq,<labels>` output into (labels, rows).
fn read_matrix(p: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').skip(1).map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn malformed_csv_reports_the_line() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("bad.csv");
    let mut text = String::from("value\n");
    for i in 0..20 {
        text.push_str(if i == 15 { "oops\n" } else { "1.5\n" });
    }
    fs::write(&p, text).unwrap();
    let out = ahp(&["analyze", s(&p), "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 17"), "{err}");
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 1);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(ahp(&["--help"]).status.code(), Some(0));
    assert_eq!(ahp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ahp(&["experiment", "--preset", "nope"]).status.code(), Some(2));

    let short = tmp.path().join("short.csv");
    fs::write(&short, "1\n2\n3\n").unwrap();
    assert_eq!(
        ahp(&["analyze", s(&short), "--out-dir", s(tmp.path())]).status.code(),
        Some(3)
    );
    let constant = tmp.path().join("constant.csv");
    fs::write(&constant, "1\n".repeat(64)).unwrap();
    assert_eq!(
        ahp(&["analyze", s(&constant), "--out-dir", s(tmp.path())])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let cfg = tmp.path().join("cfg.json");
    let base = ahp(&["experiment", "--preset", "fig1_desk", "--print-config"]);
    assert!(base.status.success());
    let mut v: serde_json::Value = serde_json::from_slice(&base.stdout).unwrap();

    v["bogus"] = 1.into();
    fs::write(&cfg, v.to_string()).unwrap();
    assert_eq!(
        ahp(&["experiment", s(&cfg), "--out-dir", s(&out_dir)]).status.code(),
        Some(2)
    );

    v.as_object_mut().unwrap().remove("bogus");
    v["reps"] = 0.into();
    fs::write(&cfg, v.to_string()).unwrap();
    assert_eq!(
        ahp(&["experiment", s(&cfg), "--out-dir", s(&out_dir)]).status.code(),
        Some(2)
    );
    assert!(!out_dir.exists() || fs::read_dir(&out_dir).unwrap().count() == 0);
}

#[test]
fn large_threshold_matches_ordinary_periodogram_file() {
    let tmp = TempDir::new().unwrap();
    let input = ar2_input(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let robust = ahp(&[
        "analyze",
        s(&input),
        "--alpha",
        "0.5",
        "--psi-mult",
        "1e6",
        "--out-dir",
        s(&a),
    ]);
    assert!(robust.status.success(), "{}", String::from_utf8_lossy(&robust.stderr));
    assert!(ahp(&["analyze", s(&input), "--estimator", "pg", "--out-dir", s(&b)])
        .status
        .success());

    let (_, x) = read_matrix(&a.join("ar2_periodogram.csv"));
    let (_, y) = read_matrix(&b.join("ar2_periodogram.csv"));
    assert_eq!(x.len(), 99);
    for (r, q) in x.iter().zip(&y) {
        assert!(
            (r[0] - q[0]).abs() <= 1e-6 * q[0].abs().max(1e-12),
            "{} vs {}",
            r[0],
            q[0]
        );
    }
}

#[test]
fn alpha_grid_and_normalize() {
    let tmp = TempDir::new().unwrap();
    let input = ar2_input(tmp.path());
    let out = ahp(&[
        "analyze",
        s(&input),
        "--alpha-grid",
        "--normalize",
        "--out-dir",
        s(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (labels, rows) = read_matrix(&tmp.path().join("ar2_periodogram.csv"));
    assert_eq!(labels.len(), 46);
    assert_eq!(labels[0], "alpha_0.05");
    assert_eq!(labels[45], "alpha_0.95");
    for j in 0..46 {
        let sum: f64 = rows.iter().map(|r| r[j]).sum();
        assert!((sum - 1.0).abs() <= 1e-9, "column {j}: {sum}");
    }
    let fisher: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("ar2_fisher.json")).unwrap()).unwrap();
    assert_eq!(fisher.as_array().unwrap().len(), 46);
}

#[test]
fn simulate_then_spectrogram() {
    let tmp = TempDir::new().unwrap();
    let model = r#"{"model":{"kind":"ar2","phi1":0.9,"phi2":-0.9},"n":1000}"#;
    let outlier = r#"{"kind":"burst","c":15,"t_star":{"fixed":500}}"#;
    let out = ahp(&[
        "simulate",
        "--model",
        model,
        "--outlier",
        outlier,
        "--seed",
        "5",
        "--out-dir",
        s(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = tmp.path().join("series.csv");
    assert_eq!(fs::read_to_string(&series).unwrap().lines().count(), 1001);

    let out = ahp(&[
        "spectrogram",
        s(&series),
        "--window",
        "200",
        "--overlap",
        "100",
        "--alpha",
        "0.8",
        "--psi-mult",
        "0.674",
        "--plot",
        "--out-dir",
        s(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("series_spectrogram.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("center,freq,log_value"));
    // 9 windows of 99 frequencies
    assert_eq!(lines.count(), 9 * 99);
    assert!(tmp.path().join("series_spectrogram.svg").exists());
}

#[test]
fn experiment_with_one_replicate_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let run = |d: &str| {
        let dir = tmp.path().join(d);
        let out = ahp(&[
            "experiment",
            "--preset",
            "table1_desk",
            "--reps",
            "1",
            "--seed",
            "8",
            "--out-dir",
            s(&dir),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        dir_contents(&dir)
    };
    let (a, b) = (run("a"), run("b"));
    assert!(a.len() >= 3);
    assert_eq!(a, b);
}

#[test]
fn presets_are_listed() {
    let out = ahp(&["experiment", "--list"]);
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    for p in ["table1_desk", "fig1_desk", "garch_ahs", "spectrogram_demo"] {
        assert!(names.lines().any(|l| l == p), "{p} missing");
    }
}
