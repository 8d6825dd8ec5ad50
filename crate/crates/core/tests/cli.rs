use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fou2::json::to_canonical_string;
use serde_json::Value;

fn fou2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fou2"))
        .args(args)
        .env_remove("FOU2_SEED")
        .output()
        .unwrap()
}

fn fou2_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fou2"))
        .args(args)
        .env("FOU2_SEED", seed)
        .output()
        .unwrap()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate_100(out: &Path) -> Output {
    fou2(&[
        "simulate",
        "--theta",
        "1",
        "--hurst",
        "0.7",
        "--n",
        "100",
        "--delta",
        "0.1",
        "--sampler",
        "stationary",
        "--seed",
        "42",
        "--out",
        &s(out),
    ])
}

fn bundled_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/thm31_study.json")
}

#[test]
fn simulate_writes_rows_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let out = simulate_100(&a);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("N=100") && stdout.contains("mesh=0.1"),
        "{stdout}"
    );
    let text = std::fs::read_to_string(&a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "time,value");
    assert_eq!(lines.len(), 101);
    assert_eq!(simulate_100(&b).status.code(), Some(0));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn simulate_rejects_hurst_below_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = fou2(&[
        "simulate",
        "--theta",
        "1",
        "--hurst",
        "0.4",
        "--n",
        "100",
        "--delta",
        "0.1",
        "--seed",
        "42",
        "--out",
        &s(&dir.path().join("p.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("(1/2, 1)"), "{}", stderr(&out));
}

#[test]
fn simulate_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = s(&dir.path().join("p.csv"));
    let both = fou2(&[
        "simulate", "--theta", "1", "--hurst", "0.7", "--n", "10", "--delta", "0.1", "--alpha",
        "0.6", "--seed", "1", "--out", &p,
    ]);
    assert_eq!(both.status.code(), Some(1));
    let no_seed = fou2(&[
        "simulate", "--theta", "1", "--hurst", "0.7", "--n", "10", "--delta", "0.1", "--out", &p,
    ]);
    assert_eq!(no_seed.status.code(), Some(1));
    assert!(stderr(&no_seed).contains("FOU2_SEED"));
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert_eq!(simulate_100(&a).status.code(), Some(0));
    let out = fou2_env(
        &[
            "simulate",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--n",
            "100",
            "--delta",
            "0.1",
            "--out",
            &s(&b),
        ],
        "42",
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let bad = fou2_env(
        &[
            "simulate",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--n",
            "10",
            "--delta",
            "0.1",
            "--out",
            &s(&b),
        ],
        "not-a-number",
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn estimate_reports_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    assert_eq!(
        fou2(&[
            "simulate",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--n",
            "1024",
            "--alpha",
            "0.6",
            "--seed",
            "5",
            "--out",
            &s(&path),
        ])
        .status
        .code(),
        Some(0)
    );

    let report = dir.path().join("r.json");
    let known = fou2(&[
        "estimate",
        "--input",
        &s(&path),
        "--hurst",
        "0.7",
        "--out",
        &s(&report),
    ]);
    assert_eq!(known.status.code(), Some(0), "{}", stderr(&known));
    let text = String::from_utf8(known.stdout).unwrap();
    assert_eq!(std::fs::read_to_string(&report).unwrap(), text);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v["theta_hat"].is_f64() && v["ci95"].is_array() && v["mu_hat"].is_f64());
    assert_eq!(to_canonical_string(&v).unwrap(), text);

    let unknown = fou2(&[
        "estimate",
        "--input",
        &s(&path),
        "--filter",
        "1,-2,1",
        "--filter-order",
        "2",
    ]);
    assert_eq!(unknown.status.code(), Some(0), "{}", stderr(&unknown));
    let v: Value = serde_json::from_slice(&unknown.stdout).unwrap();
    assert!(v["h_hat"].is_f64() && v["theta_tilde"].is_f64());
    assert!(v.get("theta_hat").is_none());
}

#[test]
fn estimate_zero_path_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    let mut text = String::from("time,value\n");
    for k in 0..50 {
        text.push_str(&format!("{},0\n", k as f64 * 0.1));
    }
    std::fs::write(&path, text).unwrap();
    let out = fou2(&["estimate", "--input", &s(&path), "--hurst", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate"), "{}", stderr(&out));
}

#[test]
fn estimate_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "time,value\n0,1\nx,2\n").unwrap();
    let out = fou2(&["estimate", "--input", &s(&path), "--hurst", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    let missing = fou2(&["estimate", "--input", &s(&path)]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn asymptotics_report_and_validation() {
    let out = fou2(&["asymptotics", "--theta", "1", "--hurst", "0.7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["psi"].as_f64().unwrap() - 0.7f64.powf(1.4)).abs() < 1e-12);
    let s2 = v["sigma2"].as_f64().unwrap();

    let tight = fou2(&[
        "asymptotics",
        "--theta",
        "1",
        "--hurst",
        "0.7",
        "--abs-tol",
        "1e-11",
        "--rel-tol",
        "1e-7",
    ]);
    assert_eq!(tight.status.code(), Some(0));
    let t: Value = serde_json::from_slice(&tight.stdout).unwrap();
    assert!((t["sigma2"].as_f64().unwrap() - s2).abs() / s2 < 1e-4);

    assert_eq!(
        fou2(&["asymptotics", "--theta", "0", "--hurst", "0.7"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        fou2(&[
            "asymptotics",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--rel-tol",
            "-1"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn mc_bundled_config_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = s(&bundled_config());
    let first = fou2(&["mc", "--config", &cfg, "--out-dir", &s(&a)]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let verdict = String::from_utf8(first.stdout).unwrap();
    assert!(
        verdict.contains("bias=") && verdict.contains("ks_p="),
        "{verdict}"
    );
    let summary: Value =
        serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert!(summary["ks_p"].is_f64());
    assert_eq!(summary["normalized_errors"].as_array().unwrap().len(), 200);

    let second = fou2(&[
        "mc",
        "--config",
        &cfg,
        "--out-dir",
        &s(&b),
        "--workers",
        "4",
    ]);
    assert_eq!(second.status.code(), Some(0));
    for f in ["replications.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let csv = std::fs::read_to_string(a.join("replications.csv")).unwrap();
    assert!(csv.starts_with("rep,estimate,normalized_error,flags\n"));
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn mc_config_validation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg: Value =
        serde_json::from_str(&std::fs::read_to_string(bundled_config()).unwrap()).unwrap();
    cfg["replications"] = 0.into();
    let path = dir.path().join("zero.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let out = fou2(&[
        "mc",
        "--config",
        &s(&path),
        "--out-dir",
        &s(&dir.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    let inline = fou2(&[
        "mc",
        "--theta",
        "1",
        "--hurst",
        "0.7",
        "--n",
        "100",
        "--delta",
        "0.1",
        "--estimator",
        "theta_known_h",
        "--replications",
        "1",
        "--seed",
        "1",
        "--out-dir",
        &s(&dir.path().join("o")),
    ]);
    assert_eq!(inline.status.code(), Some(1));
}

#[test]
fn mc_inline_flags_match_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = fou2(&[
            "mc",
            "--theta",
            "1",
            "--hurst",
            "0.7",
            "--n",
            "512",
            "--alpha",
            "0.6",
            "--estimator",
            "hurst_only",
            "--replications",
            "30",
            "--filter",
            "1,-2,1",
            "--seed",
            "8",
            "--out-dir",
            &s(&dir.path().join(name)),
            "--workers",
            workers,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        out.stdout
    };
    assert_eq!(run("w1", "1"), run("w4", "4"));
    for f in ["replications.csv", "summary.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("w1").join(f)).unwrap(),
            std::fs::read(dir.path().join("w4").join(f)).unwrap()
        );
    }
}

#[test]
fn help_and_unknown_subcommand() {
    assert_eq!(fou2(&["--help"]).status.code(), Some(0));
    assert_eq!(fou2(&["frobnicate"]).status.code(), Some(1));
}
