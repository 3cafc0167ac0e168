//! The `nclil` binary: exit codes, artifacts and reproducibility.

use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn nclil(args: &[&str], out: &Path) -> (i32, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_nclil"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn nclil");
    (output.status.code().unwrap_or(-1), String::from_utf8_lossy(&output.stderr).into_owned())
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn verifiers_exit_zero_and_write_artifacts() {
    let cases: &[&[&str]] = &[
        &["verify-ce", "--samples", "10"],
        &["verify-expineq", "--replicas", "3", "--grid-points", "5"],
        &["verify-expineq", "--source", "sampled", "--paths", "64", "--horizon", "500", "--replicas", "2"],
        &["verify-doob", "--replicas", "3", "--model", "pinching", "--n", "3"],
        &["verify-dualdoob", "--replicas", "3"],
        &["verify-chebyshev", "--replicas", "2", "--grid-points", "5"],
        &["verify-scalarineq"],
        &["baseline-scalar", "--paths", "64", "--horizon", "2000"],
        &["demo-semicircular", "--size", "50", "--steps", "120"],
    ];
    for args in cases {
        let dir = tempfile::tempdir().unwrap();
        let (code, err) = nclil(args, dir.path());
        assert_eq!(code, 0, "{args:?}: {err}");
        assert!(dir.path().join("resolved-config.json").exists());
        assert!(dir.path().join("summary.json").exists());
        assert!(!dir.path().join("reproducer.json").exists());
        let resolved = json(&dir.path().join("resolved-config.json"));
        assert_eq!(resolved["command"], args[0]);
    }
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["verify-doob", "--p", "2"][..],
        &["verify-dualdoob", "--p", "3"],
        &["lil-run", "--eps", "0.5"],
        &["demo-semicircular", "--size", "10"],
        &["verify-ce", "--threads", "0"],
        &["verify-ce", "--model", "tensor", "--m", "2", "--n", "20"],
        &["no-such-command"],
    ] {
        let (code, err) = nclil(args, dir.path());
        assert_eq!(code, 1, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn short_dense_lil_run_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["lil-run", "--source", "dense", "--model", "diagonal", "--m", "2", "--n", "8"];
    let (code, err) = nclil(&base, dir.path());
    assert_eq!(code, 1, "{err}");
    let mut args = base.to_vec();
    args.push("--allow-pre-asymptotic");
    let (code, err) = nclil(&args, dir.path());
    assert_eq!(code, 0, "{err}");
    let summary = json(&dir.path().join("summary.json"));
    assert!(dir.path().join("blocks-0.csv").exists());
    assert!(summary.to_string().contains("pre_asymptotic"));
}

#[test]
fn config_file_and_flags_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command":"verify-chebyshev","p":6,"replicas":2,"grid_points":4}"#).unwrap();
    let out = dir.path().join("out");
    let cfg_arg = cfg.to_str().unwrap();
    let (code, err) = nclil(&["verify-chebyshev", "--config", cfg_arg, "--seed", "9"], &out);
    assert_eq!(code, 0, "{err}");
    let resolved = json(&out.join("resolved-config.json"));
    assert_eq!(resolved["p"], 6.0);
    assert_eq!(resolved["seed"], 9);
    assert_eq!(resolved["replicas"], 2);
    // a config for one command cannot drive another
    let (code, _) = nclil(&["verify-doob", "--config", cfg_arg], &out);
    assert_eq!(code, 1);
    std::fs::write(&cfg, r#"{"command":"verify-chebyshev","typo":1}"#).unwrap();
    let (code, _) = nclil(&["verify-chebyshev", "--config", cfg_arg], &out);
    assert_eq!(code, 1);
}

#[test]
fn lil_run_is_reproducible_across_thread_counts() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let args = ["lil-run", "--paths", "256", "--horizon", "50000", "--seed", "5", "--threads", threads];
        let (code, err) = nclil(&args, dir.path());
        assert_eq!(code, 0, "{err}");
        (
            std::fs::read(dir.path().join("summary.json")).unwrap(),
            std::fs::read(dir.path().join("blocks-0.csv")).unwrap(),
        )
    };
    assert_eq!(run("1"), run("3"));
}
