use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_synthbath");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SYNTHBATH_RUN_SCENARIO")
        .output()
        .unwrap()
}

const GRID: &str = "
[run]
scenario = two-qutrit

[sweep]
axis1_name = beta_ls
axis1_start = -0.04
axis1_stop = 0.04
axis1_count = 5
axis2_name = beta_rs
axis2_start = -0.04
axis2_stop = 0.04
axis2_count = 4
";

#[test]
fn grid_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "grid.ini", GRID);
    let serial = dir.path().join("serial.csv");
    let parallel = dir.path().join("parallel.csv");
    for (out, jobs) in [(&serial, "1"), (&parallel, "3")] {
        let o = run(&[
            "grid",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let a = std::fs::read(&serial).unwrap();
    let b = std::fs::read(&parallel).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), synthbath::sweep::CSV_HEADER);
    assert_eq!(lines.count(), 20);
}

#[test]
fn run_prints_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "engine.ini",
        "[run]\nscenario = engine\n[params]\nbeta_sl = -0.5\n",
    );
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let eta = v["flux"]["efficiencies"]["total"].as_f64().unwrap();
    assert!((eta - 1.0).abs() < 1e-8);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.ini", "[run]\nscenario = nowhere\n");
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[
        "run",
        "--config",
        dir.path().join("missing.ini").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solver_errors_exit_with_3() {
    // Near-zero bath temperatures leave |1> and |2> both dark, so the steady state is not unique.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "iso.ini",
        "[run]\nscenario = two-qutrit\n[params]\nbeta_h = 800\nbeta_c = 800\n",
    );
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn failed_grid_points_exit_with_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "partial.ini",
        "[run]\nscenario = single\n[sweep]\naxis1_name = e_c\naxis1_start = 10.5\naxis1_stop = 25\naxis1_count = 2\n",
    );
    let o = run(&["grid", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(2).unwrap().contains("NaN"));
}

#[test]
fn env_override_reaches_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "two.ini", "[run]\nscenario = two-qutrit\n");
    let o = Command::new(BIN)
        .args(["run", "--config", cfg.to_str().unwrap(), "--format", "json"])
        .env("SYNTHBATH_PARAMS_BETA_LS", "-0.03")
        .env("SYNTHBATH_PARAMS_BETA_RS", "0.03")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["flux"]["heat_flux"]["L"].as_f64().unwrap() > 0.0);
}
