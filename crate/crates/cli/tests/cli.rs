use std::path::Path;
use std::process::{Command, Output};

use darkstate::ladder::{build_ladder_b, Boundary, LadderParams};
use darkstate::numkit::{eig_general, DEFAULT_TOL};

const HALF_PI: &str = "1.5707963267948966";

fn darkstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darkstate"))
        .args(args)
        .env_remove("DARKSTATE_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = darkstate(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

fn vec3(v: &serde_json::Value) -> [f64; 3] {
    let a = v.as_array().unwrap();
    [0, 1, 2].map(|i| a[i].as_f64().unwrap())
}

fn assert_vec3(got: [f64; 3], want: [f64; 3]) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
    }
}

#[test]
fn compensate_worked_examples() {
    let v = json(&["compensate", "--by", "1", "--theta", HALF_PI]);
    assert_vec3(vec3(&v["B_I"]), [0.0, 0.0, 1.0]);
    assert!(v["residual"].as_f64().unwrap() < 1e-12);

    let v = json(&["compensate", "--bz", "1", "--theta", HALF_PI]);
    assert_vec3(vec3(&v["B_I"]), [0.0, -1.0, 0.0]);

    let v = json(&["compensate", "--theta", "0.7"]);
    assert_vec3(vec3(&v["B_I"]), [0.0; 3]);
    assert_eq!(v["residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn spectrum_csv_round_trips_bit_exactly() {
    let text = stdout_ok(&[
        "spectrum", "--length", "6", "--gamma", "-0.3", "--omega-y", "0.3", "--omega-x", "0.2",
    ]);
    let p = LadderParams::new(1.0, -0.3, 0.2, 0.3, 6, Boundary::Open).unwrap();
    let spec = eig_general(&build_ladder_b(&p).unwrap(), DEFAULT_TOL).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,re_E,im_E"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), spec.eigenvalues.len());
    for (row, z) in rows.iter().zip(&spec.eigenvalues) {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[1].parse::<f64>().unwrap().to_bits(), z.re.to_bits());
        assert_eq!(f[2].parse::<f64>().unwrap().to_bits(), z.im.to_bits());
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["bands", "--nk", "9", "--gamma", "-0.2"][..],
        &["edges", "--format", "json", "--gamma", "-0.3", "--omega-y", "0.3"][..],
        &["manybody", "--length", "8", "--boundary", "periodic", "--gamma", "-0.3", "--omega-y", "0.3", "--omega-x", "-0.5"][..],
    ] {
        assert_eq!(stdout_ok(args), stdout_ok(args), "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[ladder]\ngama = 0.1\n").unwrap();
    let out = darkstate(&["--config", path.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));
}

#[test]
fn domain_errors_and_bad_flags_exit_with_one() {
    assert_eq!(darkstate(&["spectrum", "--length", "0"]).status.code(), Some(1));
    assert_eq!(darkstate(&["spectrum", "--boundary", "twisted"]).status.code(), Some(1));
    assert_eq!(darkstate(&["spectrum", "--eig-tol", "-1"]).status.code(), Some(1));
    assert_eq!(darkstate(&["--version"]).status.code(), Some(0));
}

#[test]
fn config_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "[ladder]\nlength = 4\ngamma = -0.3\n").unwrap();
    let cfg = path.to_str().unwrap();
    assert_eq!(stdout_ok(&["--config", cfg, "spectrum"]).lines().count(), 1 + 8);
    assert_eq!(
        stdout_ok(&["--config", cfg, "spectrum", "--length", "6"]).lines().count(),
        1 + 12
    );
}

#[test]
fn scan_reports_edge_modes_only_past_the_threshold() {
    let text = stdout_ok(&[
        "scan", "--length", "40", "--gamma-start", "0.2", "--gamma-stop", "1.1",
        "--gamma-step", "0.3", "--omega-y-grid", "1.2",
    ]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,omega_y,n_edge,max_im"));
    let counts: Vec<(f64, usize)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(counts.len(), 4);
    for (gamma, n) in counts {
        let expected = if gamma > 0.9 { 2 } else { 0 };
        assert_eq!(n, expected, "gamma {gamma}");
    }
}

#[test]
fn compensated_evolution_keeps_the_dark_state() {
    let text = stdout_ok(&["lambda-evolve", "--theta", "1.1", "--bx", "0.4", "--by", "-0.7", "--steps", "50"]);
    let mut n = 0;
    for row in text.lines().skip(1) {
        let f: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((f - 1.0).abs() < 1e-9, "fidelity {f}");
        n += 1;
    }
    assert_eq!(n, 51);
}

#[test]
fn seed_environment_variable_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 5\n").unwrap();
    let cfg = path.to_str().unwrap();
    let v = json(&["--config", cfg, "--format", "json", "spectrum", "--length", "4"]);
    assert_eq!(v["seed"], 5);
    let out = Command::new(env!("CARGO_BIN_EXE_darkstate"))
        .args(["--config", cfg, "--format", "json", "spectrum", "--length", "4"])
        .env("DARKSTATE_SEED", "77")
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 77);
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn edges_writes_per_state_files_into_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    stdout_ok(&[
        "edges", "--gamma", "-0.3", "--omega-y", "0.3", "--output", out.to_str().unwrap(),
    ]);
    let summary: serde_json::Value = serde_json::from_str(&read(&out, "edges.json")).unwrap();
    let n = summary["result"]["sides"].as_array().unwrap().len();
    assert_eq!(n, 2);
    for i in 0..n {
        let csv = read(&out, &format!("edges_state_{i}.csv"));
        assert!(csv.starts_with("n,leg,re_psi,im_psi,abs2\n"));
        assert_eq!(csv.lines().count(), 1 + 80);
    }
}
