//! End-to-end tests of the `nematic` binary: flags, exit codes, output
//! formats and config round-trips.

use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nematic")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_reports_the_maier_saupe_bifurcation() {
    let json = stdout_json(&run(&["spectrum", "--potential", "maier-saupe", "--w", "1"]));
    assert_eq!(json["bifurcation_betas"]["2"].as_f64().unwrap(), 5.0);
    assert_eq!(json["eigenvalues"]["2"].as_f64().unwrap(), 0.2);
    assert!(json["transcriticality_B"].as_f64().unwrap() > 0.0);
    let json2 = stdout_json(&run(&["spectrum", "--potential", "maier-saupe", "--w", "2"]));
    assert_eq!(json2["bifurcation_betas"]["2"].as_f64().unwrap(), 2.5);
}

#[test]
fn spectrum_of_a_constant_potential_has_no_bifurcations() {
    let json = stdout_json(&run(&["spectrum", "--potential", "legendre", "--coeffs", "0:1"]));
    assert!(json["bifurcation_betas"].as_object().unwrap().is_empty());
    assert!(json["transcriticality_B"].is_null());
}

#[test]
fn bad_potential_spec_exits_2() {
    let out = run(&["spectrum", "--potential", "legendre", "--coeffs", "1:1"]);
    assert_eq!(out.status.code(), Some(2));
    let out2 = run(&["spectrum", "--potential", "nonsense"]);
    assert_eq!(out2.status.code(), Some(2));
    let out3 = run(&["solve"]); // missing --beta
    assert_eq!(out3.status.code(), Some(2));
}

#[test]
fn phase_diagram_empty_range_exits_2() {
    let out = run(&[
        "phase-diagram",
        "--beta-min",
        "2",
        "--beta-max",
        "2",
        "--beta-steps",
        "10",
        "--out",
        "/tmp/nematic-unused",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let missing = run(&["phase-diagram", "--beta-min", "1", "--beta-max", "2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn phase_diagram_writes_csv_and_events() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("scan");
    let out = run(&[
        "phase-diagram",
        "--potential",
        "maier-saupe",
        "--w",
        "1",
        "--beta-min",
        "1",
        "--beta-max",
        "20",
        "--beta-steps",
        "96",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("scan.branches.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "beta,xi,dF_dxi,stable,residual,branch_kind");
    let mut kinds = std::collections::BTreeSet::new();
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 6);
        let residual: f64 = cols[4].parse().unwrap();
        assert!(residual <= 1e-9);
        kinds.insert(cols[5].to_string());
    }
    assert_eq!(
        kinds.into_iter().collect::<Vec<_>>(),
        vec!["isotropic", "nematic-lower", "nematic-upper"]
    );

    let events: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scan.events.json")).unwrap())
            .unwrap();
    let kinds: Vec<&str> = events
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"transcritical"));
    assert!(kinds.contains(&"saddle-node"));
}

#[test]
fn solve_matches_the_expected_fixed_points() {
    // Prolate seed at beta = 10 lands below the isotropic value.
    let nematic = stdout_json(&run(&["solve", "--beta", "10", "--seed-density", "prolate"]));
    assert!(nematic["converged"].as_bool().unwrap());
    assert!(nematic["order_parameter"].as_f64().unwrap() < 2.0 / 3.0);

    // The uniform seed is exactly fixed at any temperature.
    let iso = stdout_json(&run(&["solve", "--beta", "10", "--seed-density", "uniform"]));
    assert!((iso["order_parameter"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    // Below the fold every seed returns to the isotropic state.
    let low = stdout_json(&run(&["solve", "--beta", "1", "--seed-density", "prolate"]));
    assert!((low["order_parameter"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
}

#[test]
fn laplace_check_passes() {
    let json = stdout_json(&run(&["laplace-check"]));
    assert!(json["pass"].as_bool().unwrap(), "{json}");
    assert!(json["expectation_rate_test"]["pass"].as_bool().unwrap());
}

#[test]
fn mc_outputs_the_expected_keys() {
    let json = stdout_json(&run(&[
        "mc",
        "--beta",
        "2",
        "--n-particles",
        "16",
        "--sweeps",
        "2000",
        "--burnin",
        "500",
        "--seed",
        "3",
    ]));
    for key in ["N", "beta", "xi_mean", "xi_stderr", "tau_int", "acceptance"] {
        assert!(json.get(key).is_some(), "missing key {key}");
    }
    assert!(json["xi_stderr"].as_f64().unwrap() > 0.0);
}

#[test]
fn emitted_configs_reproduce_runs_bit_exactly() {
    // solve: stdout comparison.
    let direct = run(&["solve", "--beta", "10", "--seed-density", "prolate", "--tol", "1e-11"]);
    let cfg = run(&[
        "solve",
        "--beta",
        "10",
        "--seed-density",
        "prolate",
        "--tol",
        "1e-11",
        "--emit-config",
    ]);
    assert!(cfg.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("solve.json");
    std::fs::write(&cfg_path, &cfg.stdout).unwrap();
    let replayed = run(&["solve", "--config", cfg_path.to_str().unwrap()]);
    assert!(replayed.status.success());
    assert_eq!(direct.stdout, replayed.stdout);

    // mc: seeded chain must replay bit-exactly too.
    let mc_args = ["mc", "--beta", "3", "--n-particles", "12", "--sweeps", "1500", "--burnin", "300", "--seed", "9"];
    let mc_direct = run(&mc_args);
    let mut emit_args = mc_args.to_vec();
    emit_args.push("--emit-config");
    let mc_cfg = run(&emit_args);
    let mc_cfg_path = dir.path().join("mc.json");
    std::fs::write(&mc_cfg_path, &mc_cfg.stdout).unwrap();
    let mc_replayed = run(&["mc", "--config", mc_cfg_path.to_str().unwrap()]);
    assert_eq!(mc_direct.stdout, mc_replayed.stdout);

    // phase-diagram: file contents identical across a replay.
    let prefix_a = dir.path().join("a");
    let prefix_b = dir.path().join("b");
    let pd_args = |prefix: &std::path::Path| {
        vec![
            "phase-diagram".to_string(),
            "--beta-min".into(),
            "4".into(),
            "--beta-max".into(),
            "6".into(),
            "--beta-steps".into(),
            "11".into(),
            "--jobs".into(),
            "2".into(),
            "--out".into(),
            prefix.to_str().unwrap().to_string(),
        ]
    };
    let a = Command::new(bin()).args(pd_args(&prefix_a)).output().unwrap();
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let mut emit = pd_args(&prefix_b);
    emit.push("--emit-config".into());
    let pd_cfg = Command::new(bin()).args(&emit).output().unwrap();
    let pd_cfg_path = dir.path().join("pd.json");
    std::fs::write(&pd_cfg_path, &pd_cfg.stdout).unwrap();
    let b = run(&["phase-diagram", "--config", pd_cfg_path.to_str().unwrap()]);
    assert!(b.status.success(), "{}", String::from_utf8_lossy(&b.stderr));
    let csv_a = std::fs::read(dir.path().join("a.branches.csv")).unwrap();
    let csv_b = std::fs::read(dir.path().join("b.branches.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let ev_a = std::fs::read(dir.path().join("a.events.json")).unwrap();
    let ev_b = std::fs::read(dir.path().join("b.events.json")).unwrap();
    assert_eq!(ev_a, ev_b);
}

#[test]
fn config_for_the_wrong_command_is_rejected() {
    let cfg = run(&["solve", "--beta", "5", "--emit-config"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solve.json");
    std::fs::write(&path, &cfg.stdout).unwrap();
    let out = run(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_floats_are_round_trip_decimals() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fmt");
    let out = run(&[
        "phase-diagram",
        "--beta-min",
        "1",
        "--beta-max",
        "3",
        "--beta-steps",
        "5",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fmt.branches.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let xi: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    // 17 significant digits reproduce the isotropic root exactly.
    assert_eq!(xi, 2.0 / 3.0);
    // And the textual form carries the full 17 digits.
    assert!(row.split(',').nth(1).unwrap().len() >= 20);
}
