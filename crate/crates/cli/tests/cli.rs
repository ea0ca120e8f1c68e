//! Binary-level checks: output determinism, declared column layouts, and
//! exit codes.

use std::process::Command;

fn radbound() -> Command {
    Command::new(env!("CARGO_BIN_EXE_radbound"))
}

fn run_ok(args: &[&str]) -> String {
    let out = radbound().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let args = [
        "--mode",
        "spinglass-sweep",
        "--seed",
        "11",
        "--k",
        "2",
        "--trials",
        "3",
        "--grid",
        "3x3",
        "--couplings",
        "0,1.5",
    ];
    let a = run_ok(&args);
    let b = run_ok(&args);
    assert_eq!(a, b);
}

#[test]
fn sweep_row_count_is_couplings_times_trials() {
    let text = run_ok(&[
        "--mode",
        "spinglass-sweep",
        "--seed",
        "5",
        "--k",
        "1",
        "--trials",
        "4",
        "--grid",
        "2x3",
        "--couplings",
        "0,0.5,2",
    ]);
    let data_rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("coupling"))
        .count();
    assert_eq!(data_rows, 3 * 4);
    assert!(text.lines().last().unwrap().starts_with("# sandwich_fraction"));
}

#[test]
fn sweep_exact_column_matches_separable_form_at_zero_coupling() {
    let params = radbound_cli::sweep::SweepParams {
        seed: 5,
        k: 1,
        trials: 2,
        rows: 3,
        cols: 3,
        couplings: vec![0.0],
    };
    let text = radbound_cli::sweep::run_csv(&params).unwrap();
    for (i, line) in text
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .enumerate()
    {
        let exact: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        let model = radbound_cli::sweep::model_for(&params, 0, i as u64).unwrap();
        let separable = radbound::exact::separable_ln_z(&model);
        assert!(
            (exact - separable).abs() < 1e-10,
            "row {i}: {exact} vs separable {separable}"
        );
    }
}

#[test]
fn sweep_json_ln_view_is_exact_rescaling() {
    let text = run_ok(&[
        "--mode",
        "spinglass-sweep",
        "--seed",
        "2",
        "--k",
        "2",
        "--trials",
        "2",
        "--grid",
        "2x2",
        "--couplings",
        "1",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let delta_bar = row["report"]["delta_bar"].as_f64().unwrap();
        let ln_delta = row["ln_view"]["delta_bar"].as_f64().unwrap();
        assert_eq!(ln_delta, delta_bar * std::f64::consts::LN_2);
    }
    assert!(doc["summary"]["sandwich_fraction"].as_f64().unwrap() >= 0.0);
}

#[test]
fn sat_bounds_header_layout_is_declared() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.cnf");
    std::fs::write(&path, "p cnf 3 2\n1 2 0\n-1 3 0\n").unwrap();
    let text = run_ok(&[
        "--mode",
        "sat-bounds",
        "--seed",
        "4",
        "--k",
        "1",
        "--trials",
        "2",
        "--cnf",
        path.to_str().unwrap(),
    ]);
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "name,num_vars,num_clauses,ln_z,delta_bar_ln,delta_bar_ln_std,psi_ub_ln,psi_ub_ln_std,\
         theta_ub,theta_ub_std,psi_lb_ln,psi_lb_ln_std,theta_lb,theta_lb_std,status"
    );
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn sat_bounds_sandwiches_the_unconstrained_count() {
    // No clauses: ln Z = 10 ln 2 ≈ 6.931.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("free.cnf");
    std::fs::write(&path, "p cnf 10 0\n").unwrap();
    let text = run_ok(&[
        "--mode",
        "sat-bounds",
        "--seed",
        "9",
        "--k",
        "1",
        "--trials",
        "20",
        "--cnf",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    let row = &doc["rows"][0];
    let ln_z = row["ln_z"].as_f64().unwrap();
    assert!((ln_z - 10.0 * std::f64::consts::LN_2).abs() < 1e-12);
    let psi_lb = row["psi_lb_ln"]["mean"].as_f64().unwrap();
    let psi_ub = row["psi_ub_ln"]["mean"].as_f64().unwrap();
    assert!(psi_lb <= ln_z && ln_z <= psi_ub, "[{psi_lb}, {psi_ub}] vs {ln_z}");
}

#[test]
fn sat_bounds_flags_unsat_instances() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("unsat.cnf");
    std::fs::write(&path, "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let text = run_ok(&[
        "--mode",
        "sat-bounds",
        "--seed",
        "4",
        "--k",
        "1",
        "--trials",
        "2",
        "--cnf",
        path.to_str().unwrap(),
    ]);
    let row = text.lines().nth(1).unwrap();
    assert!(row.ends_with(",unsat"), "row: {row}");
    assert!(row.contains(",,"), "bounds omitted: {row}");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "--mode",
        "spinglass-sweep",
        "--seed",
        "1",
        "--k",
        "1",
        "--trials",
        "2",
        "--grid",
        "2x2",
        "--couplings",
        "0.5",
    ];
    let stdout = run_ok(&args);
    let status = radbound()
        .args(args)
        .args(["--out", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn verify_mode_exits_zero() {
    let status = radbound().args(["--mode", "verify", "--seed", "3"]).status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    // Missing --cnf for sat-bounds.
    let out = radbound().args(["--mode", "sat-bounds"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Unknown mode.
    let out = radbound().args(["--mode", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Malformed grid.
    let out = radbound()
        .args(["--mode", "spinglass-sweep", "--grid", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = radbound().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn external_maxsat_path_matches_internal_on_trivial_instance() {
    // A real (if minimal) MaxSAT solver for the single instance below:
    // the hard clause {1} forces x1 = true, so the optimum cost is 1
    // exactly when the soft clause asks for -1.
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("one.cnf");
    std::fs::write(&cnf, "p cnf 1 1\n1 0\n").unwrap();
    let solver = dir.path().join("solver.sh");
    std::fs::write(
        &solver,
        "#!/bin/sh\nif grep -q '^1 -1 0' \"$1\"; then echo 'o 1'; else echo 'o 0'; fi\n\
         echo 's OPTIMUM FOUND'\necho 'v 1'\n",
    )
    .unwrap();

    let base_args = [
        "--mode",
        "sat-bounds",
        "--seed",
        "13",
        "--k",
        "2",
        "--trials",
        "5",
        "--cnf",
        cnf.to_str().unwrap(),
    ];
    let internal = run_ok(&base_args);
    let cmd = format!("sh {} {{}}", solver.display());
    let external = run_ok(
        &base_args
            .iter()
            .copied()
            .chain(["--maxsat-cmd", &cmd])
            .collect::<Vec<_>>(),
    );
    assert_eq!(internal, external);
    assert!(internal.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn verify_verdicts_are_stable_across_seeds() {
    for seed in ["3", "1234", "987654321"] {
        let out = radbound().args(["--mode", "verify", "--seed", seed]).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "seed {seed} failed");
    }
}
