use std::process::{Command, Output};

fn semipar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semipar")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ambient_check_passes() {
    let o = semipar(&["check", "--suite", "AMBIENT", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn type_b_proof_step_at_pi_over_8() {
    let o = semipar(&["proofstep", "--step", "TYPE_B_AXI", "--m", "4", "--r", "0.3926990817"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let value = |key: &str| -> f64 {
        let line = out.lines().find(|l| l.trim_start().starts_with(key)).expect(key);
        line.split('=').nth(1).unwrap().trim().parse().unwrap()
    };
    assert!((value("d =") + 8.0).abs() < 1e-8);
    assert!((value("4alpha =") + 8.0).abs() < 1e-8);
}

#[test]
fn type_a_scan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    let o = semipar(&[
        "scan", "--type", "A", "--m", "3", "--r-min", "0.1", "--r-max", "1.0", "--steps", "50", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,alpha,beta,lambda,mu,defect_frobenius,defect_max_abs"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 50);
    let min = rows.iter().map(|r| r[5]).fold(f64::INFINITY, f64::min);
    assert!(min >= 0.44);
}

#[test]
fn check_report_is_byte_stable_and_stdout_is_summary_only() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = semipar(&[
            "check", "--suite", "POINT_IDENTITIES", "--m", "3", "--seed", "9", "--trials", "10", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        assert!(!stdout(&o).contains('{'));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    assert_eq!(v["suite"], "POINT_IDENTITIES");
    assert_eq!(v["seed"], 9);
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(v["checks"].as_array().unwrap().len() as u64, v["summary"]["pass"].as_u64().unwrap());
}

#[test]
fn residual_oracle_failure_exits_one() {
    let o = semipar(&["check", "--suite", "RESIDUAL_ORACLE", "--m", "3", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL residual.E160"));
}

#[test]
fn csv_format_for_checks() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    let o = semipar(&["check", "--suite", "AMBIENT", "--m", "4", "--format", "csv", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.starts_with("name,params,max_residual,tolerance,pass,note\n"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["check", "--suite", "AMBIENT", "--m", "3", "--bogus"],
        vec!["check", "--suite", "NOPE", "--m", "3"],
        vec!["frobnicate"],
        vec!["scan", "--type", "C", "--m", "3", "--r-min", "0.1", "--r-max", "1", "--steps", "5", "--out", "x.csv"],
    ] {
        let o = semipar(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn out_of_range_radius_names_interval() {
    let o = semipar(&["proofstep", "--step", "TYPE_A_FINAL", "--m", "3", "--r", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("(0, pi/sqrt(8))"), "{err}");
    let o = semipar(&["proofstep", "--step", "TYPE_B_AXI", "--m", "4", "--r", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("(0, pi/4)"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for t in ["1", "3"] {
        let p = dir.path().join(format!("t{t}.json"));
        let o = semipar(&[
            "--threads", t, "check", "--suite", "SUBSPACES", "--m", "3", "--trials", "20", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(p).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn free_minimization_reaches_zero() {
    let o = semipar(&["minimize", "--m", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("pointwise minimizers exist"));
}
