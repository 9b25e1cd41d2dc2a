use std::process::{Command, Output};

fn sqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqkd"))
        .args(args)
        .output()
        .expect("sqkd binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["run", "--attack", "rotation:4.0"],
        vec!["run", "--attack", "teleport"],
        vec!["run", "--attack", "measure-resend:y"],
        vec!["run", "--n", "lots"],
        vec!["run", "--p-ctrl", "1.5"],
        vec!["run", "--n", "0"],
        vec!["run", "--trials", "0"],
        vec!["sweep", "--attack", "cnot-probe"],
        vec!["sweep", "--points", "1"],
        vec!["frobnicate"],
    ] {
        let out = sqkd(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
}

#[test]
fn unwritable_output_exits_1() {
    let out = sqkd(&["run", "--out", "/nonexistent-dir/report.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn aborts_are_results() {
    let out = sqkd(&["run", "--attack", "measure-resend:z", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",true,CtrlErrorHigh,"), "{row}");
}

#[test]
fn resolved_configuration_is_printed() {
    let out = sqkd(&["run", "--attack", "cnot-probe:mid", "--format", "csv"]);
    let err = stderr(&out);
    for field in [
        "n=64",
        "delta=0.5",
        "p_ctrl=0.05",
        "p_test=0.05",
        "seed=1",
        "trials=1",
        "security_margin=16",
        "attack=cnot-probe:mid",
    ] {
        assert!(err.contains(field), "missing {field} in {err}");
    }
    let text = sqkd(&["run"]);
    assert!(stdout(&text).starts_with("# sqkd run: n=64 delta=0.5"));
}

#[test]
fn attack_free_csv_row() {
    let out = sqkd(&["run", "--format", "csv", "--trials", "2"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for line in lines {
        let row: Vec<&str> = line.split(',').collect();
        assert_eq!(row[col("test_rate")], "0");
        assert_eq!(row[col("z_ctrl_rate")], "0");
        assert_eq!(row[col("x_ctrl_rate")], "0");
        assert_eq!(row[col("aborted")], "false");
        assert_eq!(row[col("keys_match")], "true");
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["text", "csv", "json-lines"] {
        let paths: Vec<String> = (0..2)
            .map(|k| dir.path().join(format!("{format}-{k}")).display().to_string())
            .collect();
        for p in &paths {
            let out = sqkd(&[
                "run", "--seed", "7", "--trials", "4", "--attack", "measure-resend:random", "--p-ctrl", "1",
                "--format", format, "--out", p,
            ]);
            assert!(out.status.success());
            assert!(out.stdout.is_empty());
        }
        let a = std::fs::read(&paths[0]).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, std::fs::read(&paths[1]).unwrap(), "{format}");
    }
}

#[test]
fn trials_are_ordered_by_seed() {
    let out = sqkd(&["run", "--seed", "10", "--trials", "6", "--format", "csv"]);
    let seeds: Vec<String> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(seeds, ["10", "11", "12", "13", "14", "15"]);
}

#[test]
fn sweep_grid_and_header() {
    let out = sqkd(&["sweep", "--attack", "rotation", "--points", "9", "--format", "csv"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("theta,disturbance,info_advantage"));
    let thetas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(thetas.len(), 9);
    for (k, t) in thetas.iter().enumerate() {
        assert!((t - std::f64::consts::FRAC_PI_2 * k as f64 / 8.0).abs() < 1e-15);
    }
}

#[test]
fn json_lines_carry_full_reports() {
    let out = sqkd(&["run", "--trials", "3", "--format", "json-lines", "--attack", "cnot-probe:mid"]);
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    for (k, rec) in lines.iter().enumerate() {
        assert_eq!(rec["trial"], k);
        assert_eq!(rec["report"]["attack"], "cnot-probe:mid");
        assert_eq!(rec["report"]["config"]["seed"], 1 + k as u64);
        assert_eq!(rec["report"]["records"].as_array().unwrap().len(), 768);
    }
}

#[test]
fn mock_demo_table() {
    let out = sqkd(&["mock-demo", "--format", "csv"]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0],
        "trial,seed,protocol,attack,test_rate,z_ctrl_rate,x_ctrl_rate,eve_accuracy,aborted,abort_reason"
    );
    assert!(rows[1].starts_with("0,1,mock,cnot-probe,0,0,0,1,false,"));
    assert!(rows[2].starts_with("0,1,full,cnot-probe:mid,"));
    assert!(rows[3].starts_with("0,1,full,cnot-probe,"));
}

#[test]
fn verify_reports_verdicts() {
    let out = sqkd(&["verify", "--attack", "cnot-probe:mid"]);
    let text = stdout(&out);
    assert!(text.contains("x_ctrl=0.5"));
    assert!(text.contains("helstrom=1"));
    assert!(text.trim_end().ends_with("verdict: PASS"));

    let out = sqkd(&["verify", "--random-attacks", "12", "--seed", "3"]);
    assert!(stdout(&out).trim_end().ends_with("verdict: PASS (12/12 attacks)"));
}
