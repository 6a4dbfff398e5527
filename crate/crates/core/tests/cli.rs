use std::path::Path;
use std::process::{Command, Output};

fn slc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slc")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_run_writes_report_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("conn.csv");
    let report = dir.path().join("report.json");
    let out = slc(&["gen-hardness", "--kind", "connectivity", "--n", "40", "--metric", "l2", "--out", path(&points)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = slc(&[
        "run", "--input", path(&points), "--k", "1,2,3", "--timing-runs", "1", "--out", path(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["n"], 40);
    let per_k = json["per_k"].as_array().unwrap();
    assert_eq!(per_k.len(), 3);
    assert!(per_k[0]["approx_objective"].is_null());
    // Connected source graph: adjacent edge vectors sit at distance √2.
    assert!((per_k[1]["oracle_objective"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-9);
    assert_eq!(json["edges"]["within_bound"], true);

    let curve = std::fs::read_to_string(dir.path().join("report.curve.csv")).unwrap();
    assert_eq!(curve.lines().next(), Some("k,approx_objective,oracle_objective,ratio"));
    assert_eq!(curve.lines().count(), 4);
}

#[test]
fn verify_and_trace_dump() {
    let dir = tempfile::tempdir().unwrap();
    let points = dir.path().join("pts.csv");
    let rows: String = (0..200)
        .map(|i| format!("{},{},{}\n", (i * 37 % 101) as f64 / 7.0, (i * 11 % 53) as f64, i % 5))
        .collect();
    std::fs::write(&points, rows).unwrap();

    for metric in ["l1", "l2", "linf"] {
        let out = slc(&["verify", "--input", path(&points), "--metric", metric, "--eta", "0.5"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).starts_with("edges=199 lower_violations=0 upper_violations=0"));
    }

    let out = slc(&["trace-dump", "--input", path(&points), "--seed", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for (i, line) in text.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["round"], i);
        assert!(v["max_words"].as_u64().unwrap() > 0);
    }
    assert!(text.lines().count() > 2);
}

#[test]
fn hamming_instances_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let mut objectives = Vec::new();
    for disconnected in [false, true] {
        let points = dir.path().join(format!("h{disconnected}.csv"));
        let mut args = vec!["gen-hardness", "--kind", "hamming", "--n", "30", "--out", path(&points)];
        if disconnected {
            args.push("--disconnected");
        }
        assert!(slc(&args).status.success());
        let out = slc(&["run", "--input", path(&points), "--metric", "l0", "--k", "2", "--timing-runs", "1"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        objectives.push(json["per_k"][0]["approx_objective"].as_f64().unwrap());
    }
    assert_eq!(objectives, vec![1.0, 2.0]);
}

#[test]
fn sparse_and_projected_output() {
    let out = slc(&["gen-hardness", "--kind", "cycle", "--n", "8", "--format", "sparse"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().next().unwrap().starts_with("8;"));

    let out = slc(&["gen-hardness", "--kind", "cycle", "--n", "16", "--jl-eps", "0.5", "--seed", "2"]);
    assert!(out.status.success());
    let first = stdout(&out).lines().next().unwrap().to_string();
    // ⌈8 ln 16 / 0.25⌉ = 89 columns.
    assert_eq!(first.split(',').count(), 89);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,x\n").unwrap();
    let out = slc(&["run", "--input", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let good = dir.path().join("good.csv");
    std::fs::write(&good, (0..50).map(|i| format!("{i},{}\n", i * i)).collect::<String>()).unwrap();
    let out = slc(&["trace-dump", "--input", path(&good), "--space-s", "20"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = slc(&["run", "--input", path(&good), "--k", "51"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!slc(&["gen-hardness", "--kind", "twocycles", "--n", "7"]).status.success());
}
