use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bnprune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnprune")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn gen_then_exact_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("bp.json");
    let out = bnprune(&["gen", "--family", "bloodpressure", "--out", net.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bnprune(&["exact", "--net", net.to_str().unwrap(), "--evidence", "Measurement=m_e"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "variable,state,probability");
    assert_eq!(rows.len(), 11);
    assert!(rows.contains(&"Measurement,m_e,1"));
}

#[test]
fn exact_on_two_node_net() {
    let out = bnprune(&["exact", "--family", "two-node"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "variable,state,probability\nA,0,0.5\nA,1,0.5\nB,0,0.5\nB,1,0.5\n");
}

#[test]
fn sample_writes_a_trace() {
    let out = bnprune(&["sample", "--family", "block-chain", "--n", "3", "--samples", "4", "--query", "X2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "method,run,t,query_var,value,estimate");
    assert_eq!(rows.len(), 5);
    assert!(rows[1..].iter().all(|r| r.starts_with("prune,0,") && r.contains(",X2,")));
}

#[test]
fn bench_writes_all_files_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = bnprune(&[
            "bench",
            "--family",
            "two-node",
            "--method",
            "prune",
            "--method",
            "gibbs",
            "--runs",
            "2",
            "--samples",
            "3",
            "--query",
            "A",
            "--seed",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let trace = lines(&a.path().join("trace.csv"));
    assert_eq!(trace[0], "method,run,t,query_var,value,estimate");
    assert_eq!(trace.len(), 13);
    assert_eq!(lines(&a.path().join("ahd.csv"))[0], "method,t,ahd");
    assert_eq!(lines(&a.path().join("sigma.csv"))[0], "method,t,sigma2");
    assert_eq!(
        lines(&a.path().join("roc.csv"))[0],
        "method,alpha,beta,delta,residual,t_target,wall_seconds"
    );
    for name in ["trace.csv", "ahd.csv", "sigma.csv"] {
        assert_eq!(lines(&a.path().join(name)), lines(&b.path().join(name)), "{name}");
    }
}

#[test]
fn roc_refits_a_sigma_file() {
    let dir = tempfile::tempdir().unwrap();
    let sigma = dir.path().join("sigma.csv");
    let mut text = String::from("method,t,sigma2\n");
    for t in 1..=5000 {
        let t = t as f64;
        let sd = 0.40 * (1.0 + 2.0 * t.powf(-0.9)) / t.sqrt();
        text.push_str(&format!("prune,{t},{}\n", sd * sd));
    }
    fs::write(&sigma, text).unwrap();
    let out = bnprune(&["roc", "--sigma", sigma.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let alpha: f64 = row[1].parse().unwrap();
    assert!((alpha - 0.40).abs() < 1e-6);
    assert_eq!(row[5], "1600");
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(bnprune(&["bench", "--family", "two-node"]).status.code(), Some(2));
    assert_eq!(
        bnprune(&["exact", "--family", "two-node", "--evidence", "Nope=1"]).status.code(),
        Some(2)
    );
    let out = bnprune(&["sample", "--family", "two-node", "--samples", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}

#[test]
fn capacity_errors_exit_with_three() {
    let out = bnprune(&[
        "sample",
        "--family",
        "grid",
        "--rows",
        "4",
        "--cols",
        "4",
        "--fraction",
        "0",
        "--samples",
        "2",
        "--cap",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn io_errors_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.bif");
    assert_eq!(bnprune(&["exact", "--net", missing.to_str().unwrap()]).status.code(), Some(4));
    let sigma = dir.path().join("none.csv");
    assert_eq!(bnprune(&["roc", "--sigma", sigma.to_str().unwrap()]).status.code(), Some(4));
}
