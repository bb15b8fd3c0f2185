use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_focalforge")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn verify_algebra_passes() {
    let o = run(&["verify-algebra"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["verify-algebra", "--pairs", "10000"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn corrupted_table_fails_with_counterexample() {
    let o = run(&["verify-algebra", "--corrupt-table", "--pairs", "50"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fails at x ="), "{err}");
}

#[test]
fn audit_eigensphere_family_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["audit", "--family", "3,2", "--side", "plus", "--samples", "4", "--out", out, "--dump-matrices"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 0xF0CA1);
    let rows = report["rows"].as_array().unwrap();
    let ca = rows.iter().find(|r| r["locus"] == "C_A").unwrap();
    assert_eq!(ca["verdict"], "pass");
    assert!((ca["values"]["rho_max"].as_f64().unwrap() - 384.0).abs() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "family,side,locus,claim,verdict,max_residual,n_samples");
    assert!(dir.path().join("matrices.json").exists());
}

#[test]
fn audit_indefinite_and_definite_m8() {
    let o = run(&["audit", "--family", "8,2,indefinite", "--side", "minus", "--samples", "3"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.starts_with("pass") && l.contains("C_A") && l.contains("S^15")), "{out}");
    let o = run(&["audit", "--family", "4,2,definite", "--side", "plus", "--samples", "3"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["audit", "--family", "3,1", "--side", "plus"])), 2);
    assert_eq!(code(&run(&["audit", "--family", "12,1", "--side", "plus"])), 2);
    assert_eq!(code(&run(&["audit", "--family", "3,2", "--side", "sideways"])), 2);
    assert_eq!(code(&run(&["isofun", "--levels", "1.5"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = run(&["report", "--input", empty.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn isofun_variants() {
    let o = run(&["isofun", "--samples", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["isofun", "--variant", "definite", "--levels", "0", "--samples", "4"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("austerity level 0"));
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn pipeline_is_deterministic_and_report_merges() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (d, threads) in [(&a, "1"), (&b, "4")] {
        let o = Command::new(env!("CARGO_BIN_EXE_focalforge"))
            .env("FOCALFORGE_THREADS", threads)
            .args(["pipeline", "--samples", "4", "--out", d.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    for t in ["table1.csv", "table2.csv"] {
        assert_eq!(read(&a.join(t)), read(&b.join(t)), "{t} differs between runs");
    }
    let merged = dir.path().join("merged");
    let o = run(&["report", "--input", a.join("reports").to_str().unwrap(), "--out", merged.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&merged.join("table1.csv")), read(&a.join("table1.csv")));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert!(report["version"].is_string());
    assert!(report["rows"].as_array().unwrap().iter().all(|r| r["verdict"] == "pass"));
}
