use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lipwidth_core::experiment::{canonicalize, RunReport};

fn lipwidth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipwidth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn audit_all_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = lipwidth(&[
            "audit-all",
            "--seed",
            "7",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let ra = fs::read_to_string(a.path().join("report.json")).unwrap();
    let rb = fs::read_to_string(b.path().join("report.json")).unwrap();
    assert_eq!(canonicalize(&ra).unwrap(), canonicalize(&rb).unwrap());
    assert!(ra.contains("wall_clock_seconds"));
}

#[test]
fn empty_config_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let p = write(d.path(), "empty.json", "");
    let out = lipwidth(&["run", "--config", &p]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty config"));
}

#[test]
fn unknown_field_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let p = write(
        d.path(),
        "c.json",
        r#"{"command":"audit-all","extra":true}"#,
    );
    assert_eq!(lipwidth(&["run", "--config", &p]).status.code(), Some(1));
    assert_eq!(lipwidth(&["entropy"]).status.code(), Some(1));
    assert_eq!(
        lipwidth(&["case-study", "run", "nope"]).status.code(),
        Some(1)
    );
    assert_eq!(lipwidth(&["no-such-command"]).status.code(), Some(1));
}

#[test]
fn command_must_match_config() {
    let d = tempfile::tempdir().unwrap();
    let p = write(d.path(), "c.json", r#"{"command":"audit-all"}"#);
    assert_eq!(
        lipwidth(&["entropy", "--config", &p]).status.code(),
        Some(1)
    );
}

#[test]
fn separation_case_study() {
    let out = lipwidth(&[
        "case-study",
        "run",
        "separation",
        "--n",
        "6",
        "--gamma",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let upper = report
        .certificates
        .iter()
        .find(|c| c.label.ends_with("upper"))
        .unwrap()
        .certificate
        .value;
    let expect = 1.0 / (6.0 * 7f64.log2());
    assert!((upper - expect).abs() <= 1e-6 * expect);
    let row = report
        .table
        .rows
        .iter()
        .find(|r| r[0] == "separation entropy")
        .unwrap();
    assert_eq!(row[5].parse::<f64>().unwrap(), 1.0 / 6.0);
}

#[test]
fn entropy_on_set_file_writes_csv() {
    let d = tempfile::tempdir().unwrap();
    let set = write(
        d.path(),
        "set.json",
        r#"{"space":{"dim":1,"norm":{"kind":"l1"}},"points":[[0],[1],[3],[7]]}"#,
    );
    let cfg = write(
        d.path(),
        "c.json",
        &format!(
            r#"{{"command":"entropy","target":{{"set_file":{set:?}}},"params":{{"n":[1,2]}}}}"#
        ),
    );
    let out_dir = d.path().join("out");
    let out = lipwidth(&[
        "entropy",
        "--config",
        &cfg,
        "--format",
        "both",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("section,label,n,lower,upper,reference\n"));
    let report =
        RunReport::from_json(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    // Two centers among {0, 1, 3, 7}: {1, 7} or {3, 7} leave radius 2.
    assert_eq!(report.entropy[0].estimate.upper, 2.0);
    assert_eq!(report.entropy[1].estimate.upper, 0.0);
}

#[test]
fn numeric_failure_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"command":"width-upper",
            "target":{"set":{"space":{"dim":1,"norm":{"kind":"l2"}},"points":[[0],[1]]}},
            "params":{"n":5,"k":5}}"#,
    );
    let out = lipwidth(&["width-upper", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.failures.len(), 1);
}

#[test]
fn relu_verify_with_witnesses() {
    let out = lipwidth(&[
        "relu", "verify", "--d", "1", "--width", "2", "--depth", "2", "--trials", "300", "--seed",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn kolmogorov_with_verified_witnesses() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "c.json",
        r#"{"command":"kolmogorov","target":{"diagonal":{"truncation":12}},"params":{"n":[2,4]}}"#,
    );
    let out = lipwidth(&["kolmogorov", "--config", &cfg, "--verify-witness"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.certificates.len(), 4);
    assert!(report
        .certificates
        .iter()
        .all(|c| c.witness_verified == Some(true)));
}
