use std::path::Path;
use std::process::{Command, Output};

fn iwasawa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwasawa")).args(args).env_remove("IWASAWA_PRECISION").env_remove("IWASAWA_TRUNC").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

// Lambda_1 = Z_5[[t]] / (5 - t), given as a 1x1 presentation
const PRINCIPAL: &str = r#"{
  "profile": {"p": 5, "N": 6, "d": 1, "M": 8},
  "ncols": 1,
  "rows": [[{"terms": [[[0], "5"], [[1], "15624"]]}]]
}"#;

#[test]
fn verify_small_run_passes() {
    let o = iwasawa(&["verify", "--count", "2", "--criteria", "1,5,9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().starts_with("summary "));
    assert!(out.contains("failed=0"));
}

#[test]
fn corrupted_oracle_exits_one() {
    let o = iwasawa(&["verify", "--count", "1", "--criteria", "1,9", "--corrupt-oracle"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("status=FAIL"));
}

#[test]
fn zero_count_gives_empty_report() {
    let o = iwasawa(&["verify", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "summary total=0 failed=0 precision=0");
}

#[test]
fn verify_is_deterministic() {
    let a = iwasawa(&["verify", "--count", "3", "--criteria", "1,4,8", "--seed", "7"]);
    let b = iwasawa(&["verify", "--count", "3", "--criteria", "1,4,8", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_q_is_a_usage_error() {
    let o = iwasawa(&["stickelberger", "--max-degree", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_coefficient_is_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let bad = PRINCIPAL.replace("15624", "15625");
    let path = write(dir.path(), "bad.json", &bad);
    let o = iwasawa(&["charel", "--module", &path]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn charel_and_euler_on_principal_module() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "m.json", PRINCIPAL);
    let o = iwasawa(&["charel", "--module", &path]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("mu=0"), "{out}");
    assert!(out.contains("lambda=1"), "{out}");

    // a cyclic module Z_5[[t]]/(5 - t) is Z_5 with trivial homology beyond H_0 = Z/5
    let o = iwasawa(&["euler", "--presentation", &path]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chi=5^1"), "{}", stdout(&o));
}

#[test]
fn lfunction_output_feeds_cross_check() {
    let dir = tempfile::tempdir().unwrap();
    let l = dir.path().join("L.json");
    let o = iwasawa(&[
        "lfunction", "--q", "5", "--max-degree", "3", "--exclude", "inf", "--trace", "-3", "--precision", "4",
        "--trunc", "4", "--output", l.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("prediction="));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&l).unwrap()).unwrap();
    assert_eq!(doc["profile"]["p"], 5);
}

#[test]
fn env_precision_default_applies() {
    let o = Command::new(env!("CARGO_BIN_EXE_iwasawa"))
        .args(["stickelberger", "--q", "3", "--max-degree", "2"])
        .env("IWASAWA_PRECISION", "3")
        .env("IWASAWA_TRUNC", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[mod 3^3]"), "{}", stdout(&o));
}
