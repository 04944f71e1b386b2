use std::process::{Command, Output};

fn sqrtsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqrtsum"))
        .args(args)
        .env_remove("SQRTSUM_PARALLELISM")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_three_terms() {
    let o = sqrtsum(&["eval", "+3", "+20", "+23"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("nearest   11"), "{out}");
    assert!(out.contains("distance  1.82858811762279"), "{out}");
    assert!(out.contains("value     1.1000018"), "{out}");
}

#[test]
fn eval_exact_integer_and_negatives() {
    let o = sqrtsum(&["eval", "+4", "+9"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("EXACT INTEGER 5"));

    let o = sqrtsum(&["--format", "json", "eval", "29 1097 3153 -226 -2324 -987"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["nearest_integer"], "0");
    assert!(v["distance"].as_str().unwrap().starts_with("2.8446"));

    let o = sqrtsum(&["eval", "29", "1097", "3153", "-226", "-2324", "-987"]);
    assert!(o.status.success());
}

#[test]
fn parse_errors_exit_invalid() {
    let o = sqrtsum(&["eval", "3", "0", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sqrtsum(&["eval", "3", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column"));
    let o = sqrtsum(&["--precision", "16", "eval", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn decide_reports_integrality_and_sign() {
    let o = sqrtsum(&["decide", "2", "8", "-18"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("integer   yes (0)") && out.contains("sign      zero"), "{out}");
    let o = sqrtsum(&["decide", "10", "11", "-5", "-18"]);
    assert!(stdout(&o).contains("sign      positive"));
}

#[test]
fn search_output_is_independent_of_parallelism() {
    let base = ["search", "--method", "exhaustive", "--k", "3", "--n", "25", "--threshold", "1e-3"];
    let a = sqrtsum(&[&["--parallelism", "1"], &base[..], &["--shards", "1"]].concat());
    let b = sqrtsum(&[&["--parallelism", "3"], &base[..], &["--shards", "5"]].concat());
    let mut mitm = base.to_vec();
    mitm[2] = "mitm";
    let c = sqrtsum(&[&["--parallelism", "2"], &mitm[..]].concat());
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let a_out = stdout(&a);
    let lines: Vec<&str> = a_out.lines().collect();
    assert!(lines.iter().any(|l| l.contains("[\"3\",\"20\",\"23\"]")));
    for l in &lines {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["method"], "exhaustive");
        assert!(v["distance"].is_string() && v["k"].is_string());
    }
    let c_out = stdout(&c).replace("\"mitm\"", "\"exhaustive\"");
    assert_eq!(c_out, stdout(&a));
}

#[test]
fn search_families_and_progress() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k2.jsonl");
    let o = sqrtsum(&["search", "--method", "family-k2", "--n", "10", "-o", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.lines().last().unwrap().contains("[\"99\",\"101\"]"));

    let progress = dir.path().join("p.json");
    let args = ["search", "--k", "2", "--n", "60", "--threshold", "1e-3", "--shards", "3", "--progress"];
    let first = sqrtsum(&[&args[..], &[progress.to_str().unwrap()]].concat());
    assert!(first.status.success() && progress.exists());
    let second = sqrtsum(&[&args[..], &[progress.to_str().unwrap()]].concat());
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn expsum_csv() {
    let o = sqrtsum(&["expsum", "--ell-grid", "0,1,10", "--n", "100"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "ell,n,re,im,abs,err_radius,vdc_shape,eph_shape");
    assert!(lines.next().unwrap().starts_with("0,100,1e2,0e0,1e2,0e0"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn count_identity_holds() {
    let o = sqrtsum(&["count", "--k", "1", "--n", "100", "--s", "50", "--L", "100000"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("identity           holds"));
}

#[test]
fn gaps_json_and_csv() {
    let o = sqrtsum(&["--format", "json", "gaps", "--k", "1", "--n", "4"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["point_count"], 3);
    let o = sqrtsum(&["--format", "csv", "gaps", "--k", "2", "--n", "30"]);
    assert!(stdout(&o).starts_with("lower,upper,count\n"));
    let o = sqrtsum(&["gaps", "--k", "4", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_known_passes() {
    let o = sqrtsum(&["verify-known"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(!out.contains("FAIL"));
    assert_eq!(out.matches("PASS").count(), 10);
}

#[test]
fn parallelism_env_and_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_sqrtsum"))
        .args(["--parallelism", "2", "gaps", "--k", "1", "--n", "9"])
        .env("SQRTSUM_PARALLELISM", "4")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_sqrtsum"))
        .args(["gaps", "--k", "1", "--n", "9"])
        .env("SQRTSUM_PARALLELISM", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
