use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn ssm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn stable_prints_the_outcome_distribution() {
    let o = ssm(&["stable", "--instance", &fixture("egal_sincere1.txt"), "--mechanism", "gs-man"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1\tm1:w1,m2:w2,m3:w3,m4:w4\n");

    let o = ssm(&["--json", "stable", "--instance", &fixture("egal_sincere1.txt"), "--mechanism", "uniform"]);
    let v = json(&o);
    assert_eq!(v["mechanism"], "uniform");
    let rows = v["outcome"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "1/3"));
}

#[test]
fn enumerate_lists_stable_matchings() {
    let o = ssm(&["--json", "enumerate", "--instance", &fixture("egal_sincere1.txt")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["stable"].as_array().unwrap().len(), 3);
}

#[test]
fn college_mode() {
    let o =
        ssm(&["stable", "--many-to-one", "--instance", &fixture("college_sincere.txt"), "--mechanism", "student-da"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1\tc1:"));
    let o = ssm(&[
        "eq",
        "check",
        "--many-to-one",
        "--sincere",
        &fixture("college_sincere.txt"),
        "--putative",
        &fixture("college_sincere.txt"),
        "--mechanism",
        "student-da",
        "--notions",
        "nash",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("c1 deviates to s1 s2 s4 @ s3"), "{}", stdout(&o));
    let o = ssm(&[
        "eq",
        "check",
        "--many-to-one",
        "--sincere",
        &fixture("college_sincere.txt"),
        "--putative",
        &fixture("college_sincere.txt"),
        "--notions",
        "mindis",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_exit_code_follows_the_notions() {
    let base = [
        "eq",
        "check",
        "--sincere",
        &fixture("egal_sincere1.txt"),
        "--putative",
        &fixture("egal_putative1.txt"),
        "--mechanism",
        "uniform-egal",
    ];
    let mut nash = base.to_vec();
    nash.extend(["--notions", "nash"]);
    assert_eq!(ssm(&nash).status.code(), Some(0));
    let mut mindis = base.to_vec();
    mindis.extend(["--notions", "nash,mindis", "--json"]);
    let o = ssm(&mindis);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o).is_object());
}

#[test]
fn find_writes_a_trace() {
    let dir = std::env::temp_dir().join(format!("ssm-cli-trace-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.json");
    let o = ssm(&[
        "eq",
        "find",
        "--sincere",
        &fixture("egal_sincere1.txt"),
        "--mechanism",
        "uniform",
        "--target",
        "m1:w2,m2:w3,m3:w1,m4:w4",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("m3: w3 w1 w4 @ w2"));
    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(!t["steps"].as_array().unwrap().is_empty());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn eq_enumerate_reports_completeness() {
    let base = ["--json", "eq", "enumerate", "--sincere", &fixture("no_eq_sincere.txt"), "--mechanism", "gs-man"];
    let o = ssm(&base);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["complete"], true);
}

#[test]
fn props_exit_codes() {
    let o = ssm(&["props", "--mechanism", "uniform", "--property", "ins", "--exhaustive", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ssm(&[
        "--seed",
        "7",
        "props",
        "--mechanism",
        "flip-double",
        "--property",
        "monotonic",
        "--policy",
        "uniform",
        "--trials",
        "1000",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated"));
}

#[test]
fn repro_and_sweep() {
    let o = ssm(&["repro", "truncated-distance"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ssm(&["--json", "repro", "--all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o).as_array().unwrap().len(), 8);
    let o = ssm(&["--json", "sweep", "--kind", "stable-targets", "--n", "3", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["kind"], "sweep");
    assert_eq!(v["case"], "stable-targets");
    assert_eq!(v["trials"], 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(ssm(&["frob"]).status.code(), Some(2));
    assert_eq!(ssm(&["repro", "nope"]).status.code(), Some(2));
    assert_eq!(
        ssm(&["stable", "--instance", &fixture("egal_sincere1.txt"), "--mechanism", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(ssm(&["stable", "--instance", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(ssm(&["--max-n", "3", "enumerate", "--instance", &fixture("egal_sincere1.txt")]).status.code(), Some(2));
    assert_eq!(ssm(&["sweep", "--kind", "nope"]).status.code(), Some(2));
    assert_eq!(ssm(&["--help"]).status.code(), Some(0));
}
