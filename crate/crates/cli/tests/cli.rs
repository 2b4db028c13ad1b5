use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d4trees"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    v
}

#[test]
fn trees_count() {
    let v = json(&["trees", "1,2,3"]);
    assert_eq!(v["result"]["count"], "2");
    assert_eq!(v["result"]["trees"].as_array().unwrap().len(), 2);
    assert!(stdout(&run(&["trees", "1,2,3"])).contains("trees 2"));
}

#[test]
fn invariants_support() {
    let v = json(&["invariants", "--type", "1,1,1,9,17"]);
    let odd: Vec<u64> = v["result"]["odd_prime_support"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(odd, vec![3, 5, 7, 11, 13, 17, 19, 29]);
}

#[test]
fn invariants_at_prime() {
    let v = json(&["invariants", "--type", "1,1,1,2,72", "--p", "7"]);
    let at = &v["result"]["at_p"];
    assert_eq!(at["class"], "REGULAR_AT_INFINITY");
    assert_eq!(at["ramification_bound"]["lower"], 4);
    assert_eq!(at["ramification_bound"]["upper"], 4);
}

#[test]
fn quartic_family() {
    let v = json(&["family", "ones-ab", "--n", "5", "--a", "9", "--b", "17"]);
    let h: Vec<&str> = v["result"]["h"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(h, vec!["4845", "8721", "6885", "2805", "495"]);
    assert_eq!(
        v["result"]["disc_factorization"],
        "3^10 * 5^2 * 7^2 * 11 * 17^3 * 19 * 29^3"
    );
}

#[test]
fn solve_and_lift() {
    let v = json(&["solve", "--type", "1,2", "--p", "5"]);
    assert_eq!(v["result"]["models"].as_array().unwrap().len(), 2);
    assert_eq!(v["result"]["complete"], true);
    let v = json(&["lift", "--type", "1,2", "--p", "5", "--precision", "2"]);
    let lifts = v["result"]["lifts"].as_array().unwrap();
    assert!(lifts.iter().all(|l| l["reduction_matches"] == true));
    // -1/2 = 12 mod 25 appears as the non-fixed root of one model
    let text = stdout(&run(&[
        "lift",
        "--type",
        "1,2",
        "--p",
        "5",
        "--precision",
        "2",
    ]));
    assert!(text.contains("x=12 (mod 5^2)"));
}

#[test]
fn correspondence_checks_pass() {
    for (t, p, slot, locus) in [("1,2,5", "5", "3", "zero"), ("1,2,4", "7", "1", "infinity")] {
        let v = json(&[
            "correspondence",
            "--type",
            t,
            "--p",
            p,
            "--slot",
            slot,
            "--locus",
            locus,
            "--precision",
            "3",
        ]);
        assert_eq!(v["result"]["all_checks"], true);
        assert!(!v["result"]["models"].as_array().unwrap().is_empty());
    }
}

#[test]
fn census_runs() {
    let v = json(&[
        "census", "--family", "ones-ab", "--nmax", "4", "--bmax", "5",
    ]);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 2 * 6);
}

#[test]
fn output_is_deterministic() {
    let args = [
        "--format",
        "json",
        "solve",
        "--type",
        "1,1,1,9,17",
        "--p",
        "2",
        "--threads",
        "3",
    ];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn unsorted_type_warns() {
    let o = run(&["trees", "3,1,2"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(stdout(&o), stdout(&run(&["trees", "1,2,3"])));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["trees", "1,x"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let o = run(&["--format", "json", "solve", "--type", "1,2,6", "--p", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["error"]["tag"], "WILD_PRIME");
    let o = run(&[
        "correspondence",
        "--type",
        "1,2,6",
        "--p",
        "5",
        "--slot",
        "3",
        "--locus",
        "zero",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_REGULAR"));
}
