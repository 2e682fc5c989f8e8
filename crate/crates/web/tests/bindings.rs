use serde_json::Value;

use iwasawa_web::{euler_formula, stickelberger, weierstrass};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn weierstrass_of_p_minus_t() {
    let doc = r#"{"profile": {"p": 5, "N": 6, "d": 1, "M": 8}, "terms": [[[0], "5"], [[1], "15624"]]}"#;
    let v = parse(&weierstrass(doc));
    assert_eq!(v["mu"], 0);
    assert_eq!(v["lambda"], 1);
}

#[test]
fn errors_are_reported_as_json() {
    let v = parse(&weierstrass("not json"));
    assert!(v["error"].as_str().unwrap().contains("parse"));
    let v = parse(&stickelberger(6, 2, "", -3, 4, 4));
    assert!(v.get("error").is_some());
}

#[test]
fn stickelberger_matches_cli_values() {
    let v = parse(&stickelberger(5, 3, "inf", -3, 4, 4));
    assert_eq!(v["theta_plus"], "-184 + -290*t1 + -235*t1^2 + -115*t1^3 [mod 5^4]");
    assert_eq!(v["prediction"], "5^0");
}

#[test]
fn euler_formula_on_golden() {
    let doc = parse(include_str!("../../core/tests/golden/01_trivial_general.json"));
    let v = parse(&euler_formula(&doc["datum"].to_string(), ""));
    assert_eq!(v["value"].as_str().unwrap(), "1");
    assert!(!v["trace"].as_array().unwrap().is_empty(), "{v}");
}
