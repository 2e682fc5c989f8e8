//! One pass/fail line per acceptance criterion, on the shipped seed.
//!
//! Run with `cargo test -p iwasawa-core --test acceptance -- --nocapture` to see
//! the lines.

use std::time::{Duration, Instant};

use iwasawa_core::verify::{run_criterion, Counts, Record, Status, DEFAULT_SEED, GOLDEN};

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    /// Minimum number of instances the criterion asks for.
    minimum: usize,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, name: "weierstrass roundtrip", limit: Some(Duration::from_secs(10)), minimum: 1000 },
    Criterion { id: 2, name: "invariants/coinvariants identity", limit: Some(Duration::from_secs(60)), minimum: 100 },
    Criterion { id: 3, name: "akashi series vs projected ch", limit: Some(Duration::from_secs(300)), minimum: 125 },
    Criterion { id: 4, name: "euler characteristic bridge", limit: Some(Duration::from_secs(120)), minimum: 100 },
    Criterion { id: 5, name: "stickelberger closed form", limit: Some(Duration::from_secs(30)), minimum: 3 },
    Criterion { id: 6, name: "projection compatibility", limit: Some(Duration::from_secs(30)), minimum: 10 },
    Criterion { id: 7, name: "determinant vs eigenvalue", limit: None, minimum: 1 },
    Criterion { id: 8, name: "L symmetry and parity", limit: None, minimum: 20 },
    Criterion { id: 9, name: "theorem evaluator goldens", limit: Some(Duration::from_secs(1)), minimum: 12 },
    Criterion { id: 10, name: "principal module loop", limit: Some(Duration::from_secs(120)), minimum: 10 },
    Criterion { id: 11, name: "precision stability", limit: None, minimum: 245 },
];

fn summarize(c: &Criterion, records: &[Record], elapsed: Duration) -> (bool, String) {
    let passed = records.iter().filter(|r| r.status == Status::Pass).count();
    let precision = records.iter().filter(|r| matches!(r.status, Status::Precision(_))).count();
    let in_time = c.limit.map_or(true, |l| elapsed <= l);
    let ok = passed == records.len() && records.len() >= c.minimum && in_time;
    let limit = c.limit.map_or("none".to_string(), |l| format!("{}s", l.as_secs()));
    let line = format!(
        "criterion {:>2} {:<34} {} {}/{} instances, {} precision, {:.2}s (limit {})",
        c.id,
        c.name,
        if ok { "PASS" } else { "FAIL" },
        passed,
        records.len(),
        precision,
        elapsed.as_secs_f64(),
        limit
    );
    (ok, line)
}

#[test]
fn acceptance() {
    let counts = Counts::default();
    let mut all_ok = true;
    for c in CRITERIA {
        let start = Instant::now();
        let records = run_criterion(c.id, DEFAULT_SEED, &counts, false);
        let (ok, line) = summarize(c, &records, start.elapsed());
        println!("{line}");
        for r in records.iter().filter(|r| r.status != Status::Pass) {
            println!("    {r}");
        }
        all_ok &= ok;
    }
    assert!(all_ok, "at least one acceptance criterion failed");
}

#[test]
fn golden_directory_matches_embedded_suite() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().trim_end_matches(".json").to_string())
        .collect();
    names.sort();
    let embedded: Vec<String> = GOLDEN.iter().map(|(n, _)| n.to_string()).collect();
    assert_eq!(names, embedded);
    assert!(names.len() >= 12);
}

#[test]
fn corrupted_oracle_fails_every_checked_criterion() {
    let counts = Counts::uniform(1);
    for id in 1..=11 {
        let records = run_criterion(id, DEFAULT_SEED, &counts, true);
        assert!(records.iter().any(|r| r.status != Status::Pass), "criterion {id} ignored the corrupted oracle");
    }
}
