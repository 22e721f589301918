// Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use flucid::ast::Expr;
use flucid::parser::parse_source;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn case_path(name: &str) -> PathBuf {
    repo_root().join("cases").join(name)
}

pub fn read_case(name: &str) -> String {
    std::fs::read_to_string(case_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn parse_case(name: &str) -> Expr {
    parse_source(&read_case(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every `.fl` file in the corpus, sorted.
pub fn corpus() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(repo_root().join("cases"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".fl"))
        .collect();
    names.sort();
    names
}

pub const SLOTS: [&str; 5] = ["empty", "A", "B", "A_deleted", "B_deleted"];
pub const EVENTS: [&str; 3] = ["add_A", "add_B", "take"];

fn free(slot: &str) -> bool {
    matches!(slot, "empty" | "A_deleted" | "B_deleted")
}

/// The manufacturer's rules, transcribed on plain strings.
pub fn ref_psi(event: &str, d1: &str, d2: &str) -> (String, String) {
    let (a, b) = (d1.to_owned(), d2.to_owned());
    match event {
        "add_A" | "add_B" => {
            let job = &event[4..];
            if d1 == job || d2 == job {
                (a, b)
            } else if free(d1) {
                (job.to_owned(), b)
            } else if free(d2) {
                (a, job.to_owned())
            } else {
                (a, b)
            }
        }
        "take" => {
            if d1 == "A" || d1 == "B" {
                (format!("{d1}_deleted"), b)
            } else if d2 == "A" || d2 == "B" {
                (a, format!("{d2}_deleted"))
            } else {
                (a, b)
            }
        }
        _ => panic!("unknown event {event}"),
    }
}

pub fn ref_states() -> Vec<(String, String)> {
    SLOTS
        .iter()
        .flat_map(|a| SLOTS.iter().map(move |b| (a.to_string(), b.to_string())))
        .collect()
}

/// Every (event, predecessor) that `ref_psi` maps onto `target`.
pub fn ref_preimage(target: &(String, String)) -> Vec<(String, (String, String))> {
    let mut out = Vec::new();
    for s in ref_states() {
        for e in EVENTS {
            if ref_psi(e, &s.0, &s.1) == *target {
                out.push((e.to_owned(), s.clone()));
            }
        }
    }
    out.sort();
    out
}

/// Breadth-first sweep from `from` under `ref_psi`.
pub fn ref_reachable(from: (&str, &str)) -> std::collections::BTreeSet<(String, String)> {
    let start = (from.0.to_owned(), from.1.to_owned());
    let mut seen = std::collections::BTreeSet::from([start.clone()]);
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some((a, b)) = queue.pop_front() {
        for e in EVENTS {
            let next = ref_psi(e, &a, &b);
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Every duration vector for `(min, opt)` pairs, first observation slowest.
pub fn duration_vectors(bounds: &[(u64, u64)]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &(min, opt) in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u64>| {
                (min..=min + opt).map(move |t| {
                    let mut v = prefix.clone();
                    v.push(t);
                    v
                })
            })
            .collect();
    }
    out
}
