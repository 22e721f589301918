mod common;

use std::collections::BTreeSet;

use common::*;
use flucid::eval::Evaluator;
use flucid::evidence::{EvidentialStatement, Observation, ObservationSequence, Opt, Property};
use flucid::reconstruction::{
    check_claim, explain, inv_psi, oracle_enumerate, psi, reachable, satisfies, ClaimConfig,
    EventLabel, PrinterModel, PrinterRun, PrinterState, TransitionSystem,
};
use flucid::{Context, Value};
use proptest::prelude::*;

fn st(s: &str) -> PrinterState {
    s.parse().unwrap()
}

fn pair(s: PrinterState) -> (String, String) {
    (s.d1.to_string(), s.d2.to_string())
}

fn statement(case: &str) -> EvidentialStatement {
    let p = parse_case(case);
    match Evaluator::new(&p).eval_name("es", &Context::new()).unwrap() {
        Value::Evidence(es) => (*es).clone(),
        other => panic!("{case}: es is {other:?}"),
    }
}

/// Explanations by brute force: every forward run from every state,
/// filtered by the statement.
fn brute_explanations(es: &EvidentialStatement, cfg: &ClaimConfig) -> Vec<PrinterRun> {
    let mut runs: Vec<PrinterRun> = PrinterState::all()
        .iter()
        .flat_map(|s| oracle_enumerate(&PrinterModel, s, |_| true, cfg.max_len))
        .filter(|r| cfg.include_noops || !r.has_noop())
        .filter(|r| {
            es.sequences
                .iter()
                .all(|os| satisfies(&PrinterModel, r, os, cfg.max_len as u64))
        })
        .collect();
    runs.sort_by_key(|r| {
        (
            r.len(),
            r.events().copied().collect::<Vec<_>>(),
            r.initial,
            r.steps.iter().map(|s| s.state).collect::<Vec<_>>(),
        )
    });
    runs
}

#[test]
fn psi_follows_the_rules() {
    for s in PrinterState::all() {
        for c in EventLabel::ALL {
            let (a, b) = pair(s);
            assert_eq!(pair(psi(c, s)), ref_psi(c.label(), &a, &b), "{c} on {s}");
        }
    }
}

#[test]
fn inverse_is_sound_and_complete() {
    let mut violations = Vec::new();
    for s in PrinterState::all() {
        let got: Vec<(String, (String, String))> = inv_psi(s)
            .into_iter()
            .map(|(c, pred)| (c.label().to_owned(), pair(pred)))
            .collect();
        let mut sorted = got.clone();
        sorted.sort();
        if sorted != ref_preimage(&pair(s)) {
            violations.push(s);
        }
        assert_eq!(sorted.len(), got.len(), "duplicates in inv_psi({s})");
    }
    assert!(violations.is_empty(), "inv_psi differs at {violations:?}");
}

/// The printer without its hand-written inverse.
struct Mechanical;

impl TransitionSystem for Mechanical {
    type State = PrinterState;
    type Event = EventLabel;
    fn states(&self) -> Vec<PrinterState> {
        PrinterState::all()
    }
    fn events(&self) -> Vec<EventLabel> {
        EventLabel::ALL.to_vec()
    }
    fn step(&self, e: &EventLabel, s: &PrinterState) -> PrinterState {
        psi(*e, *s)
    }
    fn state_has(&self, atom: &str, s: &PrinterState) -> bool {
        PrinterModel.state_has(atom, s)
    }
}

#[test]
fn generic_preimage_agrees_with_printer_inverse() {
    for s in PrinterState::all() {
        let mut hand = inv_psi(s);
        hand.sort();
        assert_eq!(Mechanical.preimage(&s), hand);
    }
    let es = statement("printer_evidence_only.fl");
    let cfg = ClaimConfig {
        max_len: 7,
        include_noops: false,
    };
    assert_eq!(
        explain(&Mechanical, &es, &cfg).unwrap().runs,
        explain(&PrinterModel, &es, &cfg).unwrap().runs
    );
}

#[test]
fn double_jobs_are_unreachable() {
    let want = ref_reachable(("empty", "empty"));
    let got: BTreeSet<_> = reachable(&PrinterModel, &PrinterState::EMPTY)
        .into_iter()
        .map(pair)
        .collect();
    assert_eq!(got, want);
    for s in ["A,A", "B,B"] {
        assert!(!got.contains(&pair(st(s))), "{s} reachable");
    }
}

#[test]
fn alice_claim_has_no_explanation() {
    let es = statement("printer_alice.fl");
    for max_len in [6, 8, 10] {
        let cfg = ClaimConfig {
            max_len,
            include_noops: true,
        };
        assert!(explain(&PrinterModel, &es, &cfg).unwrap().runs.is_empty());
    }
    let cfg = ClaimConfig {
        max_len: 8,
        include_noops: true,
    };
    assert!(brute_explanations(&es, &cfg).is_empty());
    assert!(!check_claim(&es, &ClaimConfig::default()).unwrap().verdict);
}

#[test]
fn evidence_only_matches_brute_force() {
    let es = statement("printer_evidence_only.fl");
    for include_noops in [false, true] {
        let cfg = ClaimConfig {
            max_len: 8,
            include_noops,
        };
        let got = explain(&PrinterModel, &es, &cfg).unwrap().runs;
        assert_eq!(got, brute_explanations(&es, &cfg), "noops: {include_noops}");
        let shortest = &got[0];
        assert_eq!(shortest.len(), 6);
        assert_eq!(
            shortest.events().take(2).copied().collect::<Vec<_>>(),
            [EventLabel::AddA, EventLabel::AddB]
        );
        assert_eq!(shortest.initial, PrinterState::EMPTY);
        assert_eq!(*shortest.final_state(), st("B_deleted,B_deleted"));
        assert!(got.iter().all(|r| r.is_consistent(&PrinterModel)));
    }
}

#[test]
fn explanations_grow_with_budget() {
    let es = statement("printer_evidence_only.fl");
    let mut previous: BTreeSet<Vec<EventLabel>> = BTreeSet::new();
    for max_len in 1..=9 {
        let cfg = ClaimConfig {
            max_len,
            include_noops: false,
        };
        let now: BTreeSet<Vec<EventLabel>> = explain(&PrinterModel, &es, &cfg)
            .unwrap()
            .runs
            .iter()
            .map(|r| r.events().copied().collect())
            .collect();
        assert!(previous.is_subset(&now), "max_len {max_len}");
        previous = now;
    }
}

#[test]
fn dropping_a_sequence_never_loses_explanations() {
    let full = statement("printer_alice.fl");
    let cfg = ClaimConfig {
        max_len: 8,
        include_noops: false,
    };
    let with_alice = explain(&PrinterModel, &full, &cfg).unwrap().runs;
    let without = explain(&PrinterModel, &full.without("alice"), &cfg).unwrap().runs;
    assert!(with_alice.iter().all(|r| without.contains(r)));
    assert!(!without.is_empty());
}

#[test]
fn zero_budget_claim() {
    let es = EvidentialStatement::new(
        "es",
        vec![ObservationSequence::new(
            "printer",
            vec![Observation::fixed(Property::atom("empty"), 1)],
        )],
    );
    let cfg = ClaimConfig {
        max_len: 0,
        include_noops: false,
    };
    let v = check_claim(&es, &cfg).unwrap();
    assert!(v.verdict);
    assert!(v.explanations.iter().all(|r| r.is_empty()));
    assert!(explain(&PrinterModel, &es, &cfg).is_err());
}

fn arb_property() -> impl Strategy<Value = Property> {
    prop_oneof![
        Just(Property::Any),
        prop::sample::select(vec!["empty", "A_deleted", "B_deleted", "A,empty", "B,A"])
            .prop_map(Property::atom),
        prop::sample::subsequence(vec!["add_A", "add_B", "take"], 1..=3)
            .prop_map(Property::events),
    ]
}

fn arb_observation() -> impl Strategy<Value = Observation> {
    (arb_property(), 0u64..=2, prop_oneof![(0u64..=2).prop_map(Opt::Finite), Just(Opt::Inf)])
        .prop_map(|(p, min, opt)| Observation::new(p, min, opt))
}

fn arb_statement() -> impl Strategy<Value = EvidentialStatement> {
    (
        prop::collection::vec(arb_observation(), 1..=3),
        prop::collection::vec(arb_observation(), 0..=2),
    )
        .prop_map(|(printer, other)| {
            let mut seqs = vec![ObservationSequence::new("printer", printer)];
            if !other.is_empty() {
                seqs.push(ObservationSequence::new("witness", other));
            }
            EvidentialStatement::new("es", seqs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn backward_search_equals_brute_force(
        es in arb_statement(),
        max_len in 1usize..=4,
        include_noops in any::<bool>(),
    ) {
        let cfg = ClaimConfig { max_len, include_noops };
        let got = explain(&PrinterModel, &es, &cfg).unwrap().runs;
        prop_assert_eq!(got, brute_explanations(&es, &cfg));
    }
}
