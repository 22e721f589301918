//! Event reconstruction over a finite transition system.
//!
//! A run `q0 -e1-> q1 -e2-> ... -en-> qn` is read as `n + 1` positions;
//! position `k` carries state `qk` and the event `e(k+1)` leaving it (the
//! last position has none). An observation sequence is satisfied when the
//! positions split into consecutive segments, one per observation, of
//! admissible length, each position matching the observed property.

mod printer;
mod search;

use std::collections::BTreeSet;
use std::fmt::{Debug, Display};
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{EvidentialStatement, ObservationSequence, Opt, Property};

pub use printer::{
    inv_psi, inv_psi_families, psi, render_backtrace, EventLabel, Family, PrinterModel,
    PrinterState, Slot,
};
pub(crate) use search::search;
pub use search::{explain, oracle_enumerate, Explanation, SearchStats};

pub trait TransitionSystem {
    type State: Clone + Ord + Hash + Debug + Display;
    type Event: Clone + Ord + Hash + Debug + Display;

    fn states(&self) -> Vec<Self::State>;

    fn events(&self) -> Vec<Self::Event>;

    fn step(&self, event: &Self::Event, state: &Self::State) -> Self::State;

    /// Every `(event, predecessor)` stepping into `state`. The default scans
    /// the whole graph.
    fn preimage(&self, state: &Self::State) -> Vec<(Self::Event, Self::State)> {
        let mut out = Vec::new();
        for s in self.states() {
            for e in self.events() {
                if self.step(&e, &s) == *state {
                    out.push((e, s.clone()));
                }
            }
        }
        out.sort();
        out
    }

    /// Whether the state predicate named `atom` holds in `state`.
    fn state_has(&self, atom: &str, state: &Self::State) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Step<S, E> {
    pub event: E,
    pub state: S,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Run<S, E> {
    pub initial: S,
    pub steps: Vec<Step<S, E>>,
}

impl<S: Clone + PartialEq, E> Run<S, E> {
    pub fn empty(initial: S) -> Self {
        Run {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_state(&self) -> &S {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    pub fn state_at(&self, position: usize) -> &S {
        match position {
            0 => &self.initial,
            k => &self.steps[k - 1].state,
        }
    }

    /// Event leaving a position; `None` at the last one.
    pub fn event_at(&self, position: usize) -> Option<&E> {
        self.steps.get(position).map(|s| &s.event)
    }

    pub fn positions(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn events(&self) -> impl Iterator<Item = &E> {
        self.steps.iter().map(|s| &s.event)
    }

    /// A step is a no-op when it leaves the state unchanged.
    pub fn has_noop(&self) -> bool {
        (0..self.steps.len()).any(|k| self.state_at(k) == &self.steps[k].state)
    }
}

impl<S: Clone + PartialEq, E> Run<S, E> {
    /// Checks `step(e_k, q_(k-1)) = q_k` for every step.
    pub fn is_consistent<T>(&self, model: &T) -> bool
    where
        T: TransitionSystem<State = S, Event = E>,
    {
        (0..self.steps.len())
            .all(|k| model.step(&self.steps[k].event, self.state_at(k)) == self.steps[k].state)
    }
}

/// Whether one position matches an observed property.
pub fn matches<T: TransitionSystem>(
    model: &T,
    property: &Property,
    state: &T::State,
    event: Option<&T::Event>,
) -> bool {
    match property {
        Property::Any => true,
        Property::Atom(a) => model.state_has(a.as_str(), state),
        Property::Events(set) => event.is_some_and(|e| set.contains(&e.to_string())),
    }
}

/// Whether the run's positions split into segments matching `os`, with
/// `+inf` durations bounded by `cap` (raised to the run's size if smaller).
pub fn satisfies<T: TransitionSystem>(
    model: &T,
    run: &Run<T::State, T::Event>,
    os: &ObservationSequence,
    cap: u64,
) -> bool {
    let n = run.positions();
    let cap = cap.max(n as u64);
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for o in &os.observations {
        let max = o.max_duration(cap);
        let mut next = vec![false; n + 1];
        for start in (0..=n).filter(|&p| reach[p]) {
            let mut t = 0u64;
            let mut end = start;
            loop {
                if t >= o.min && t <= max {
                    next[end] = true;
                }
                if end == n || t >= max {
                    break;
                }
                if !matches(model, &o.property, run.state_at(end), run.event_at(end)) {
                    break;
                }
                end += 1;
                t += 1;
            }
        }
        reach = next;
    }
    reach[n]
}

/// All states reachable from `from`, including itself.
pub fn reachable<T: TransitionSystem>(model: &T, from: &T::State) -> BTreeSet<T::State> {
    let mut seen = BTreeSet::from([from.clone()]);
    let mut frontier = vec![from.clone()];
    while let Some(s) = frontier.pop() {
        for e in model.events() {
            let next = model.step(&e, &s);
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClaimConfig {
    pub max_len: usize,
    pub include_noops: bool,
}

impl Default for ClaimConfig {
    fn default() -> Self {
        ClaimConfig {
            max_len: 12,
            include_noops: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<S, E> {
    pub statement: EvidentialStatement,
    pub verdict: bool,
    pub explanations: Vec<Run<S, E>>,
    pub stats: SearchStats,
}

pub type PrinterRun = Run<PrinterState, EventLabel>;
pub type PrinterVerdict = Verdict<PrinterState, EventLabel>;

/// Name of the sequence carrying the investigator's final observation.
pub const FINAL_SEQUENCE: &str = "printer";

/// Evaluates a claim: the statement holds iff it has an explanation within
/// `max_len` steps.
pub fn check_claim(es: &EvidentialStatement, cfg: &ClaimConfig) -> Result<PrinterVerdict> {
    if es.sequence(FINAL_SEQUENCE).is_none() {
        return Err(Error::Validation(format!(
            "evidential statement `{}` has no `{FINAL_SEQUENCE}` observation sequence",
            es.name
        )));
    }
    let found = search::search(&PrinterModel, es, cfg);
    Ok(Verdict {
        statement: es.clone(),
        verdict: !found.runs.is_empty(),
        explanations: found.runs,
        stats: found.stats,
    })
}

/// The durations an observation admits, for search bookkeeping.
pub(crate) fn bounded_max(opt: Opt, min: u64) -> Option<u64> {
    match opt {
        Opt::Finite(k) => Some(min + k),
        Opt::Inf => None,
    }
}
