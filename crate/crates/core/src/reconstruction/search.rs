//! Backward explanation search and the forward brute-force oracle.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{EvidentialStatement, Observation, ObservationSequence};

use super::{bounded_max, matches, ClaimConfig, Run, Step, TransitionSystem};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub states_visited: usize,
    pub runs_enumerated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Explanation<S, E> {
    pub runs: Vec<Run<S, E>>,
    pub stats: SearchStats,
}

/// `(k, c)`: `k` observations are still open (the current one is `k - 1`,
/// matched from the back) and `c` positions have been put into it so far.
/// `+inf` observations saturate `c` at their minimum.
type Config = (usize, u64);
type Configs = BTreeSet<Config>;

/// A sequence read right to left as a small NFA.
struct Matcher<'a> {
    obs: &'a [Observation],
}

impl Matcher<'_> {
    fn close(&self, mut set: Configs) -> Configs {
        let mut todo: Vec<Config> = set.iter().copied().collect();
        while let Some((k, c)) = todo.pop() {
            if k > 0 && c >= self.obs[k - 1].min && set.insert((k - 1, 0)) {
                todo.push((k - 1, 0));
            }
        }
        set
    }

    fn start(&self) -> Configs {
        self.close(BTreeSet::from([(self.obs.len(), 0)]))
    }

    fn consume<T: TransitionSystem>(
        &self,
        model: &T,
        set: &Configs,
        state: &T::State,
        event: Option<&T::Event>,
    ) -> Configs {
        let mut out = BTreeSet::new();
        for &(k, c) in set {
            if k == 0 {
                continue;
            }
            let o = &self.obs[k - 1];
            if !matches(model, &o.property, state, event) {
                continue;
            }
            let c = match bounded_max(o.opt, o.min) {
                Some(max) if c + 1 > max => continue,
                Some(_) => c + 1,
                None => (c + 1).min(o.min),
            };
            out.insert((k, c));
        }
        self.close(out)
    }

    fn accepts(&self, set: &Configs) -> bool {
        set.contains(&(0, 0))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Node<S> {
    state: S,
    remaining: usize,
    configs: Vec<Configs>,
}

struct Search<'a, T: TransitionSystem> {
    model: &'a T,
    matchers: Vec<Matcher<'a>>,
    include_noops: bool,
    live: HashMap<Node<T::State>, bool>,
    runs: Vec<Run<T::State, T::Event>>,
    stats: SearchStats,
}

impl<T: TransitionSystem> Search<'_, T> {
    fn accepts(&self, node: &Node<T::State>) -> bool {
        self.matchers
            .iter()
            .zip(&node.configs)
            .all(|(m, set)| m.accepts(set))
    }

    /// Nodes one step further back in time.
    fn predecessors(&self, node: &Node<T::State>) -> Vec<(T::Event, Node<T::State>)> {
        if node.remaining == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (event, pred) in self.model.preimage(&node.state) {
            if !self.include_noops && pred == node.state {
                continue;
            }
            let configs: Vec<Configs> = self
                .matchers
                .iter()
                .zip(&node.configs)
                .map(|(m, set)| m.consume(self.model, set, &pred, Some(&event)))
                .collect();
            if configs.iter().any(BTreeSet::is_empty) {
                continue;
            }
            out.push((
                event,
                Node {
                    state: pred,
                    remaining: node.remaining - 1,
                    configs,
                },
            ));
        }
        out
    }

    fn is_live(&mut self, node: &Node<T::State>) -> bool {
        if let Some(&known) = self.live.get(node) {
            return known;
        }
        let mut live = self.accepts(node);
        for (_, child) in self.predecessors(node) {
            // no short-circuit: every reachable node gets memoized
            live |= self.is_live(&child);
        }
        self.live.insert(node.clone(), live);
        live
    }

    fn enumerate(&mut self, node: &Node<T::State>, suffix: &mut Vec<Step<T::State, T::Event>>) {
        if self.accepts(node) {
            self.runs.push(Run {
                initial: node.state.clone(),
                steps: suffix.iter().rev().cloned().collect(),
            });
            self.stats.runs_enumerated += 1;
        }
        for (event, child) in self.predecessors(node) {
            if !self.is_live(&child) {
                continue;
            }
            suffix.push(Step {
                event,
                state: node.state.clone(),
            });
            self.enumerate(&child, suffix);
            suffix.pop();
        }
    }
}

fn sort_runs<S: Ord + Clone, E: Ord + Clone>(runs: &mut Vec<Run<S, E>>) {
    runs.sort_by(|a, b| {
        let key = |r: &Run<S, E>| {
            (
                r.steps.len(),
                r.steps.iter().map(|s| s.event.clone()).collect::<Vec<_>>(),
                r.initial.clone(),
                r.steps.iter().map(|s| s.state.clone()).collect::<Vec<_>>(),
            )
        };
        key(a).cmp(&key(b))
    });
    runs.dedup();
}

/// Backward search from every state, consuming positions last to first.
pub(crate) fn search<T: TransitionSystem>(
    model: &T,
    es: &EvidentialStatement,
    cfg: &ClaimConfig,
) -> Explanation<T::State, T::Event> {
    let mut sequences: Vec<&ObservationSequence> = es.sequences.iter().collect();
    sequences.sort_by(|a, b| a.name.cmp(&b.name));
    let mut search = Search {
        model,
        matchers: sequences
            .iter()
            .map(|os| Matcher {
                obs: &os.observations,
            })
            .collect(),
        include_noops: cfg.include_noops,
        live: HashMap::new(),
        runs: Vec::new(),
        stats: SearchStats::default(),
    };

    for state in model.states() {
        let configs: Vec<Configs> = search
            .matchers
            .iter()
            .map(|m| m.consume(model, &m.start(), &state, None))
            .collect();
        if configs.iter().any(BTreeSet::is_empty) {
            continue;
        }
        let node = Node {
            state,
            remaining: cfg.max_len,
            configs,
        };
        if search.is_live(&node) {
            search.enumerate(&node, &mut Vec::new());
        }
    }

    search.stats.states_visited = search.live.len();
    let mut runs = search.runs;
    sort_runs(&mut runs);
    Explanation {
        runs,
        stats: search.stats,
    }
}

/// Every run of at most `max_len` steps that satisfies all sequences of
/// `es`, ordered by length and then event sequence.
pub fn explain<T: TransitionSystem>(
    model: &T,
    es: &EvidentialStatement,
    cfg: &ClaimConfig,
) -> Result<Explanation<T::State, T::Event>> {
    if cfg.max_len < 1 {
        return Err(Error::Validation("max_len must be at least 1".into()));
    }
    Ok(search(model, es, cfg))
}

/// Forward enumeration of every event sequence of length `<= max_len`
/// from `initial`, keeping runs whose last state satisfies `accept`.
/// Never consults the model's preimage.
pub fn oracle_enumerate<T: TransitionSystem>(
    model: &T,
    initial: &T::State,
    accept: impl Fn(&T::State) -> bool,
    max_len: usize,
) -> Vec<Run<T::State, T::Event>> {
    let events = model.events();
    let mut out = Vec::new();
    let mut frontier = vec![Run::empty(initial.clone())];
    for len in 0..=max_len {
        let mut next = Vec::new();
        for run in frontier {
            if accept(run.final_state()) {
                out.push(run.clone());
            }
            if len == max_len {
                continue;
            }
            for e in &events {
                let state = model.step(e, run.final_state());
                let mut longer = run.clone();
                longer.steps.push(Step {
                    event: e.clone(),
                    state,
                });
                next.push(longer);
            }
        }
        frontier = next;
    }
    sort_runs(&mut out);
    out
}
