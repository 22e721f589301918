//! The ACME printer: a two-slot job queue shared by Alice (A) and Bob (B).

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stream::TagStream;
use crate::stream_ops;
use crate::value::Value;

use super::TransitionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Empty,
    A,
    B,
    ADeleted,
    BDeleted,
}

impl Slot {
    pub const ALL: [Slot; 5] = [Slot::Empty, Slot::A, Slot::B, Slot::ADeleted, Slot::BDeleted];

    /// The free-slot set `S`.
    pub const FREE: [Slot; 3] = [Slot::Empty, Slot::ADeleted, Slot::BDeleted];

    pub fn label(self) -> &'static str {
        match self {
            Slot::Empty => "empty",
            Slot::A => "A",
            Slot::B => "B",
            Slot::ADeleted => "A_deleted",
            Slot::BDeleted => "B_deleted",
        }
    }

    pub fn is_free(self) -> bool {
        Slot::FREE.contains(&self)
    }

    /// The deleted marker that keeps the owner's name, for an active job.
    fn deleted(self) -> Option<Slot> {
        match self {
            Slot::A => Some(Slot::ADeleted),
            Slot::B => Some(Slot::BDeleted),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Slot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Slot::ALL
            .into_iter()
            .find(|slot| slot.label() == s.trim())
            .ok_or_else(|| Error::Validation(format!("unknown slot label `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrinterState {
    pub d1: Slot,
    pub d2: Slot,
}

impl PrinterState {
    pub const EMPTY: PrinterState = PrinterState::new(Slot::Empty, Slot::Empty);

    pub const fn new(d1: Slot, d2: Slot) -> Self {
        PrinterState { d1, d2 }
    }

    pub fn all() -> Vec<PrinterState> {
        Slot::ALL
            .into_iter()
            .flat_map(|d1| Slot::ALL.into_iter().map(move |d2| PrinterState::new(d1, d2)))
            .collect()
    }

    /// The queue as a bounded stream `<d1, d2>` along `dim`.
    pub fn to_stream(self, dim: &str) -> TagStream {
        TagStream::bounded(dim, [Value::atom(self.d1.label()), Value::atom(self.d2.label())])
    }
}

impl fmt::Display for PrinterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.d1, self.d2)
    }
}

impl FromStr for PrinterState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let Some((d1, d2)) = s.split_once(',') else {
            return Err(Error::Validation(format!(
                "a printer state is written `d1,d2`, got `{s}`"
            )));
        };
        Ok(PrinterState::new(d1.parse()?, d2.parse()?))
    }
}

impl Serialize for PrinterState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventLabel {
    AddA,
    AddB,
    Take,
}

impl EventLabel {
    pub const ALL: [EventLabel; 3] = [EventLabel::AddA, EventLabel::AddB, EventLabel::Take];

    pub fn label(self) -> &'static str {
        match self {
            EventLabel::AddA => "add_A",
            EventLabel::AddB => "add_B",
            EventLabel::Take => "take",
        }
    }

    fn add(owner: Slot) -> EventLabel {
        match owner {
            Slot::A => EventLabel::AddA,
            _ => EventLabel::AddB,
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EventLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventLabel::ALL
            .into_iter()
            .find(|e| e.label() == s)
            .ok_or_else(|| Error::Validation(format!("unknown event `{s}`")))
    }
}

impl Serialize for EventLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

/// Forward transition function.
pub fn psi(c: EventLabel, s: PrinterState) -> PrinterState {
    let PrinterState { d1, d2 } = s;
    match c {
        EventLabel::AddA | EventLabel::AddB => {
            let job = if c == EventLabel::AddA { Slot::A } else { Slot::B };
            if d1 == job || d2 == job {
                s
            } else if d1.is_free() {
                PrinterState::new(job, d2)
            } else if d2.is_free() {
                PrinterState::new(d1, job)
            } else {
                s
            }
        }
        EventLabel::Take => match (d1.deleted(), d2.deleted()) {
            (Some(x), _) => PrinterState::new(x, d2),
            (None, Some(y)) => PrinterState::new(d1, y),
            (None, None) => s,
        },
    }
}

/// Which backtrace pattern produced a predecessor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
}

/// Predecessors of `s`, each tagged with its backtrace family.
///
/// Written from the queue rules read backwards, not by running `psi`.
pub fn inv_psi_families(s: PrinterState) -> Vec<(EventLabel, PrinterState, Family)> {
    use Slot::*;
    let PrinterState { d1, d2 } = s;
    let mut out = Vec::new();
    let mut push = |c, pred, fam| out.push((c, pred, fam));

    // take marked the first slot
    match d1 {
        ADeleted => push(EventLabel::Take, PrinterState::new(A, d2), Family::A),
        BDeleted => push(EventLabel::Take, PrinterState::new(B, d2), Family::B),
        _ => {}
    }
    // take marked the second slot while the first was free
    if d1.is_free() {
        match d2 {
            ADeleted => push(EventLabel::Take, PrinterState::new(d1, A), Family::C),
            BDeleted => push(EventLabel::Take, PrinterState::new(d1, B), Family::D),
            _ => {}
        }
    }
    if d1.is_free() && d2.is_free() {
        push(EventLabel::Take, s, Family::E);
    }

    // an add filled the first slot
    for (job, fam) in [(A, Family::F), (B, Family::G)] {
        if d1 == job && d2 != job {
            for x in Slot::FREE {
                push(EventLabel::add(job), PrinterState::new(x, d2), fam);
            }
        }
    }
    // an add filled the second slot behind the other user's job
    for (front, job, fam) in [(B, A, Family::H), (A, B, Family::I)] {
        if d1 == front && d2 == job {
            for x in Slot::FREE {
                push(EventLabel::add(job), PrinterState::new(front, x), fam);
            }
        }
    }

    // adds that changed nothing
    if d1 == A || d2 == A {
        push(EventLabel::AddA, s, Family::J);
    }
    if (d1, d2) == (A, A) {
        push(EventLabel::AddB, s, Family::K);
    }
    if (d1, d2) == (B, B) {
        push(EventLabel::AddA, s, Family::L);
    }
    if d1 == B || d2 == B {
        push(EventLabel::AddB, s, Family::M);
    }

    out.sort();
    out
}

/// Inverse transition function: every `(c, s')` with `psi(c, s') = s`.
pub fn inv_psi(s: PrinterState) -> Vec<(EventLabel, PrinterState)> {
    inv_psi_families(s)
        .into_iter()
        .map(|(c, pred, _)| (c, pred))
        .collect()
}

/// A predecessor rendered as a backtrace stream `<c, d1, d2>` along `dim`,
/// built the way the corpus inverse does: `d2 pby d1 pby c`.
pub fn render_backtrace(c: EventLabel, pred: PrinterState, dim: &str) -> Result<TagStream> {
    let one = |v: &str| TagStream::bounded(dim, [Value::atom(v)]);
    let tail = stream_ops::pby(&one(pred.d2.label()), &one(pred.d1.label()))?;
    stream_ops::pby(&tail, &one(c.label()))
}

/// The printer as a transition system.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrinterModel;

impl TransitionSystem for PrinterModel {
    type State = PrinterState;
    type Event = EventLabel;

    fn states(&self) -> Vec<PrinterState> {
        PrinterState::all()
    }

    fn events(&self) -> Vec<EventLabel> {
        EventLabel::ALL.to_vec()
    }

    fn step(&self, event: &EventLabel, state: &PrinterState) -> PrinterState {
        psi(*event, *state)
    }

    fn preimage(&self, state: &PrinterState) -> Vec<(EventLabel, PrinterState)> {
        inv_psi(*state)
    }

    /// A slot label holds when both slots carry it (`'B_deleted'` is the
    /// investigator's "B deleted / B deleted" finding); `"x,y"` names an
    /// exact state.
    fn state_has(&self, atom: &str, state: &PrinterState) -> bool {
        if atom.contains(',') {
            return atom.parse::<PrinterState>().is_ok_and(|s| s == *state);
        }
        atom.parse::<Slot>()
            .is_ok_and(|slot| state.d1 == slot && state.d2 == slot)
    }
}
