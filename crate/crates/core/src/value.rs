//! The value universe shared by the evaluator, the forensic operators and
//! the reconstruction engine.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::evidence::{EvidentialStatement, Observation, ObservationSequence};
use crate::reconstruction::PrinterVerdict;

/// A symbolic label such as `'B_deleted'` or `'take'`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(label: impl AsRef<str>) -> Self {
        Atom(Arc::from(label.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

/// A finite, duplicate-free, unordered set of atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropertySet(BTreeSet<Atom>);

impl PropertySet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.iter().any(|a| a.as_str() == label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }
}

impl FromIterator<Atom> for PropertySet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        PropertySet(iter.into_iter().collect())
    }
}

impl fmt::Display for PropertySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unordered {")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "'{a}'")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Atom(Atom),
    Int(i64),
    Bool(bool),
    Set(PropertySet),
    Array(Arc<[Value]>),
    /// End-of-data.
    Eod,
    /// Positive infinity; only meaningful as an observation's `opt`.
    Inf,
    /// The wildcard property that matches every run step.
    Any,
    Observation(Arc<Observation>),
    Sequence(Arc<ObservationSequence>),
    Evidence(Arc<EvidentialStatement>),
    Verdict(Arc<PrinterVerdict>),
}

impl Value {
    pub fn atom(label: &str) -> Self {
        Value::Atom(Atom::new(label))
    }

    pub fn array(items: impl IntoIterator<Item = Value>) -> Self {
        Value::Array(items.into_iter().collect())
    }

    pub fn is_eod(&self) -> bool {
        matches!(self, Value::Eod)
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Value::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Short type name used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Atom(_) => "atom",
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
            Value::Set(_) => "property set",
            Value::Array(_) => "array",
            Value::Eod => "eod",
            Value::Inf => "+inf",
            Value::Any => "wildcard",
            Value::Observation(_) => "observation",
            Value::Sequence(_) => "observation sequence",
            Value::Evidence(_) => "evidential statement",
            Value::Verdict(_) => "verdict",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => write!(f, "{a}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Set(s) => write!(f, "{s}"),
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Eod => f.write_str("eod"),
            Value::Inf => f.write_str("+inf"),
            Value::Any => f.write_str("ANY"),
            Value::Observation(o) => write!(f, "{o}"),
            Value::Sequence(s) => write!(f, "{s}"),
            Value::Evidence(e) => write!(f, "{e}"),
            Value::Verdict(v) => write!(f, "{}", v.verdict),
        }
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<Atom> for Value {
    fn from(a: Atom) -> Self {
        Value::Atom(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_set_is_duplicate_free() {
        let set: PropertySet = ["take", "add_B", "take"].into_iter().map(Atom::from).collect();
        assert_eq!(set.len(), 2);
        assert!(set.contains("add_B"));
        assert!(!set.contains("add_A"));
        assert_eq!(set.to_string(), "unordered {'add_B', 'take'}");
    }

    #[test]
    fn array_display() {
        let v = Value::array([Value::atom("A"), Value::Int(3), Value::Eod]);
        assert_eq!(v.to_string(), "[A, 3, eod]");
    }
}
