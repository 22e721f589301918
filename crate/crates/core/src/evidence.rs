//! The three-level forensic context hierarchy: observations, observation
//! sequences (one witness's story) and evidential statements (the case).

use std::fmt;

use crate::error::{Error, Result};
use crate::value::{Atom, PropertySet, Value};

/// What an observation says held during its duration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    /// A state predicate, resolved by the transition model.
    Atom(Atom),
    /// The event taken at each covered step belongs to this set.
    Events(PropertySet),
    /// Matches every step.
    Any,
}

impl Property {
    pub fn atom(label: &str) -> Self {
        Property::Atom(Atom::new(label))
    }

    pub fn events<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        Property::Events(labels.into_iter().map(Atom::new).collect())
    }
}

impl TryFrom<&Value> for Property {
    type Error = Error;

    fn try_from(v: &Value) -> Result<Self> {
        match v {
            Value::Atom(a) => Ok(Property::Atom(a.clone())),
            Value::Set(s) => Ok(Property::Events(s.clone())),
            Value::Any => Ok(Property::Any),
            other => Err(Error::TypeMismatch(format!(
                "an observed property must be an atom, a property set or the wildcard, not {}",
                other.kind()
            ))),
        }
    }
}

impl From<&Property> for Value {
    fn from(p: &Property) -> Value {
        match p {
            Property::Atom(a) => Value::Atom(a.clone()),
            Property::Events(s) => Value::Set(s.clone()),
            Property::Any => Value::Any,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Atom(a) => write!(f, "'{a}'"),
            Property::Events(s) => write!(f, "{s}"),
            Property::Any => f.write_str("ANY"),
        }
    }
}

/// The optional extra duration of an observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Opt {
    Finite(u64),
    Inf,
}

impl fmt::Display for Opt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Opt::Finite(n) => write!(f, "{n}"),
            Opt::Inf => f.write_str("+inf"),
        }
    }
}

/// `(P, min, opt)`: `P` held for at least `min` and at most `min + opt` steps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    pub property: Property,
    pub min: u64,
    pub opt: Opt,
}

impl Observation {
    pub fn new(property: Property, min: u64, opt: Opt) -> Self {
        Observation { property, min, opt }
    }

    pub fn fixed(property: Property, min: u64) -> Self {
        Observation::new(property, min, Opt::Finite(0))
    }

    /// `$`: nothing is known for any number of steps.
    pub fn any() -> Self {
        Observation::new(Property::Any, 0, Opt::Inf)
    }

    pub fn is_any(&self) -> bool {
        *self == Observation::any()
    }

    /// Longest admissible duration, with `+inf` clamped to `cap`.
    pub fn max_duration(&self, cap: u64) -> u64 {
        match self.opt {
            Opt::Finite(k) => self.min + k,
            Opt::Inf => cap,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.opt == Opt::Finite(0)
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_any() {
            return f.write_str("$");
        }
        write!(f, "({}, {}, {})", self.property, self.min, self.opt)
    }
}

/// A finite ordered collection of observations. Order is significant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObservationSequence {
    pub name: String,
    pub observations: Vec<Observation>,
}

impl ObservationSequence {
    pub fn new(name: impl Into<String>, observations: Vec<Observation>) -> Self {
        ObservationSequence {
            name: name.into(),
            observations,
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.observations.iter().all(Observation::is_fixed)
    }
}

impl fmt::Display for ObservationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, o) in self.observations.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{o}")?;
        }
        f.write_str("]")
    }
}

/// A finite unordered collection of observation sequences.
///
/// Equality ignores the order in which sequences were listed.
#[derive(Debug, Clone, Eq)]
pub struct EvidentialStatement {
    pub name: String,
    pub sequences: Vec<ObservationSequence>,
}

impl EvidentialStatement {
    pub fn new(name: impl Into<String>, sequences: Vec<ObservationSequence>) -> Self {
        EvidentialStatement {
            name: name.into(),
            sequences,
        }
    }

    pub fn sequence(&self, name: &str) -> Option<&ObservationSequence> {
        self.sequences.iter().find(|s| s.name == name)
    }

    /// A copy with the named sequence removed.
    pub fn without(&self, name: &str) -> EvidentialStatement {
        EvidentialStatement {
            name: self.name.clone(),
            sequences: self
                .sequences
                .iter()
                .filter(|s| s.name != name)
                .cloned()
                .collect(),
        }
    }

    fn sorted(&self) -> Vec<&ObservationSequence> {
        let mut v: Vec<_> = self.sequences.iter().collect();
        v.sort();
        v
    }
}

impl PartialEq for EvidentialStatement {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.sorted() == other.sorted()
    }
}

impl fmt::Display for EvidentialStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.sequences.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: {s}", s.name)?;
        }
        f.write_str("}")
    }
}
