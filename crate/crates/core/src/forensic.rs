//! Expansion of observations into indexed property streams and the forensic
//! `combine`/`product` operators.
//!
//! An observation `(P, min, opt)` expands into the runs `P^t` for every
//! admissible duration `t`; a sequence expands into every concatenation of
//! its observations' runs. Elements of the intermediate tag streams are
//! arrays: a run is an array of properties and `combine` pairs are arrays of
//! length two.

use std::sync::Arc;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::evidence::{Observation, ObservationSequence, Opt, Property};
use crate::stream::TagStream;
use crate::stream_ops;
use crate::value::Value;

/// Dimension along which expansion streams are laid out.
const EXPANSION_DIM: &str = "expansion";

/// One expansion of an observation sequence. Index `i` of `properties` is
/// the sub-dimension index `i` of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyStream {
    pub properties: Vec<Property>,
    pub origin: Arc<ObservationSequence>,
}

impl PropertyStream {
    pub fn len(&self) -> usize {
        self.properties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.properties.is_empty()
    }

    /// Property at a sub-dimension index, `eod` past the end.
    pub fn at(&self, index: u64) -> Value {
        usize::try_from(index)
            .ok()
            .and_then(|i| self.properties.get(i))
            .map(Value::from)
            .unwrap_or(Value::Eod)
    }

    pub fn indices_of(&self, property: &Property) -> Vec<u64> {
        self.properties
            .iter()
            .enumerate()
            .filter(|(_, p)| *p == property)
            .map(|(i, _)| i as u64)
            .collect()
    }

    pub fn to_tag_stream(&self, dimension: &str) -> TagStream {
        TagStream::bounded(dimension, self.properties.iter().map(Value::from))
    }
}

/// Every expansion of one observation sequence, `+inf` clamped to `cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionSet {
    pub streams: Vec<PropertyStream>,
    pub cap: u64,
}

impl ExpansionSet {
    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }
}

/// The runs `P^t` for `t` in `[min, min + opt]`, shortest first.
pub fn expand_observation(o: &Observation, cap: u64) -> Result<Vec<Vec<Property>>> {
    if o.opt == Opt::Inf && cap < o.min {
        return Err(Error::Expansion(format!(
            "cap {cap} is below the minimum duration {} of {o}",
            o.min
        )));
    }
    Ok((o.min..=o.max_duration(cap))
        .map(|t| vec![o.property.clone(); t as usize])
        .collect())
}

/// Pairs every element of `s` with `e`:
/// `if iseod s then eod else ([first s, e]) fby combine(next s, e)`.
///
/// Unrolled, element `n` of the result is `[s @ n, e]` until `s` ends.
pub fn combine(s: &TagStream, e: &Value) -> Result<TagStream> {
    if !s.is_bounded() {
        return Err(Error::UnboundedStream(s.dimension().to_owned()));
    }
    let d = s.dimension();
    stream_ops::materialize(d, &Context::new(), s.len() + 1, |c| {
        Ok(match s.at(c)? {
            Value::Eod => Value::Eod,
            x => Value::array([x, e.clone()]),
        })
    })
}

/// Every pairing of an element of `s1` with an element of `s2`:
/// `if iseod s2 then eod else combine(s1, first s2) ++ product(s1, next s2)`.
pub fn product(s1: &TagStream, s2: &TagStream) -> Result<TagStream> {
    if !s2.is_bounded() {
        return Err(Error::UnboundedStream(s2.dimension().to_owned()));
    }
    let mut out = Vec::with_capacity(s1.len() * s2.len());
    for tag in 0.. {
        if stream_ops::iseod(s2, tag)? {
            break;
        }
        let y = s2.at_tag(tag)?;
        out.extend(combine(s1, &y)?.elements().iter().cloned());
    }
    Ok(TagStream::bounded(s1.dimension(), out))
}

fn run_value(run: &[Property]) -> Value {
    Value::array(run.iter().map(Value::from))
}

fn run_items(v: &Value) -> &[Value] {
    match v {
        Value::Array(items) => items,
        _ => &[],
    }
}

/// All expansions of a sequence, ordered lexicographically by the duration
/// chosen for each observation (first observation varies slowest).
pub fn expand_sequence(os: &ObservationSequence, cap: u64) -> Result<ExpansionSet> {
    // Suffix expansions, built right to left. product(rest, runs) iterates
    // the runs of the current observation in the outer loop.
    let mut suffixes = TagStream::bounded(EXPANSION_DIM, [Value::array([])]);
    for o in os.observations.iter().rev() {
        let runs = TagStream::bounded(
            EXPANSION_DIM,
            expand_observation(o, cap)?.iter().map(|r| run_value(r)),
        );
        let pairs = product(&suffixes, &runs)?;
        suffixes = TagStream::bounded(
            EXPANSION_DIM,
            pairs.elements().iter().map(|pair| {
                let [rest, run] = run_items(pair) else {
                    unreachable!("combine yields pairs")
                };
                Value::array(run_items(run).iter().chain(run_items(rest)).cloned())
            }),
        );
    }
    let origin = Arc::new(os.clone());
    let streams = suffixes
        .elements()
        .iter()
        .map(|v| {
            let properties = run_items(v)
                .iter()
                .map(Property::try_from)
                .collect::<Result<Vec<_>>>()?;
            Ok(PropertyStream {
                properties,
                origin: Arc::clone(&origin),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionSet { streams, cap })
}

fn single_expansion(os: &ObservationSequence) -> Result<PropertyStream> {
    if !os.is_fixed() {
        return Err(Error::AmbiguousExpansion(os.name.clone()));
    }
    let mut set = expand_sequence(os, 0)?;
    Ok(set.streams.remove(0))
}

/// `o @.obs i`: the property observed at sub-dimension index `i`.
pub fn at_obs(os: &ObservationSequence, index: u64) -> Result<Value> {
    Ok(single_expansion(os)?.at(index))
}

/// Every sub-dimension index at which `property` was observed.
pub fn indices_of(os: &ObservationSequence, property: &Property) -> Result<Vec<u64>> {
    Ok(single_expansion(os)?.indices_of(property))
}
