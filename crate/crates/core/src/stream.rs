use std::fmt;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::value::Value;

/// A finite view of a stream along one dimension.
///
/// A bounded stream ends at its first `eod`; `elements` never contains
/// `Value::Eod` and every tag at or past `len()` reads as `eod`. An unbounded
/// stream is a known prefix: reads past it fail with `UnboundedStream`.
#[derive(Debug, Clone, PartialEq)]
pub struct TagStream {
    dimension: String,
    elements: Vec<Value>,
    bounded: bool,
}

impl TagStream {
    /// Builds a bounded stream, cutting it at the first `eod`.
    pub fn bounded(dimension: impl Into<String>, elements: impl IntoIterator<Item = Value>) -> Self {
        let elements = elements.into_iter().take_while(|v| !v.is_eod()).collect();
        TagStream {
            dimension: dimension.into(),
            elements,
            bounded: true,
        }
    }

    /// A stream whose tail beyond `prefix` is not known. An `eod` inside the
    /// prefix still terminates it.
    pub fn prefix(dimension: impl Into<String>, prefix: impl IntoIterator<Item = Value>) -> Self {
        let mut elements = Vec::new();
        let mut bounded = false;
        for v in prefix {
            if v.is_eod() {
                bounded = true;
                break;
            }
            elements.push(v);
        }
        TagStream {
            dimension: dimension.into(),
            elements,
            bounded,
        }
    }

    pub fn empty(dimension: impl Into<String>) -> Self {
        Self::bounded(dimension, [])
    }

    pub fn dimension(&self) -> &str {
        &self.dimension
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn elements(&self) -> &[Value] {
        &self.elements
    }

    /// Number of known elements; for a bounded stream, the tag of its `eod`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Value at a tag along the stream's own dimension.
    pub fn at_tag(&self, tag: u64) -> Result<Value> {
        match usize::try_from(tag).ok().and_then(|i| self.elements.get(i)) {
            Some(v) => Ok(v.clone()),
            None if self.bounded => Ok(Value::Eod),
            None => Err(Error::UnboundedStream(self.dimension.clone())),
        }
    }

    /// Value at a context; only the stream's own dimension is consulted.
    pub fn at(&self, ctx: &Context) -> Result<Value> {
        self.at_tag(ctx.query(&self.dimension)?)
    }

    /// Same elements along another dimension.
    pub fn renamed(&self, dimension: impl Into<String>) -> TagStream {
        TagStream {
            dimension: dimension.into(),
            ..self.clone()
        }
    }
}

impl fmt::Display for TagStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, v) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        if !self.bounded {
            f.write_str(", ...")?;
        }
        f.write_str(">")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eod_is_absorbing() {
        let s = TagStream::bounded(
            "d",
            [Value::atom("a"), Value::Eod, Value::atom("hidden")],
        );
        assert_eq!(s.len(), 1);
        assert_eq!(s.at_tag(1), Ok(Value::Eod));
        assert_eq!(s.at_tag(2), Ok(Value::Eod));
    }

    #[test]
    fn element_at_index_is_value_at_context() {
        let s = TagStream::bounded("d", [Value::Int(4), Value::Int(5)]);
        assert_eq!(s.at(&Context::new().with("d", 1)), Ok(Value::Int(5)));
        assert_eq!(
            s.at(&Context::new().with("e", 1)),
            Err(Error::UnboundDimension("d".into()))
        );
    }

    #[test]
    fn reading_past_an_unbounded_prefix_fails() {
        let s = TagStream::prefix("d", [Value::Int(1)]);
        assert!(!s.is_bounded());
        assert_eq!(s.at_tag(0), Ok(Value::Int(1)));
        assert_eq!(s.at_tag(1), Err(Error::UnboundedStream("d".into())));
        let cut = TagStream::prefix("d", [Value::Int(1), Value::Eod]);
        assert!(cut.is_bounded());
    }
}
