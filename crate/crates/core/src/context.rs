use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// A point in context space: at most one non-negative tag per dimension.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    bindings: BTreeMap<String, u64>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// The `@` operator: a copy of this context with `dim` bound to `tag`.
    pub fn with(&self, dim: &str, tag: u64) -> Context {
        let mut bindings = self.bindings.clone();
        bindings.insert(dim.to_owned(), tag);
        Context { bindings }
    }

    /// `@` taking a signed tag, as produced by the evaluator.
    pub fn override_tag(&self, dim: &str, tag: i64) -> Result<Context> {
        let tag = u64::try_from(tag)
            .map_err(|_| Error::Validation(format!("negative tag {tag} for dimension `{dim}`")))?;
        Ok(self.with(dim, tag))
    }

    /// The `#` operator.
    pub fn query(&self, dim: &str) -> Result<u64> {
        self.bindings
            .get(dim)
            .copied()
            .ok_or_else(|| Error::UnboundDimension(dim.to_owned()))
    }

    pub fn get(&self, dim: &str) -> Option<u64> {
        self.bindings.get(dim).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn dimensions(&self) -> impl Iterator<Item = (&str, u64)> {
        self.bindings.iter().map(|(d, t)| (d.as_str(), *t))
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for Context {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Context {
            bindings: iter.into_iter().map(|(d, t)| (d.into(), t)).collect(),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (d, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}:{t}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(pairs: &[(&str, u64)]) -> Context {
        pairs.iter().map(|&(d, t)| (d, t)).collect()
    }

    #[test]
    fn override_replaces_single_binding() {
        assert_eq!(ctx(&[("d", 0)]).with("d", 5), ctx(&[("d", 5)]));
    }

    #[test]
    fn override_binds_observation_index() {
        assert_eq!(Context::new().with("obs", 2), ctx(&[("obs", 2)]));
    }

    #[test]
    fn override_leaves_other_dimensions() {
        let c = ctx(&[("place", 1), ("time", 3)]);
        let moved = c.with("time", 4);
        assert_eq!(moved, ctx(&[("place", 1), ("time", 4)]));
        assert_eq!(c, ctx(&[("place", 1), ("time", 3)]));
    }

    #[test]
    fn negative_tag_is_rejected() {
        assert!(matches!(
            Context::new().override_tag("d", -1),
            Err(Error::Validation(_))
        ));
        assert_eq!(Context::new().override_tag("d", 3).unwrap(), ctx(&[("d", 3)]));
    }

    #[test]
    fn query_examples() {
        assert_eq!(ctx(&[("d", 7)]).query("d"), Ok(7));
        assert_eq!(ctx(&[("obs", 2)]).query("obs"), Ok(2));
        assert_eq!(
            ctx(&[("d", 7)]).query("e"),
            Err(Error::UnboundDimension("e".into()))
        );
    }

    fn arb_context() -> impl Strategy<Value = Context> {
        proptest::collection::btree_map("[a-e]", 0u64..100, 0..4)
            .prop_map(|m| m.into_iter().collect())
    }

    proptest! {
        #[test]
        fn query_after_override(c in arb_context(), d in "[a-f]", t in 0u64..1000) {
            prop_assert_eq!(c.with(&d, t).query(&d), Ok(t));
        }

        #[test]
        fn override_is_last_write_wins(c in arb_context(), d in "[a-f]", t1 in 0u64..100, t2 in 0u64..100) {
            prop_assert_eq!(c.with(&d, t1).with(&d, t2), c.with(&d, t2));
        }
    }
}
