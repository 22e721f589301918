//! Classical intensional operators and their reverse counterparts.
//!
//! Each operator is written once, as a pointwise equation over `@` (context
//! override) and `#` (context query). The operands are lookups from a
//! context to a value, so the same equations drive the evaluator (where the
//! operands are unevaluated expressions) and the concrete `TagStream`
//! functions at the bottom of this module.
//!
//! The reverse operators (`last`, `prev`, `pby`) only make sense on bounded
//! streams; scans that find no `eod` within `limit` tags fail with
//! `UnboundedStream`.

use crate::context::Context;
use crate::error::{Error, Result};
use crate::stream::TagStream;
use crate::value::Value;

/// An operand: the value of some stream at a given context.
pub type Operand<'a> = &'a mut dyn FnMut(&Context) -> Result<Value>;

/// `first.d X = X @.d 0`
pub fn first_at(ctx: &Context, d: &str, x: Operand) -> Result<Value> {
    x(&ctx.with(d, 0))
}

/// `next.d X = X @.d (#.d + 1)`
pub fn next_at(ctx: &Context, d: &str, x: Operand) -> Result<Value> {
    let t = ctx.query(d)?;
    x(&ctx.with(d, t + 1))
}

/// `prev.d X = X @.d (#.d - 1)`, `eod` at the origin.
pub fn prev_at(ctx: &Context, d: &str, x: Operand) -> Result<Value> {
    match ctx.query(d)? {
        0 => Ok(Value::Eod),
        t => x(&ctx.with(d, t - 1)),
    }
}

/// `X fby.d Y`: `X` at tag 0, then `Y` shifted one tag later.
pub fn fby_at(ctx: &Context, d: &str, x: Operand, y: Operand) -> Result<Value> {
    match ctx.query(d)? {
        0 => x(ctx),
        t => y(&ctx.with(d, t - 1)),
    }
}

/// `X pby.d Y = Y fby.d X`: `Y` is placed in front of the existing `X`.
pub fn pby_at(ctx: &Context, d: &str, x: Operand, y: Operand) -> Result<Value> {
    fby_at(ctx, d, y, x)
}

pub fn iseod_at(ctx: &Context, x: Operand) -> Result<Value> {
    Ok(Value::Bool(x(ctx)?.is_eod()))
}

/// Tag of the first `eod` along `d`, scanning from 0.
pub fn length_along(ctx: &Context, d: &str, x: Operand, limit: usize) -> Result<u64> {
    for tag in 0..=limit as u64 {
        if x(&ctx.with(d, tag))?.is_eod() {
            return Ok(tag);
        }
    }
    Err(Error::UnboundedStream(d.to_owned()))
}

/// `last.d X = X @.d (L - 1)` where `L` is the tag of the first `eod`.
pub fn last_at(ctx: &Context, d: &str, x: Operand, limit: usize) -> Result<Value> {
    match length_along(ctx, d, x, limit)? {
        0 => Ok(Value::Eod),
        len => x(&ctx.with(d, len - 1)),
    }
}

fn truth(v: Value, op: &str) -> Result<Option<bool>> {
    match v {
        Value::Bool(b) => Ok(Some(b)),
        Value::Eod => Ok(None),
        other => Err(Error::TypeMismatch(format!(
            "`{op}` needs a boolean condition stream, found {}",
            other.kind()
        ))),
    }
}

/// `X wvr.d P`: the elements of `X` at the tags where `P` is true, compacted.
pub fn wvr_at(ctx: &Context, d: &str, x: Operand, p: Operand, limit: usize) -> Result<Value> {
    let wanted = ctx.query(d)?;
    let mut seen = 0u64;
    for tag in 0..=limit as u64 {
        match truth(p(&ctx.with(d, tag))?, "wvr")? {
            None => return Ok(Value::Eod),
            Some(true) if seen == wanted => return x(&ctx.with(d, tag)),
            Some(true) => seen += 1,
            Some(false) => {}
        }
    }
    Err(Error::UnboundedStream(d.to_owned()))
}

/// `X asa.d P = first.d (X wvr.d P)`
pub fn asa_at(ctx: &Context, d: &str, x: Operand, p: Operand, limit: usize) -> Result<Value> {
    wvr_at(&ctx.with(d, 0), d, x, p, limit)
}

/// `X upon.d P`: `X` advanced one step after every tag where `P` is true.
pub fn upon_at(ctx: &Context, d: &str, x: Operand, p: Operand, limit: usize) -> Result<Value> {
    let now = ctx.query(d)?;
    if now as usize > limit {
        return Err(Error::UnboundedStream(d.to_owned()));
    }
    let mut advanced = 0u64;
    for tag in 0..now {
        match truth(p(&ctx.with(d, tag))?, "upon")? {
            None => return Ok(Value::Eod),
            Some(true) => advanced += 1,
            Some(false) => {}
        }
    }
    x(&ctx.with(d, advanced))
}

/// Evaluates a pointwise definition at tags 0, 1, ... until `eod`. If no
/// `eod` shows up within `limit` tags, or an operand runs past its known
/// prefix, the result is an unbounded prefix.
pub fn materialize(
    d: &str,
    base: &Context,
    limit: usize,
    mut at: impl FnMut(&Context) -> Result<Value>,
) -> Result<TagStream> {
    let mut out = Vec::new();
    for tag in 0..limit as u64 {
        match at(&base.with(d, tag)) {
            Ok(Value::Eod) => return Ok(TagStream::bounded(d, out)),
            Ok(v) => out.push(v),
            Err(Error::UnboundedStream(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(TagStream::prefix(d, out))
}

fn reader<'s>(d: &str, s: &'s TagStream) -> impl FnMut(&Context) -> Result<Value> + 's {
    let d = d.to_owned();
    move |c: &Context| s.at_tag(c.query(&d)?)
}

fn scan_limit(streams: &[&TagStream]) -> usize {
    streams.iter().map(|s| s.len()).sum::<usize>() + 2
}

fn require_bounded(s: &TagStream) -> Result<()> {
    if s.is_bounded() {
        Ok(())
    } else {
        Err(Error::UnboundedStream(s.dimension().to_owned()))
    }
}

pub fn first(x: &TagStream) -> Value {
    x.at_tag(0).unwrap_or(Value::Eod)
}

/// `next` read at `tag`.
pub fn next(x: &TagStream, tag: u64) -> Result<Value> {
    let d = x.dimension();
    next_at(&Context::new().with(d, tag), d, &mut reader(d, x))
}

/// `prev` read at `tag`.
pub fn prev(x: &TagStream, tag: u64) -> Result<Value> {
    require_bounded(x)?;
    let d = x.dimension();
    prev_at(&Context::new().with(d, tag), d, &mut reader(d, x))
}

pub fn last(x: &TagStream) -> Result<Value> {
    require_bounded(x)?;
    let d = x.dimension();
    last_at(&Context::new(), d, &mut reader(d, x), x.len() + 1)
}

pub fn iseod(x: &TagStream, tag: u64) -> Result<bool> {
    Ok(x.at_tag(tag)?.is_eod())
}

/// The stream `next.d X`, i.e. `X` without its first element.
pub fn tail(x: &TagStream) -> Result<TagStream> {
    let d = x.dimension();
    materialize(d, &Context::new(), x.len() + 1, |c| {
        next_at(c, d, &mut reader(d, x))
    })
}

pub fn fby(x: &TagStream, y: &TagStream) -> Result<TagStream> {
    let d = x.dimension();
    let limit = scan_limit(&[x, y]);
    materialize(d, &Context::new(), limit, |c| {
        fby_at(c, d, &mut reader(d, x), &mut reader(d, y))
    })
}

pub fn pby(x: &TagStream, y: &TagStream) -> Result<TagStream> {
    let d = x.dimension();
    let limit = scan_limit(&[x, y]);
    materialize(d, &Context::new(), limit, |c| {
        pby_at(c, d, &mut reader(d, x), &mut reader(d, y))
    })
}

pub fn wvr(x: &TagStream, p: &TagStream) -> Result<TagStream> {
    require_bounded(p)?;
    let d = x.dimension();
    let limit = scan_limit(&[x, p]);
    materialize(d, &Context::new(), limit, |c| {
        wvr_at(c, d, &mut reader(d, x), &mut reader(d, p), limit)
    })
}

pub fn asa(x: &TagStream, p: &TagStream) -> Result<Value> {
    require_bounded(p)?;
    let d = x.dimension();
    let limit = scan_limit(&[x, p]);
    asa_at(
        &Context::new(),
        d,
        &mut reader(d, x),
        &mut reader(d, p),
        limit,
    )
}

pub fn upon(x: &TagStream, p: &TagStream) -> Result<TagStream> {
    require_bounded(p)?;
    let d = x.dimension();
    let limit = scan_limit(&[x, p]);
    materialize(d, &Context::new(), limit, |c| {
        upon_at(c, d, &mut reader(d, x), &mut reader(d, p), limit)
    })
}
