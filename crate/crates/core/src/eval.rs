//! Demand-driven evaluation of programs at a context.
//!
//! Every expression denotes a function from contexts to values; evaluating
//! it means asking for its value at one context. Named declarations are
//! memoized per `(scope, name, context)` when a warehouse is in use.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use crate::ast::{Decl, DeclKind, Expr, LogicOp, StreamOp, UnaryOp};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::evidence::{EvidentialStatement, Observation, ObservationSequence, Opt, Property};
use crate::forensic;
use crate::reconstruction::{check_claim, ClaimConfig};
use crate::stream::TagStream;
use crate::stream_ops;
use crate::value::{PropertySet, Value};

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

/// Memo table for named declarations.
#[derive(Debug, Default)]
pub struct Warehouse {
    entries: HashMap<(u64, String, Context), Value>,
    scope_ids: HashMap<(u64, usize), u64>,
    next_id: u64,
    hits: u64,
    misses: u64,
}

impl Warehouse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }
}

#[derive(Clone)]
enum Binding<'a> {
    Decl(&'a Decl),
    Dimension(String),
    Thunk(&'a Expr, Rc<Scope<'a>>),
    Value(Value),
    Stream(TagStream),
}

struct Scope<'a> {
    id: u64,
    parent: Option<Rc<Scope<'a>>>,
    bindings: HashMap<String, Binding<'a>>,
}

fn lookup<'s, 'a>(
    scope: &'s Rc<Scope<'a>>,
    name: &str,
) -> Option<(&'s Binding<'a>, &'s Rc<Scope<'a>>)> {
    let mut cur = scope;
    loop {
        if let Some(b) = cur.bindings.get(name) {
            return Some((b, cur));
        }
        cur = cur.parent.as_ref()?;
    }
}

/// A function argument supplied from outside a program.
#[derive(Debug, Clone)]
pub enum Arg<'a> {
    /// Evaluated lazily in the program's top-level scope.
    Expr(&'a Expr),
    Value(Value),
    Stream(TagStream),
    Dimension(String),
}

enum ArgIn<'a> {
    Thunk(&'a Expr, Rc<Scope<'a>>),
    Value(Value),
    Stream(TagStream),
    Dimension(String),
}

pub struct Evaluator<'a> {
    program: &'a Expr,
    max_depth: usize,
    depth: Cell<usize>,
    caching: bool,
    wh: RefCell<Warehouse>,
    claim: ClaimConfig,
    root: Rc<Scope<'a>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(program: &'a Expr) -> Self {
        Evaluator {
            program,
            max_depth: DEFAULT_MAX_DEPTH,
            depth: Cell::new(0),
            caching: false,
            wh: RefCell::new(Warehouse::new()),
            claim: ClaimConfig::default(),
            root: Rc::new(Scope {
                id: 0,
                parent: None,
                bindings: HashMap::new(),
            }),
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_claim_config(mut self, cfg: ClaimConfig) -> Self {
        self.claim = cfg;
        self
    }

    /// Turns on memoization, starting from `wh`.
    pub fn with_warehouse(mut self, wh: Warehouse) -> Self {
        self.caching = true;
        self.wh = RefCell::new(wh);
        self
    }

    pub fn into_warehouse(self) -> Warehouse {
        self.wh.into_inner()
    }

    pub fn warehouse(&self) -> std::cell::Ref<'_, Warehouse> {
        self.wh.borrow()
    }

    /// Value of the whole program at `ctx`.
    pub fn eval(&self, ctx: &Context) -> Result<Value> {
        self.eval_in(self.program, &self.root, ctx)
    }

    /// Value of a name declared in the program's outermost `where`.
    pub fn eval_name(&self, name: &str, ctx: &Context) -> Result<Value> {
        let Expr::Where { decls, .. } = self.program else {
            return Err(Error::UnresolvedIdentifier(name.to_owned()));
        };
        let scope = self.where_scope(self.program, decls, &self.root);
        self.ident(name, &scope, ctx)
    }

    /// Calls a function declared in the program's outermost `where`.
    pub fn apply_function(&self, name: &str, args: Vec<Arg<'a>>, ctx: &Context) -> Result<Value> {
        let Expr::Where { decls, .. } = self.program else {
            return Err(Error::UnresolvedIdentifier(name.to_owned()));
        };
        let scope = self.where_scope(self.program, decls, &self.root);
        let (decl, def_scope) = match lookup(&scope, name) {
            Some((Binding::Decl(d), s)) if d.kind == DeclKind::Function => (*d, Rc::clone(s)),
            Some(_) => return Err(Error::TypeMismatch(format!("`{name}` is not a function"))),
            None => return Err(Error::UnresolvedIdentifier(name.to_owned())),
        };
        let args = args
            .into_iter()
            .map(|a| match a {
                Arg::Expr(e) => ArgIn::Thunk(e, Rc::clone(&scope)),
                Arg::Value(v) => ArgIn::Value(v),
                Arg::Stream(s) => ArgIn::Stream(s),
                Arg::Dimension(d) => ArgIn::Dimension(d),
            })
            .collect();
        self.call(decl, &def_scope, args, ctx)
    }

    /// The output of a top-level function read along `dim` from tag 0.
    pub fn function_stream(
        &self,
        name: &str,
        args: &[Arg<'a>],
        dim: &str,
        base: &Context,
        limit: usize,
    ) -> Result<TagStream> {
        stream_ops::materialize(dim, base, limit, |c| {
            self.apply_function(name, args.to_vec(), c)
        })
    }

    fn eval_in(&self, e: &'a Expr, scope: &Rc<Scope<'a>>, ctx: &Context) -> Result<Value> {
        let depth = self.depth.get() + 1;
        if depth > self.max_depth {
            return Err(Error::RecursionLimit(self.max_depth));
        }
        self.depth.set(depth);
        let result = stacker::maybe_grow(64 * 1024, 1024 * 1024, || self.node(e, scope, ctx));
        self.depth.set(depth - 1);
        result
    }

    fn node(&self, e: &'a Expr, scope: &Rc<Scope<'a>>, ctx: &Context) -> Result<Value> {
        match e {
            Expr::Literal(v) => Ok(v.clone()),
            Expr::Ident(name) => self.ident(name, scope, ctx),
            Expr::At {
                expr,
                dim: Some(d),
                index,
            } => {
                let dim = self.dimension(d, scope)?;
                match self.eval_in(index, scope, ctx)? {
                    Value::Int(i) => self.eval_in(expr, scope, &ctx.override_tag(&dim, i)?),
                    Value::Eod => Ok(Value::Eod),
                    other => Err(Error::TypeMismatch(format!(
                        "a tag must be an integer, found {}",
                        other.kind()
                    ))),
                }
            }
            Expr::At {
                expr,
                dim: None,
                index,
            } => match self.eval_in(index, scope, ctx)? {
                Value::Evidence(_) => self.eval_in(expr, scope, ctx),
                other => Err(Error::TypeMismatch(format!(
                    "`@` without a dimension needs an evidential statement, found {}",
                    other.kind()
                ))),
            },
            Expr::Hash(d) => {
                let dim = self.dimension(d, scope)?;
                Ok(Value::Int(ctx.query(&dim)? as i64))
            }
            Expr::Unary { op, dim, expr } => {
                let d = self.dimension(dim, scope)?;
                let mut x = |c: &Context| self.eval_in(expr, scope, c);
                match op {
                    UnaryOp::First => stream_ops::first_at(ctx, &d, &mut x),
                    UnaryOp::Next => stream_ops::next_at(ctx, &d, &mut x),
                    UnaryOp::Prev => stream_ops::prev_at(ctx, &d, &mut x),
                    UnaryOp::Last => stream_ops::last_at(ctx, &d, &mut x, self.max_depth),
                    UnaryOp::IsEod => stream_ops::iseod_at(ctx, &mut x),
                }
            }
            Expr::Stream { op, dim, lhs, rhs } => {
                let d = self.dimension(dim, scope)?;
                let mut x = |c: &Context| self.eval_in(lhs, scope, c);
                let mut y = |c: &Context| self.eval_in(rhs, scope, c);
                let limit = self.max_depth;
                match op {
                    StreamOp::Fby => stream_ops::fby_at(ctx, &d, &mut x, &mut y),
                    StreamOp::Pby => stream_ops::pby_at(ctx, &d, &mut x, &mut y),
                    StreamOp::Wvr => stream_ops::wvr_at(ctx, &d, &mut x, &mut y, limit),
                    StreamOp::Asa => stream_ops::asa_at(ctx, &d, &mut x, &mut y, limit),
                    StreamOp::Upon => stream_ops::upon_at(ctx, &d, &mut x, &mut y, limit),
                }
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => match self.eval_in(cond, scope, ctx)? {
                Value::Bool(true) => self.eval_in(then, scope, ctx),
                Value::Bool(false) => self.eval_in(otherwise, scope, ctx),
                Value::Eod => Ok(Value::Eod),
                other => Err(Error::TypeMismatch(format!(
                    "`if` needs a boolean condition, found {}",
                    other.kind()
                ))),
            },
            Expr::Logic { op, lhs, rhs } => {
                let a = self.eval_in(lhs, scope, ctx)?;
                let b = self.eval_in(rhs, scope, ctx)?;
                logic(*op, a, b)
            }
            Expr::Array(items) => Ok(Value::array(
                items
                    .iter()
                    .map(|i| self.eval_in(i, scope, ctx))
                    .collect::<Result<Vec<_>>>()?,
            )),
            Expr::Unordered(items) => {
                let mut set = PropertySet::new();
                for i in items {
                    match self.eval_in(i, scope, ctx)? {
                        Value::Atom(a) => {
                            set.insert(a);
                        }
                        other => {
                            return Err(Error::TypeMismatch(format!(
                                "`unordered` holds atoms, found {}",
                                other.kind()
                            )))
                        }
                    }
                }
                Ok(Value::Set(set))
            }
            Expr::Storyboard(items) => {
                let mut sequences = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let v = self.eval_in(item, scope, ctx)?;
                    sequences.push(to_sequence(&format!("story{}", i + 1), v)?);
                }
                Ok(Value::Evidence(Arc::new(EvidentialStatement::new(
                    "storyboard",
                    sequences,
                ))))
            }
            Expr::Tuple { property, min, opt } => {
                let p = Property::try_from(&self.eval_in(property, scope, ctx)?)?;
                let min = match self.eval_in(min, scope, ctx)? {
                    Value::Int(n) if n >= 0 => n as u64,
                    other => {
                        return Err(Error::Validation(format!(
                            "observation min must be a non-negative integer, found {other}"
                        )))
                    }
                };
                let opt = match self.eval_in(opt, scope, ctx)? {
                    Value::Int(n) if n >= 0 => Opt::Finite(n as u64),
                    Value::Inf => Opt::Inf,
                    other => {
                        return Err(Error::Validation(format!(
                            "observation opt must be a non-negative integer or +inf, found {other}"
                        )))
                    }
                };
                Ok(Value::Observation(Arc::new(Observation::new(p, min, opt))))
            }
            Expr::Call { name, args } => {
                let (decl, def_scope) = match lookup(scope, name) {
                    Some((Binding::Decl(d), s)) if d.kind == DeclKind::Function => {
                        (*d, Rc::clone(s))
                    }
                    Some(_) => {
                        return Err(Error::TypeMismatch(format!("`{name}` is not a function")))
                    }
                    None => return Err(Error::UnresolvedIdentifier(name.clone())),
                };
                let args = args
                    .iter()
                    .map(|a| ArgIn::Thunk(a, Rc::clone(scope)))
                    .collect();
                self.call(decl, &def_scope, args, ctx)
            }
            Expr::Where { body, decls } => {
                let inner = self.where_scope(e, decls, scope);
                self.eval_in(body, &inner, ctx)
            }
        }
    }

    fn where_scope(&self, node: &'a Expr, decls: &'a [Decl], parent: &Rc<Scope<'a>>) -> Rc<Scope<'a>> {
        let id = {
            let mut wh = self.wh.borrow_mut();
            let key = (parent.id, node as *const Expr as usize);
            match wh.scope_ids.get(&key) {
                Some(&id) => id,
                None => {
                    let id = wh.fresh_id();
                    wh.scope_ids.insert(key, id);
                    id
                }
            }
        };
        let bindings = decls
            .iter()
            .map(|d| {
                let b = match d.kind {
                    DeclKind::Dimension => match lookup(parent, &d.name) {
                        Some((Binding::Dimension(actual), _)) => Binding::Dimension(actual.clone()),
                        _ => Binding::Dimension(d.name.clone()),
                    },
                    _ => Binding::Decl(d),
                };
                (d.name.clone(), b)
            })
            .collect();
        Rc::new(Scope {
            id,
            parent: Some(Rc::clone(parent)),
            bindings,
        })
    }

    /// The context dimension a name refers to.
    fn dimension(&self, name: &str, scope: &Rc<Scope<'a>>) -> Result<String> {
        match lookup(scope, name) {
            Some((Binding::Dimension(actual), _)) => Ok(actual.clone()),
            Some((Binding::Decl(d), _)) if d.kind == DeclKind::ObservationSequence => {
                Ok(d.name.clone())
            }
            Some(_) => Err(Error::TypeMismatch(format!("`{name}` is not a dimension"))),
            None => Err(Error::UnresolvedIdentifier(name.to_owned())),
        }
    }

    fn ident(&self, name: &str, scope: &Rc<Scope<'a>>, ctx: &Context) -> Result<Value> {
        let Some((binding, def_scope)) = lookup(scope, name) else {
            return Err(Error::UnresolvedIdentifier(name.to_owned()));
        };
        match binding {
            Binding::Decl(d) => match (d.kind, &d.value) {
                (DeclKind::Function, _) => Err(Error::TypeMismatch(format!(
                    "function `{name}` used without arguments"
                ))),
                (_, None) => self.cursor(name, scope, ctx),
                (_, Some(_)) => self.decl_value(d, def_scope, ctx),
            },
            Binding::Dimension(_) => Err(Error::TypeMismatch(format!(
                "dimension `{name}` used as a value; query it with #{name}"
            ))),
            Binding::Thunk(e, s) => self.eval_in(e, s, ctx),
            Binding::Value(v) => Ok(v.clone()),
            Binding::Stream(s) => s.at(ctx),
        }
    }

    /// A bare `observation o;` reads the property at the current index of
    /// whichever visible observation sequence is bound in the context.
    fn cursor(&self, name: &str, scope: &Rc<Scope<'a>>, ctx: &Context) -> Result<Value> {
        let mut cur = Some(scope);
        while let Some(s) = cur {
            let mut candidates: Vec<&'a Decl> = s
                .bindings
                .values()
                .filter_map(|b| match b {
                    Binding::Decl(d)
                        if d.kind == DeclKind::ObservationSequence && ctx.get(&d.name).is_some() =>
                    {
                        Some(*d)
                    }
                    _ => None,
                })
                .collect();
            candidates.sort_by(|a, b| a.name.cmp(&b.name));
            if let Some(d) = candidates.first() {
                let tag = ctx.query(&d.name)?;
                return match self.decl_value(d, s, ctx)? {
                    Value::Sequence(os) => forensic::at_obs(&os, tag),
                    other => Err(Error::TypeMismatch(format!(
                        "`{}` is not an observation sequence: {}",
                        d.name,
                        other.kind()
                    ))),
                };
            }
            cur = s.parent.as_ref();
        }
        Err(Error::Validation(format!(
            "observation `{name}` is only meaningful at an observation sequence index, \
             e.g. `{name} @.obs 0`"
        )))
    }

    fn decl_value(&self, d: &'a Decl, def_scope: &Rc<Scope<'a>>, ctx: &Context) -> Result<Value> {
        let key = self.caching.then(|| (def_scope.id, d.name.clone(), ctx.clone()));
        if let Some(k) = &key {
            let mut wh = self.wh.borrow_mut();
            if let Some(v) = wh.entries.get(k).cloned() {
                wh.hits += 1;
                return Ok(v);
            }
            wh.misses += 1;
        }
        let body = d.value.as_ref().expect("declarations with values only");
        let raw = self.eval_in(body, def_scope, ctx)?;
        let v = match d.kind {
            DeclKind::Observation => match raw {
                Value::Observation(_) => raw,
                other => {
                    return Err(Error::TypeMismatch(format!(
                        "observation `{}` must be a (P, min, opt) tuple, found {}",
                        d.name,
                        other.kind()
                    )))
                }
            },
            DeclKind::ObservationSequence => {
                Value::Sequence(Arc::new(to_sequence(&d.name, raw)?))
            }
            DeclKind::EvidentialStatement => {
                Value::Evidence(Arc::new(to_statement(&d.name, raw)?))
            }
            _ => raw,
        };
        if let Some(k) = key {
            self.wh.borrow_mut().entries.insert(k, v.clone());
        }
        Ok(v)
    }

    fn call(
        &self,
        decl: &'a Decl,
        def_scope: &Rc<Scope<'a>>,
        args: Vec<ArgIn<'a>>,
        ctx: &Context,
    ) -> Result<Value> {
        if args.len() != decl.params.len() {
            return Err(Error::ArityMismatch {
                name: decl.name.clone(),
                expected: decl.params.len(),
                found: args.len(),
            });
        }
        let body = decl.value.as_ref().expect("functions have bodies");
        let mut dims = Vec::new();
        body.dimension_refs(&mut dims);

        let mut bindings = HashMap::new();
        let mut evidence = None;
        let mut checks = Vec::new();
        for (param, arg) in decl.params.iter().zip(args) {
            let binding = if dims.contains(param) {
                let value = match arg {
                    ArgIn::Dimension(d) => {
                        bindings.insert(param.clone(), Binding::Dimension(d));
                        continue;
                    }
                    ArgIn::Thunk(e, s) => {
                        if let Expr::Ident(n) = e {
                            if let Ok(actual) = self.dimension(n, &s) {
                                bindings.insert(param.clone(), Binding::Dimension(actual));
                                continue;
                            }
                        }
                        self.eval_in(e, &s, ctx)?
                    }
                    ArgIn::Value(v) => v,
                    ArgIn::Stream(_) => Value::Eod,
                };
                match value {
                    Value::Evidence(es) => {
                        evidence = Some(es);
                        continue;
                    }
                    other => {
                        return Err(Error::TypeMismatch(format!(
                            "parameter `{param}` of `{}` is a dimension; got {}",
                            decl.name,
                            other.kind()
                        )))
                    }
                }
            } else {
                match arg {
                    ArgIn::Thunk(e, s) => {
                        checks.push((e, Rc::clone(&s)));
                        Binding::Thunk(e, s)
                    }
                    ArgIn::Value(v) => Binding::Value(v),
                    ArgIn::Stream(s) => Binding::Stream(s),
                    ArgIn::Dimension(d) => Binding::Dimension(d),
                }
            };
            bindings.insert(param.clone(), binding);
        }

        // Evaluating a function against a whole evidential statement asks
        // whether the statement has an explanation.
        if let Some(es) = evidence {
            for (e, s) in checks {
                self.eval_in(e, &s, ctx)?;
            }
            return Ok(Value::Verdict(Arc::new(check_claim(&es, &self.claim)?)));
        }

        let id = self.wh.borrow_mut().fresh_id();
        let scope = Rc::new(Scope {
            id,
            parent: Some(Rc::clone(def_scope)),
            bindings,
        });
        self.eval_in(body, &scope, ctx)
    }
}

fn logic(op: LogicOp, a: Value, b: Value) -> Result<Value> {
    if a.is_eod() || b.is_eod() {
        return Ok(Value::Eod);
    }
    match op {
        LogicOp::Eq => Ok(Value::Bool(a == b)),
        LogicOp::Ne => Ok(Value::Bool(a != b)),
        LogicOp::In => match (&a, &b) {
            (Value::Atom(x), Value::Set(s)) => Ok(Value::Bool(s.contains(x.as_str()))),
            (_, Value::Array(items)) => Ok(Value::Bool(items.contains(&a))),
            _ => Err(Error::TypeMismatch(format!(
                "`in` needs a property set or array on the right, found {} in {}",
                a.kind(),
                b.kind()
            ))),
        },
        LogicOp::And | LogicOp::Or => match (a, b) {
            (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(if op == LogicOp::And {
                x && y
            } else {
                x || y
            })),
            (x, y) => Err(Error::TypeMismatch(format!(
                "`{}` needs booleans, found {} and {}",
                op.symbol(),
                x.kind(),
                y.kind()
            ))),
        },
    }
}

fn to_sequence(name: &str, v: Value) -> Result<ObservationSequence> {
    let mut observations = Vec::new();
    match v {
        Value::Observation(o) => observations.push((*o).clone()),
        Value::Sequence(os) => observations.extend(os.observations.iter().cloned()),
        Value::Array(items) => {
            for item in items.iter() {
                match item {
                    Value::Observation(o) => observations.push((**o).clone()),
                    Value::Sequence(os) => observations.extend(os.observations.iter().cloned()),
                    other => {
                        return Err(Error::TypeMismatch(format!(
                            "observation sequence `{name}` holds observations, found {}",
                            other.kind()
                        )))
                    }
                }
            }
        }
        other => {
            return Err(Error::TypeMismatch(format!(
                "observation sequence `{name}` holds observations, found {}",
                other.kind()
            )))
        }
    }
    Ok(ObservationSequence::new(name, observations))
}

fn to_statement(name: &str, v: Value) -> Result<EvidentialStatement> {
    let not_sequence = |kind: &str| {
        Error::TypeMismatch(format!(
            "evidential statement `{name}` holds observation sequences, found {kind}"
        ))
    };
    let sequences = match v {
        Value::Sequence(os) => vec![(*os).clone()],
        Value::Evidence(es) => es.sequences.clone(),
        Value::Array(items) => items
            .iter()
            .map(|i| match i {
                Value::Sequence(os) => Ok((**os).clone()),
                other => Err(not_sequence(other.kind())),
            })
            .collect::<Result<Vec<_>>>()?,
        other => return Err(not_sequence(other.kind())),
    };
    Ok(EvidentialStatement::new(name, sequences))
}

/// Evaluates a program at `ctx` without memoization.
pub fn eval(program: &Expr, ctx: &Context) -> Result<Value> {
    Evaluator::new(program).eval(ctx)
}

/// Evaluates a program at `ctx`, reading and filling `wh`. A warehouse must
/// only ever be used with one program.
pub fn eval_cached(program: &Expr, ctx: &Context, wh: &mut Warehouse) -> Result<Value> {
    let ev = Evaluator::new(program).with_warehouse(std::mem::take(wh));
    let result = ev.eval(ctx);
    *wh = ev.into_warehouse();
    result
}
