//! Syntax tree for Forensic Lucid programs and its pretty-printer.
//!
//! The printer emits canonical source that parses back to an identical tree;
//! it inserts parentheses only where precedence or associativity requires.

use std::fmt::{self, Write};

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    First,
    Next,
    Last,
    Prev,
    IsEod,
}

impl UnaryOp {
    pub fn keyword(self) -> &'static str {
        match self {
            UnaryOp::First => "first",
            UnaryOp::Next => "next",
            UnaryOp::Last => "last",
            UnaryOp::Prev => "prev",
            UnaryOp::IsEod => "iseod",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "first" => UnaryOp::First,
            "next" => UnaryOp::Next,
            "last" => UnaryOp::Last,
            "prev" => UnaryOp::Prev,
            "iseod" => UnaryOp::IsEod,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamOp {
    Fby,
    Pby,
    Wvr,
    Asa,
    Upon,
}

impl StreamOp {
    pub fn keyword(self) -> &'static str {
        match self {
            StreamOp::Fby => "fby",
            StreamOp::Pby => "pby",
            StreamOp::Wvr => "wvr",
            StreamOp::Asa => "asa",
            StreamOp::Upon => "upon",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Some(match kw {
            "fby" => StreamOp::Fby,
            "pby" => StreamOp::Pby,
            "wvr" => StreamOp::Wvr,
            "asa" => StreamOp::Asa,
            "upon" => StreamOp::Upon,
            _ => return None,
        })
    }

    /// Only `fby` groups to the right; `pby` chains build traces left to
    /// right (`s pby.d x pby.d e` puts `e` in front of `x` in front of `s`).
    pub fn is_right_assoc(self) -> bool {
        self == StreamOp::Fby
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicOp {
    Eq,
    Ne,
    In,
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::Eq => "==",
            LogicOp::Ne => "!=",
            LogicOp::In => "in",
            LogicOp::And => "&&",
            LogicOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(Value),
    Ident(String),
    /// `expr @.dim index`; without a dimension, `expr @ es` evaluates `expr`
    /// against an evidential statement.
    At {
        expr: Box<Expr>,
        dim: Option<String>,
        index: Box<Expr>,
    },
    Hash(String),
    Unary {
        op: UnaryOp,
        dim: String,
        expr: Box<Expr>,
    },
    Stream {
        op: StreamOp,
        dim: String,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    If {
        cond: Box<Expr>,
        then: Box<Expr>,
        otherwise: Box<Expr>,
    },
    Array(Vec<Expr>),
    Unordered(Vec<Expr>),
    /// `{[...], ...}`: an evidential statement written as a set of stories.
    Storyboard(Vec<Expr>),
    /// `(P, min, opt)`
    Tuple {
        property: Box<Expr>,
        min: Box<Expr>,
        opt: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
    },
    Where {
        body: Box<Expr>,
        decls: Vec<Decl>,
    },
    Logic {
        op: LogicOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeclKind {
    Dimension,
    Observation,
    ObservationSequence,
    EvidentialStatement,
    Variable,
    Function,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: String,
    pub params: Vec<String>,
    /// `None` for `dimension d;` and for a bare `observation o;`.
    pub value: Option<Expr>,
}

impl Decl {
    pub fn new(kind: DeclKind, name: impl Into<String>, value: Option<Expr>) -> Self {
        Decl {
            kind,
            name: name.into(),
            params: Vec::new(),
            value,
        }
    }
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_owned())
    }

    /// Declarations of the outermost `where`, if the expression is one.
    pub fn decls(&self) -> &[Decl] {
        match self {
            Expr::Where { decls, .. } => decls,
            _ => &[],
        }
    }

    pub fn find_decl(&self, name: &str) -> Option<&Decl> {
        self.decls().iter().find(|d| d.name == name)
    }

    /// Binding strength, loosest first.
    fn level(&self) -> u8 {
        match self {
            Expr::Where { .. } => 0,
            Expr::If { .. } => 1,
            Expr::Logic { op: LogicOp::Or, .. } => 2,
            Expr::Logic { op: LogicOp::And, .. } => 3,
            Expr::Logic { .. } => 4,
            Expr::At { .. } => 5,
            Expr::Stream { .. } => 6,
            Expr::Unary { .. } => 7,
            _ => 8,
        }
    }

    /// Every name used as a dimension (`.d` suffixes and `#d`).
    pub fn dimension_refs(&self, out: &mut Vec<String>) {
        match self {
            Expr::At { expr, dim, index } => {
                out.extend(dim.iter().cloned());
                expr.dimension_refs(out);
                index.dimension_refs(out);
            }
            Expr::Hash(d) => out.push(d.clone()),
            Expr::Unary { dim, expr, .. } => {
                out.push(dim.clone());
                expr.dimension_refs(out);
            }
            Expr::Stream { dim, lhs, rhs, .. } => {
                out.push(dim.clone());
                lhs.dimension_refs(out);
                rhs.dimension_refs(out);
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                for e in [cond, then, otherwise] {
                    e.dimension_refs(out);
                }
            }
            Expr::Array(items) | Expr::Unordered(items) | Expr::Storyboard(items) => {
                items.iter().for_each(|e| e.dimension_refs(out))
            }
            Expr::Call { args, .. } => args.iter().for_each(|e| e.dimension_refs(out)),
            Expr::Tuple { property, min, opt } => {
                for e in [property, min, opt] {
                    e.dimension_refs(out);
                }
            }
            Expr::Where { body, decls } => {
                body.dimension_refs(out);
                for d in decls {
                    if d.kind == DeclKind::Dimension {
                        out.push(d.name.clone());
                    }
                    if let Some(v) = &d.value {
                        v.dimension_refs(out);
                    }
                }
            }
            Expr::Logic { lhs, rhs, .. } => {
                lhs.dimension_refs(out);
                rhs.dimension_refs(out);
            }
            Expr::Literal(_) | Expr::Ident(_) => {}
        }
    }
}

/// Renders an atom label with whichever quote it does not contain.
fn quote_atom(label: &str) -> String {
    if label.contains('\'') {
        format!("\"{label}\"")
    } else {
        format!("'{label}'")
    }
}

fn literal(v: &Value) -> String {
    match v {
        Value::Atom(a) => quote_atom(a.as_str()),
        Value::Observation(o) if o.is_any() => "$".into(),
        other => other.to_string(),
    }
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    fn list(&mut self, items: &[Expr]) {
        for (i, e) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(e, 0);
        }
    }

    fn expr(&mut self, e: &Expr, min_level: u8) {
        let parens = e.level() < min_level;
        if parens {
            self.out.push('(');
        }
        self.bare(e);
        if parens {
            self.out.push(')');
        }
    }

    fn bare(&mut self, e: &Expr) {
        match e {
            Expr::Literal(v) => self.out.push_str(&literal(v)),
            Expr::Ident(n) => self.out.push_str(n),
            Expr::At { expr, dim, index } => {
                self.expr(expr, 5);
                match dim {
                    Some(d) => {
                        let _ = write!(self.out, " @.{d} ");
                    }
                    None => self.out.push_str(" @ "),
                }
                self.expr(index, 6);
            }
            Expr::Hash(d) => {
                let _ = write!(self.out, "#{d}");
            }
            Expr::Unary { op, dim, expr } => {
                let _ = write!(self.out, "{}.{dim} ", op.keyword());
                self.expr(expr, 7);
            }
            Expr::Stream { op, dim, lhs, rhs } => {
                let (l, r) = if op.is_right_assoc() { (7, 6) } else { (6, 7) };
                self.expr(lhs, l);
                let _ = write!(self.out, " {}.{dim} ", op.keyword());
                self.expr(rhs, r);
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                self.out.push_str("if ");
                self.expr(cond, 1);
                self.out.push_str(" then ");
                self.expr(then, 1);
                self.out.push_str(" else ");
                self.expr(otherwise, 1);
            }
            Expr::Array(items) => {
                self.out.push('[');
                self.list(items);
                self.out.push(']');
            }
            Expr::Unordered(items) => {
                self.out.push_str("unordered {");
                self.list(items);
                self.out.push('}');
            }
            Expr::Storyboard(items) => {
                self.out.push('{');
                self.list(items);
                self.out.push('}');
            }
            Expr::Tuple { property, min, opt } => {
                self.out.push('(');
                self.list(&[(**property).clone(), (**min).clone(), (**opt).clone()]);
                self.out.push(')');
            }
            Expr::Call { name, args } => {
                self.out.push_str(name);
                self.out.push('(');
                self.list(args);
                self.out.push(')');
            }
            Expr::Logic { op, lhs, rhs } => {
                let level = e.level();
                self.expr(lhs, level);
                let _ = write!(self.out, " {} ", op.symbol());
                self.expr(rhs, level + 1);
            }
            Expr::Where { body, decls } => {
                self.expr(body, 1);
                self.newline();
                self.out.push_str("where");
                self.indent += 1;
                for d in decls {
                    self.newline();
                    self.decl(d);
                }
                self.indent -= 1;
                self.newline();
                self.out.push_str("end");
            }
        }
    }

    fn decl(&mut self, d: &Decl) {
        match d.kind {
            DeclKind::Dimension => {
                let _ = write!(self.out, "dimension {}", d.name);
            }
            DeclKind::Observation => {
                let _ = write!(self.out, "observation {}", d.name);
            }
            DeclKind::ObservationSequence => {
                let _ = write!(self.out, "observation sequence {}", d.name);
            }
            DeclKind::EvidentialStatement => {
                let _ = write!(self.out, "evidential statement {}", d.name);
            }
            DeclKind::Variable => self.out.push_str(&d.name),
            DeclKind::Function => {
                let _ = write!(self.out, "{}({})", d.name, d.params.join(", "));
            }
        }
        if let Some(v) = &d.value {
            self.out.push_str(" = ");
            self.expr(v, 0);
        }
        self.out.push(';');
    }
}

/// Canonical source text for an expression.
pub fn pretty(e: &Expr) -> String {
    let mut p = Printer {
        out: String::new(),
        indent: 0,
    };
    p.expr(e, 0);
    p.out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
