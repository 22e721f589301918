//! Recursive-descent parser for Forensic Lucid.
//!
//! ```text
//! program    := expr [";"]
//! expr       := ifexpr { [";"] "where" { decl } "end" }
//! ifexpr     := "if" ifexpr "then" ifexpr [";"] "else" ifexpr | orexpr
//! orexpr     := andexpr { "||" andexpr }
//! andexpr    := cmpexpr { "&&" cmpexpr }
//! cmpexpr    := atexpr { ("==" | "!=" | "in") atexpr }
//! atexpr     := streamexpr { "@" ["." ident] streamexpr }
//! streamexpr := unary { ("fby" | "pby" | "wvr" | "asa" | "upon") "." ident unary }
//! unary      := ("first" | "next" | "last" | "prev" | "iseod") "." ident unary | primary
//! primary    := literal | ident | ident "(" args ")" | "[" args "]"
//!             | "unordered" "{" args "}" | "{" args "}" | "#" ["."] ident
//!             | "(" expr ")" | tuple { tuple } | "$" | "eod" | "+inf"
//! tuple      := "(" expr "," expr "," expr ")"
//! decl       := "dimension" ident ";"
//!             | "observation" ident [ "=" expr ] ";"
//!             | "observation" "sequence" ident "=" expr ";"
//!             | "evidential" "statement" ident "=" expr ";"
//!             | ident [ "(" params ")" ] "=" expr ";"
//! ```
//!
//! `fby` is right-associative, the other binary stream operators are
//! left-associative. Juxtaposed tuples `(A,3,0)(B,2,0)` form an array.

use std::collections::HashMap;

use crate::ast::{Decl, DeclKind, Expr, LogicOp, StreamOp, UnaryOp};
use crate::error::{Error, Result};
use crate::evidence::Observation;
use crate::lexer::{tokenize, Token, TokenKind};
use crate::value::Value;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, offset: usize) -> Option<&Token> {
        self.tokens.get(self.pos + offset)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> Error {
        let (found, line, column) = match self.peek() {
            Some(t) => (t.to_string(), t.line, t.column),
            None => {
                let (line, column) = self
                    .tokens
                    .last()
                    .map(|t| (t.line, t.column + t.lexeme.chars().count()))
                    .unwrap_or((1, 1));
                ("end of input".to_owned(), line, column)
            }
        };
        Error::Parse {
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
            line,
            column,
        }
    }

    fn at(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.peek().is_some_and(|t| t.is(kind, lexeme))
    }

    fn at_punct(&self, p: &str) -> bool {
        self.at(TokenKind::Punct, p)
    }

    fn eat(&mut self, kind: TokenKind, lexeme: &str) -> bool {
        if self.at(kind, lexeme) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, lexeme: &str) -> Result<()> {
        if self.eat(kind, lexeme) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{lexeme}`")]))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => Ok(self.bump().unwrap().lexeme),
            _ => Err(self.error(&["identifier"])),
        }
    }

    /// `"." ident` after a stream operator keyword.
    fn dim_suffix(&mut self) -> Result<String> {
        self.expect(TokenKind::Operator, ".")?;
        self.ident()
    }

    fn semicolon_then(&self, kw: &str) -> bool {
        self.at_punct(";") && self.peek_at(1).is_some_and(|t| t.is_keyword(kw))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.if_expr()?;
        loop {
            if self.semicolon_then("where") {
                self.pos += 1;
            }
            if !self.eat(TokenKind::Keyword, "where") {
                return Ok(e);
            }
            let mut decls = Vec::new();
            while !self.eat(TokenKind::Keyword, "end") {
                if self.peek().is_none() {
                    return Err(self.error(&["declaration", "`end`"]));
                }
                decls.push(self.decl()?);
            }
            e = Expr::Where {
                body: Box::new(e),
                decls,
            };
        }
    }

    fn if_expr(&mut self) -> Result<Expr> {
        if !self.eat(TokenKind::Keyword, "if") {
            return self.or_expr();
        }
        let cond = self.if_expr()?;
        self.expect(TokenKind::Keyword, "then")?;
        let then = self.if_expr()?;
        if self.semicolon_then("else") {
            self.pos += 1;
        }
        self.expect(TokenKind::Keyword, "else")?;
        let otherwise = self.if_expr()?;
        Ok(Expr::If {
            cond: Box::new(cond),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }

    fn logic_chain(
        &mut self,
        ops: &[(TokenKind, &str, LogicOp)],
        next: fn(&mut Self) -> Result<Expr>,
    ) -> Result<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for &(kind, lexeme, op) in ops {
                if self.eat(kind, lexeme) {
                    let rhs = next(self)?;
                    lhs = Expr::Logic {
                        op,
                        lhs: Box::new(lhs),
                        rhs: Box::new(rhs),
                    };
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or_expr(&mut self) -> Result<Expr> {
        self.logic_chain(&[(TokenKind::Operator, "||", LogicOp::Or)], Self::and_expr)
    }

    fn and_expr(&mut self) -> Result<Expr> {
        self.logic_chain(&[(TokenKind::Operator, "&&", LogicOp::And)], Self::cmp_expr)
    }

    fn cmp_expr(&mut self) -> Result<Expr> {
        self.logic_chain(
            &[
                (TokenKind::Operator, "==", LogicOp::Eq),
                (TokenKind::Operator, "!=", LogicOp::Ne),
                (TokenKind::Keyword, "in", LogicOp::In),
            ],
            Self::at_expr,
        )
    }

    fn at_expr(&mut self) -> Result<Expr> {
        let mut e = self.stream_expr()?;
        while self.eat(TokenKind::Operator, "@") {
            let dim = if self.eat(TokenKind::Operator, ".") {
                Some(self.ident()?)
            } else {
                None
            };
            let index = self.stream_expr()?;
            e = Expr::At {
                expr: Box::new(e),
                dim,
                index: Box::new(index),
            };
        }
        Ok(e)
    }

    fn stream_op(&self) -> Option<StreamOp> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => StreamOp::from_keyword(&t.lexeme),
            _ => None,
        }
    }

    fn stream_expr(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.stream_op() {
            self.pos += 1;
            let dim = self.dim_suffix()?;
            let rhs = if op.is_right_assoc() {
                self.stream_expr()?
            } else {
                self.unary()?
            };
            lhs = Expr::Stream {
                op,
                dim,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        let op = match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => UnaryOp::from_keyword(&t.lexeme),
            _ => None,
        };
        match op {
            Some(op) => {
                self.pos += 1;
                let dim = self.dim_suffix()?;
                let expr = self.unary()?;
                Ok(Expr::Unary {
                    op,
                    dim,
                    expr: Box::new(expr),
                })
            }
            None => self.primary(),
        }
    }

    fn args(&mut self, close: &str) -> Result<Vec<Expr>> {
        let mut items = Vec::new();
        if self.eat(TokenKind::Punct, close) {
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.eat(TokenKind::Punct, close) {
                return Ok(items);
            }
            if !self.eat(TokenKind::Punct, ",") {
                return Err(self.error(&["`,`", &format!("`{close}`")]));
            }
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        const EXPECTED: &[&str] = &["expression"];
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error(EXPECTED));
        };
        match tok.kind {
            TokenKind::Int => {
                self.pos += 1;
                let n = tok.lexeme.parse::<i64>().map_err(|_| Error::Parse {
                    expected: vec!["integer that fits in 64 bits".into()],
                    found: tok.lexeme.clone(),
                    line: tok.line,
                    column: tok.column,
                })?;
                Ok(Expr::Literal(Value::Int(n)))
            }
            TokenKind::Atom => {
                self.pos += 1;
                Ok(Expr::Literal(Value::atom(&tok.lexeme)))
            }
            TokenKind::PlusInf => {
                self.pos += 1;
                Ok(Expr::Literal(Value::Inf))
            }
            TokenKind::Dollar => {
                self.pos += 1;
                Ok(Expr::Literal(Value::Observation(Observation::any().into())))
            }
            TokenKind::Keyword if tok.lexeme == "eod" => {
                self.pos += 1;
                Ok(Expr::Literal(Value::Eod))
            }
            TokenKind::Keyword if tok.lexeme == "unordered" => {
                self.pos += 1;
                self.expect(TokenKind::Punct, "{")?;
                Ok(Expr::Unordered(self.args("}")?))
            }
            TokenKind::Ident => {
                self.pos += 1;
                match tok.lexeme.as_str() {
                    "true" => return Ok(Expr::Literal(Value::Bool(true))),
                    "false" => return Ok(Expr::Literal(Value::Bool(false))),
                    _ => {}
                }
                if self.eat(TokenKind::Punct, "(") {
                    let args = self.args(")")?;
                    Ok(Expr::Call {
                        name: tok.lexeme,
                        args,
                    })
                } else {
                    Ok(Expr::Ident(tok.lexeme))
                }
            }
            TokenKind::Operator if tok.lexeme == "#" => {
                self.pos += 1;
                self.eat(TokenKind::Operator, ".");
                Ok(Expr::Hash(self.ident()?))
            }
            TokenKind::Punct if tok.lexeme == "[" => {
                self.pos += 1;
                Ok(Expr::Array(self.args("]")?))
            }
            TokenKind::Punct if tok.lexeme == "{" => {
                self.pos += 1;
                Ok(Expr::Storyboard(self.args("}")?))
            }
            TokenKind::Punct if tok.lexeme == "(" => self.paren_or_tuples(),
            _ => Err(self.error(EXPECTED)),
        }
    }

    fn paren_or_tuples(&mut self) -> Result<Expr> {
        self.expect(TokenKind::Punct, "(")?;
        let first = self.expr()?;
        if self.eat(TokenKind::Punct, ")") {
            return Ok(first);
        }
        let first = self.tuple_rest(first)?;
        if !self.at_punct("(") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat(TokenKind::Punct, "(") {
            let property = self.expr()?;
            items.push(self.tuple_rest(property)?);
        }
        Ok(Expr::Array(items))
    }

    /// The `, min, opt)` part of an observation tuple.
    fn tuple_rest(&mut self, property: Expr) -> Result<Expr> {
        self.expect(TokenKind::Punct, ",")?;
        let min = self.expr()?;
        self.expect(TokenKind::Punct, ",")?;
        let opt = self.expr()?;
        self.expect(TokenKind::Punct, ")")?;
        Ok(Expr::Tuple {
            property: Box::new(property),
            min: Box::new(min),
            opt: Box::new(opt),
        })
    }

    fn terminated(&mut self, decl: Decl) -> Result<Decl> {
        self.expect(TokenKind::Punct, ";")?;
        Ok(decl)
    }

    fn decl(&mut self) -> Result<Decl> {
        if self.eat(TokenKind::Keyword, "dimension") {
            let name = self.ident()?;
            return self.terminated(Decl::new(DeclKind::Dimension, name, None));
        }
        if self.eat(TokenKind::Keyword, "observation") {
            if self.eat(TokenKind::Keyword, "sequence") {
                let name = self.ident()?;
                self.expect(TokenKind::Operator, "=")?;
                let value = self.expr()?;
                return self.terminated(Decl::new(
                    DeclKind::ObservationSequence,
                    name,
                    Some(value),
                ));
            }
            let name = self.ident()?;
            let value = if self.eat(TokenKind::Operator, "=") {
                Some(self.expr()?)
            } else {
                None
            };
            return self.terminated(Decl::new(DeclKind::Observation, name, value));
        }
        if self.eat(TokenKind::Keyword, "evidential") {
            self.expect(TokenKind::Keyword, "statement")?;
            let name = self.ident()?;
            self.expect(TokenKind::Operator, "=")?;
            let value = self.expr()?;
            return self.terminated(Decl::new(
                DeclKind::EvidentialStatement,
                name,
                Some(value),
            ));
        }
        if self.peek().is_some_and(|t| t.kind == TokenKind::Ident) {
            let name = self.ident()?;
            let mut decl = Decl::new(DeclKind::Variable, name, None);
            if self.eat(TokenKind::Punct, "(") {
                decl.kind = DeclKind::Function;
                if !self.eat(TokenKind::Punct, ")") {
                    loop {
                        decl.params.push(self.ident()?);
                        if self.eat(TokenKind::Punct, ")") {
                            break;
                        }
                        self.expect(TokenKind::Punct, ",")?;
                    }
                }
            }
            self.expect(TokenKind::Operator, "=")?;
            decl.value = Some(self.expr()?);
            return self.terminated(decl);
        }
        Err(self.error(&[
            "`dimension`",
            "`observation`",
            "`evidential`",
            "identifier",
            "`end`",
        ]))
    }
}

/// Parses a token sequence into a single top-level expression.
pub fn parse_program(tokens: Vec<Token>) -> Result<Expr> {
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.eat(TokenKind::Punct, ";");
    if p.peek().is_some() {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}

/// Tokenizes, parses and binding-checks source text.
pub fn parse_source(source: &str) -> Result<Expr> {
    let program = parse_program(tokenize(source)?)?;
    check_bindings(&program)?;
    Ok(program)
}

/// Parses source text without the binding pass.
pub fn parse_expr(source: &str) -> Result<Expr> {
    parse_program(tokenize(source)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Dimension,
    Sequence,
    Param,
    Function,
    Other,
}

impl NameKind {
    fn of(decl: &Decl) -> NameKind {
        match decl.kind {
            DeclKind::Dimension => NameKind::Dimension,
            DeclKind::ObservationSequence => NameKind::Sequence,
            DeclKind::Function => NameKind::Function,
            _ => NameKind::Other,
        }
    }

    fn can_be_dimension(self) -> bool {
        matches!(
            self,
            NameKind::Dimension | NameKind::Sequence | NameKind::Param
        )
    }
}

struct Binder {
    scopes: Vec<HashMap<String, NameKind>>,
}

impl Binder {
    fn lookup(&self, name: &str) -> Option<NameKind> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn dimension(&self, name: &str) -> Result<()> {
        match self.lookup(name) {
            Some(k) if k.can_be_dimension() => Ok(()),
            Some(_) => Err(Error::TypeMismatch(format!(
                "`{name}` is used as a dimension but is not declared as one"
            ))),
            None => Err(Error::UnresolvedIdentifier(name.to_owned())),
        }
    }

    fn check(&mut self, e: &Expr) -> Result<()> {
        match e {
            Expr::Literal(_) => Ok(()),
            Expr::Ident(name) => match self.lookup(name) {
                Some(_) => Ok(()),
                None => Err(Error::UnresolvedIdentifier(name.clone())),
            },
            Expr::At { expr, dim, index } => {
                if let Some(d) = dim {
                    self.dimension(d)?;
                }
                self.check(expr)?;
                self.check(index)
            }
            Expr::Hash(d) => self.dimension(d),
            Expr::Unary { dim, expr, .. } => {
                self.dimension(dim)?;
                self.check(expr)
            }
            Expr::Stream { dim, lhs, rhs, .. } => {
                self.dimension(dim)?;
                self.check(lhs)?;
                self.check(rhs)
            }
            Expr::If {
                cond,
                then,
                otherwise,
            } => {
                self.check(cond)?;
                self.check(then)?;
                self.check(otherwise)
            }
            Expr::Array(items) | Expr::Unordered(items) | Expr::Storyboard(items) => {
                items.iter().try_for_each(|i| self.check(i))
            }
            Expr::Tuple { property, min, opt } => {
                self.check(property)?;
                self.check(min)?;
                self.check(opt)
            }
            Expr::Call { name, args } => {
                match self.lookup(name) {
                    Some(NameKind::Function) => {}
                    Some(_) => {
                        return Err(Error::TypeMismatch(format!("`{name}` is not a function")))
                    }
                    None => return Err(Error::UnresolvedIdentifier(name.clone())),
                }
                args.iter().try_for_each(|a| self.check(a))
            }
            Expr::Logic { lhs, rhs, .. } => {
                self.check(lhs)?;
                self.check(rhs)
            }
            Expr::Where { body, decls } => {
                let scope = decls
                    .iter()
                    .map(|d| {
                        // `dimension d;` under a function whose parameter `d`
                        // is a dimension refers to that parameter.
                        let kind = match (d.kind, self.lookup(&d.name)) {
                            (DeclKind::Dimension, Some(NameKind::Param)) => NameKind::Param,
                            _ => NameKind::of(d),
                        };
                        (d.name.clone(), kind)
                    })
                    .collect();
                self.scopes.push(scope);
                let result = self.check(body).and_then(|_| {
                    decls.iter().try_for_each(|d| self.check_decl(d))
                });
                self.scopes.pop();
                result
            }
        }
    }

    fn check_decl(&mut self, d: &Decl) -> Result<()> {
        let Some(value) = &d.value else {
            return Ok(());
        };
        if d.kind != DeclKind::Function {
            return self.check(value);
        }
        self.scopes.push(
            d.params
                .iter()
                .map(|p| (p.clone(), NameKind::Param))
                .collect(),
        );
        let result = self.check(value);
        self.scopes.pop();
        result
    }
}

/// Checks that every identifier resolves to a declaration in an enclosing
/// `where` (or a function parameter), and that every dimension reference
/// names a dimension.
pub fn check_bindings(program: &Expr) -> Result<()> {
    Binder { scopes: Vec::new() }.check(program)
}
