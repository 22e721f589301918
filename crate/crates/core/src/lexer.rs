use std::fmt;

use crate::error::{Error, Result};

pub const KEYWORDS: &[&str] = &[
    "where",
    "end",
    "dimension",
    "observation",
    "sequence",
    "evidential",
    "statement",
    "if",
    "then",
    "else",
    "unordered",
    "eod",
    "first",
    "next",
    "fby",
    "pby",
    "last",
    "prev",
    "wvr",
    "asa",
    "upon",
    "iseod",
    "in",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    /// A quoted atom; the lexeme holds the text between the quotes.
    Atom,
    Int,
    PlusInf,
    Dollar,
    Keyword,
    Operator,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.is(TokenKind::Keyword, kw)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Atom => write!(f, "'{}'", self.lexeme),
            _ => write!(f, "`{}`", self.lexeme),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn lex_error(&self, message: impl Into<String>, line: usize, column: usize) -> Error {
        Error::Lex {
            message: message.into(),
            line,
            column,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Splits source text into tokens, dropping whitespace and comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let token = |kind, lexeme: String| Token {
            kind,
            lexeme,
            line,
            column,
        };

        if c.is_whitespace() {
            cur.bump();
            continue;
        }

        if c == '/' {
            cur.bump();
            match cur.peek() {
                Some('/') => {
                    while cur.peek().is_some_and(|c| c != '\n') {
                        cur.bump();
                    }
                }
                Some('*') => {
                    cur.bump();
                    let mut prev = '\0';
                    loop {
                        match cur.bump() {
                            Some('/') if prev == '*' => break,
                            Some(c) => prev = c,
                            None => {
                                return Err(cur.lex_error(
                                    "unterminated block comment",
                                    line,
                                    column,
                                ))
                            }
                        }
                    }
                }
                _ => return Err(cur.lex_error("unexpected `/`", line, column)),
            }
            continue;
        }

        if c == '\'' || c == '"' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    Some(q) if q == c => break,
                    Some('\n') | None => {
                        return Err(cur.lex_error("unterminated atom literal", line, column))
                    }
                    Some(ch) => text.push(ch),
                }
            }
            tokens.push(token(TokenKind::Atom, text));
            continue;
        }

        if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                text.push(d);
                cur.bump();
            }
            tokens.push(token(TokenKind::Int, text));
            continue;
        }

        if is_ident_start(c) {
            let mut text = String::new();
            while let Some(ch) = cur.peek().filter(|&ch| is_ident_continue(ch)) {
                text.push(ch);
                cur.bump();
            }
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(token(kind, text));
            continue;
        }

        cur.bump();
        let two = |cur: &mut Cursor, second: char| {
            if cur.peek() == Some(second) {
                cur.bump();
                true
            } else {
                false
            }
        };
        match c {
            '+' => {
                let mut word = String::new();
                while let Some(ch) = cur.peek().filter(|&ch| is_ident_continue(ch)) {
                    word.push(ch);
                    cur.bump();
                }
                if word != "inf" {
                    return Err(cur.lex_error("`+` is only valid in `+inf`", line, column));
                }
                tokens.push(token(TokenKind::PlusInf, "+inf".into()));
            }
            '$' => tokens.push(token(TokenKind::Dollar, "$".into())),
            '=' if two(&mut cur, '=') => tokens.push(token(TokenKind::Operator, "==".into())),
            '!' if two(&mut cur, '=') => tokens.push(token(TokenKind::Operator, "!=".into())),
            '&' if two(&mut cur, '&') => tokens.push(token(TokenKind::Operator, "&&".into())),
            '|' if two(&mut cur, '|') => tokens.push(token(TokenKind::Operator, "||".into())),
            '=' | '@' | '.' | '#' => tokens.push(token(TokenKind::Operator, c.to_string())),
            '(' | ')' | '[' | ']' | '{' | '}' | ',' | ';' => {
                tokens.push(token(TokenKind::Punct, c.to_string()))
            }
            other => {
                return Err(cur.lex_error(format!("unexpected character `{other}`"), line, column))
            }
        }
    }
    Ok(tokens)
}
