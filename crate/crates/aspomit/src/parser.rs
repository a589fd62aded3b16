//! Text format for ground programs (`.lp`) and omission sets (`.omit`).
//!
//! Grammar:
//!
//! ```text
//! program := rule*
//! rule    := head? (":-" body)? "."
//! head    := atom | "{" atom "}" | atom ("|" atom)+
//! body    := literal ("," literal)*
//! literal := ["not" ["not"]] atom
//! atom    := lowercase-ident ["(" const ("," const)* ")"]
//! const   := lowercase-ident | integer | quoted-string
//! ```
//!
//! `%` starts a comment running to end of line. Identifiers starting with an
//! uppercase letter or `_` look like variables and are rejected (input must
//! be ground); the `__` prefix is reserved for tool-generated atoms.

use crate::program::{Atom, Head, Program, RuleShape, GENERATED_PREFIX};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    ReservedPrefix,
    NonGround,
    DuplicateLiteral,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax",
            ParseErrorKind::ReservedPrefix => "reserved-prefix",
            ParseErrorKind::NonGround => "non-ground",
            ParseErrorKind::DuplicateLiteral => "duplicate-literal",
        })
    }
}

#[derive(Debug, Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    /// 1-based line of the offending token.
    pub line: usize,
    /// 1-based column of the offending token.
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            kind,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Pipe,
    ColonDash,
    Period,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Str(s) => format!("string {s}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::Period => "`.`".into(),
        }
    }
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut it = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = it.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = it.peek() {
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while let Some(&c) = it.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        let tok = match c {
            '{' => {
                bump!();
                Tok::LBrace
            }
            '}' => {
                bump!();
                Tok::RBrace
            }
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            '|' => {
                bump!();
                Tok::Pipe
            }
            '.' => {
                bump!();
                Tok::Period
            }
            ':' => {
                bump!();
                if it.peek() == Some(&'-') {
                    bump!();
                    Tok::ColonDash
                } else {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        tl,
                        tc,
                        "expected `:-`",
                    ));
                }
            }
            '"' => {
                bump!();
                let mut s = String::from('"');
                loop {
                    match it.peek() {
                        Some('"') => {
                            bump!();
                            s.push('"');
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError::new(
                                ParseErrorKind::Syntax,
                                tl,
                                tc,
                                "unterminated string literal",
                            ));
                        }
                        Some(_) => s.push(bump!()),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(bump!());
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&c) = it.peek() {
                    if c.is_ascii_digit() {
                        s.push(bump!());
                    } else {
                        break;
                    }
                }
                Tok::Int(s)
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    tl,
                    tc,
                    format!("unexpected character `{other}`"),
                ));
            }
        };
        out.push(Token {
            tok,
            line: tl,
            col: tc,
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn current(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.current() {
            Some(t) => (t.line, t.col),
            None => (self.end_line, self.end_col),
        }
    }

    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(kind, line, column, message)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.current() {
            Some(t) if t.tok == want => {
                self.advance();
                Ok(())
            }
            Some(t) => Err(ParseError::new(
                ParseErrorKind::Syntax,
                t.line,
                t.col,
                format!("expected {what}, found {}", t.tok.describe()),
            )),
            None => Err(self.err(
                ParseErrorKind::Syntax,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    /// Parses `ident [ "(" const ("," const)* ")" ]` into a canonical atom
    /// (argument list re-rendered without spaces).
    fn parse_atom(&mut self) -> Result<Atom, ParseError> {
        let (line, col) = self.here();
        let name = match self.current() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => s.clone(),
            Some(t) => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    t.line,
                    t.col,
                    format!("expected atom, found {}", t.tok.describe()),
                ));
            }
            None => {
                return Err(self.err(ParseErrorKind::Syntax, "expected atom, found end of input"));
            }
        };
        if name == "not" {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                line,
                col,
                "`not` is a keyword, not an atom name",
            ));
        }
        if name.starts_with(GENERATED_PREFIX) {
            return Err(ParseError::new(
                ParseErrorKind::ReservedPrefix,
                line,
                col,
                format!("atom `{name}` uses the reserved `__` prefix"),
            ));
        }
        if !name.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(ParseError::new(
                ParseErrorKind::NonGround,
                line,
                col,
                format!("`{name}` looks like a variable; input must be ground"),
            ));
        }
        self.advance();
        let mut text = name;
        if matches!(self.current(), Some(t) if t.tok == Tok::LParen) {
            self.advance();
            text.push('(');
            loop {
                let arg = self.parse_const()?;
                text.push_str(&arg);
                match self.current() {
                    Some(t) if t.tok == Tok::Comma => {
                        self.advance();
                        text.push(',');
                    }
                    Some(t) if t.tok == Tok::RParen => {
                        self.advance();
                        text.push(')');
                        break;
                    }
                    _ => {
                        return Err(self.err(
                            ParseErrorKind::Syntax,
                            "expected `,` or `)` in argument list",
                        ));
                    }
                }
            }
        }
        Ok(Atom::new(text))
    }

    fn parse_const(&mut self) -> Result<String, ParseError> {
        match self.current() {
            Some(Token {
                tok: Tok::Ident(s),
                line,
                col,
            }) => {
                if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
                    return Err(ParseError::new(
                        ParseErrorKind::NonGround,
                        *line,
                        *col,
                        format!("`{s}` looks like a variable; input must be ground"),
                    ));
                }
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            Some(Token {
                tok: Tok::Int(s), ..
            }) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            Some(Token {
                tok: Tok::Str(s), ..
            }) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.err(
                ParseErrorKind::Syntax,
                "expected constant (identifier, integer, or string)",
            )),
        }
    }

    /// Returns (negation depth 0|1|2, atom).
    fn parse_literal(&mut self) -> Result<(u8, Atom), ParseError> {
        let mut nots = 0u8;
        while nots < 2 {
            match self.current() {
                Some(Token {
                    tok: Tok::Ident(s), ..
                }) if s == "not" => {
                    self.advance();
                    nots += 1;
                }
                _ => break,
            }
        }
        let atom = self.parse_atom()?;
        Ok((nots, atom))
    }

    fn parse_rule(&mut self) -> Result<RuleShape, ParseError> {
        let head = match self.current() {
            Some(t) if t.tok == Tok::ColonDash => Head::Bottom,
            Some(t) if t.tok == Tok::LBrace => {
                self.advance();
                let a = self.parse_atom()?;
                self.expect(Tok::RBrace, "`}`")?;
                Head::Choice(a)
            }
            Some(t) if t.tok == Tok::Period => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    t.line,
                    t.col,
                    "empty rule",
                ));
            }
            _ => {
                let first = self.parse_atom()?;
                if matches!(self.current(), Some(t) if t.tok == Tok::Pipe) {
                    let mut disjuncts = vec![first];
                    while matches!(self.current(), Some(t) if t.tok == Tok::Pipe) {
                        self.advance();
                        let (line, col) = self.here();
                        let next = self.parse_atom()?;
                        if disjuncts.contains(&next) {
                            return Err(ParseError::new(
                                ParseErrorKind::DuplicateLiteral,
                                line,
                                col,
                                format!("duplicate disjunct `{next}`"),
                            ));
                        }
                        disjuncts.push(next);
                    }
                    Head::Disjunction(disjuncts)
                } else {
                    Head::Plain(first)
                }
            }
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut negneg = Vec::new();
        if matches!(self.current(), Some(t) if t.tok == Tok::ColonDash) {
            self.advance();
            loop {
                let (nots, atom) = self.parse_literal()?;
                match nots {
                    0 => pos.push(atom),
                    1 => neg.push(atom),
                    _ => negneg.push(atom),
                }
                if matches!(self.current(), Some(t) if t.tok == Tok::Comma) {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Period, "`.`")?;
        Ok((head, pos, neg, negneg))
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for c in text.chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

/// Parses a ground program. Rules are numbered `r1..rn` in textual order.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let (end_line, end_col) = end_position(text);
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end_line,
        end_col,
    };
    let mut shapes = Vec::new();
    while p.current().is_some() {
        shapes.push(p.parse_rule()?);
    }
    Ok(Program::new(shapes))
}

/// Parses a sequence of atoms separated by whitespace, commas, or newlines
/// (the `.omit` file format; `%` comments allowed).
pub fn parse_atoms(text: &str) -> Result<Vec<Atom>, ParseError> {
    let (end_line, end_col) = end_position(text);
    let mut p = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        end_line,
        end_col,
    };
    let mut atoms = Vec::new();
    while let Some(t) = p.current() {
        if t.tok == Tok::Comma {
            p.advance();
            continue;
        }
        atoms.push(p.parse_atom()?);
    }
    Ok(atoms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerializeStyle {
    /// One rule per line, `:-` separator, single space after commas.
    Canonical,
    /// Canonical, with a `% name:` comment line before each rule.
    Annotated,
}

/// Renders one rule in canonical syntax (no trailing newline).
pub fn rule_text(rule: &crate::program::Rule) -> String {
    let head = match &rule.head {
        Head::Bottom => String::new(),
        Head::Plain(a) => a.to_string(),
        Head::Choice(a) => format!("{{{a}}}"),
        Head::Disjunction(ds) => ds
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(" | "),
    };
    let body: Vec<String> = rule
        .pos_body()
        .iter()
        .map(|a| a.to_string())
        .chain(rule.neg_body().iter().map(|a| format!("not {a}")))
        .chain(rule.negneg_body().iter().map(|a| format!("not not {a}")))
        .collect();
    if body.is_empty() {
        format!("{head}.")
    } else if head.is_empty() {
        format!(":- {}.", body.join(", "))
    } else {
        format!("{head} :- {}.", body.join(", "))
    }
}

/// Serializes a program; `parse(serialize(p))` equals `p` up to rule ids.
pub fn serialize(program: &Program, style: SerializeStyle) -> String {
    let mut lines = Vec::new();
    for r in program.rules() {
        if style == SerializeStyle::Annotated {
            lines.push(format!("% {}:", r.name));
        }
        lines.push(rule_text(r));
    }
    lines.join("\n")
}
