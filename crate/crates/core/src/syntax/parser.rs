//! Recursive descent parser for the concrete formula syntax.
//!
//! ```text
//! formula := impl
//! impl    := or ("->" impl)?
//! or      := and ("v" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "E@" ident unary | "B@" ident unary | postfix
//! postfix := atom ("^" "{" nat "/" nat "}")*
//! atom    := "T" | "F" | ident
//!          | "(" formula "?" formula ":" formula ")"
//!          | "(" formula ")"
//!          | "[" formula "|" formula "]" "@" ident
//! ```

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::Formula;

/// Nesting limit; deeper inputs are rejected instead of overflowing the stack.
const MAX_DEPTH: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// A character that cannot start any token.
    Lexical(char),
    /// A symbol that looks like an operator but is not part of the language.
    UnknownOperator(String),
    /// A closing delimiter without an opener, or an opener never closed.
    Unbalanced(String),
    /// A conditional `[..|..]` not followed by `@agent`, or `E@`/`B@` without a name.
    MissingAgent,
    UnexpectedToken { found: String, expected: String },
    UnexpectedEnd { expected: String },
    NumberTooLarge,
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::UnknownOperator(s) => write!(f, "unknown operator `{s}`"),
            ParseErrorKind::Unbalanced(s) => write!(f, "unbalanced delimiters: {s}"),
            ParseErrorKind::MissingAgent => write!(f, "missing agent subscript `@name`"),
            ParseErrorKind::UnexpectedToken { found, expected } => {
                write!(f, "expected {expected}, found `{found}`")
            }
            ParseErrorKind::UnexpectedEnd { expected } => {
                write!(f, "expected {expected}, found end of input")
            }
            ParseErrorKind::NumberTooLarge => write!(f, "number does not fit in 32 bits"),
            ParseErrorKind::TooDeep => write!(f, "formula nested too deeply"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Top,
    Bot,
    Ident(String),
    Nat(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Question,
    Colon,
    Bar,
    At,
    Tilde,
    Amp,
    Or,
    Arrow,
    Caret,
    Slash,
    /// `E@`
    ExpectAt,
    /// `B@`
    BoxAt,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Top => "T".into(),
            Tok::Bot => "F".into(),
            Tok::Ident(s) | Tok::Nat(s) => s.clone(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::LBrace => "{".into(),
            Tok::RBrace => "}".into(),
            Tok::Question => "?".into(),
            Tok::Colon => ":".into(),
            Tok::Bar => "|".into(),
            Tok::At => "@".into(),
            Tok::Tilde => "~".into(),
            Tok::Amp => "&".into(),
            Tok::Or => "v".into(),
            Tok::Arrow => "->".into(),
            Tok::Caret => "^".into(),
            Tok::Slash => "/".into(),
            Tok::ExpectAt => "E@".into(),
            Tok::BoxAt => "B@".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, column);
        let err = |kind| ParseError {
            line: start_line,
            column: start_col,
            kind,
        };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            let at_follows = chars.get(j) == Some(&'@');
            match word.as_str() {
                "T" => (Tok::Top, j - i),
                "F" => (Tok::Bot, j - i),
                "v" => (Tok::Or, 1),
                "E" if at_follows => (Tok::ExpectAt, 2),
                "B" if at_follows => (Tok::BoxAt, 2),
                _ => (Tok::Ident(word), j - i),
            }
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            (Tok::Nat(chars[i..j].iter().collect()), j - i)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBracket, 1),
                ']' => (Tok::RBracket, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '?' => (Tok::Question, 1),
                ':' => (Tok::Colon, 1),
                '|' => (Tok::Bar, 1),
                '@' => (Tok::At, 1),
                '~' => (Tok::Tilde, 1),
                '&' => (Tok::Amp, 1),
                '^' => (Tok::Caret, 1),
                '/' => (Tok::Slash, 1),
                '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
                c if c.is_ascii_punctuation() => {
                    let mut j = i;
                    while j < chars.len() && chars[j].is_ascii_punctuation() && !"()[]{}".contains(chars[j]) {
                        j += 1;
                    }
                    return Err(err(ParseErrorKind::UnknownOperator(chars[i..j].iter().collect())));
                }
                c => return Err(err(ParseErrorKind::Lexical(c))),
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
        i += len;
        column += len;
    }
    Ok(out)
}

/// Parses a formula from its concrete syntax.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let end = match toks.last() {
        Some(t) => (t.line, t.column + t.tok.text().chars().count()),
        None => (1, 1),
    };
    let mut p = Parser {
        toks,
        pos: 0,
        end,
        depth: 0,
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        let kind = match t.tok {
            Tok::RParen | Tok::RBracket | Tok::RBrace => {
                ParseErrorKind::Unbalanced(format!("unmatched `{}`", t.tok.text()))
            }
            _ => ParseErrorKind::UnexpectedToken {
                found: t.tok.text(),
                expected: "end of input".into(),
            },
        };
        return Err(p.error_at(p.pos, kind));
    }
    Ok(f)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|s| &s.tok)
    }

    fn error_at(&self, idx: usize, kind: ParseErrorKind) -> ParseError {
        let (line, column) = match self.toks.get(idx) {
            Some(t) => (t.line, t.column),
            None => self.end,
        };
        ParseError { line, column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => self.error_at(
                self.pos,
                ParseErrorKind::UnexpectedToken {
                    found: t.tok.text(),
                    expected: expected.into(),
                },
            ),
            None => self.error_at(
                self.pos,
                ParseErrorKind::UnexpectedEnd {
                    expected: expected.into(),
                },
            ),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    /// Consumes a closing delimiter opened at token index `open`.
    fn close(&mut self, tok: &Tok, open: usize) -> Result<(), ParseError> {
        if self.eat(tok) {
            return Ok(());
        }
        match self.peek() {
            None => Err(self.error_at(
                open,
                ParseErrorKind::Unbalanced(format!(
                    "`{}` is never closed by `{}`",
                    self.toks[open].tok.text(),
                    tok.text()
                )),
            )),
            Some(_) => Err(self.unexpected(&format!("`{}`", tok.text()))),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error_at(self.pos, ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let lhs = self.or()?;
        let out = if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            Formula::implies(lhs, rhs)
        } else {
            lhs
        };
        self.depth -= 1;
        Ok(out)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn agent(&mut self) -> Result<String, ParseError> {
        match self.peek_tok() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.error_at(self.pos, ParseErrorKind::MissingAgent)),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.enter()?;
        let out = match self.peek_tok() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Formula::not(self.unary()?)
            }
            Some(Tok::ExpectAt) => {
                self.pos += 1;
                let i = self.agent()?;
                Formula::expect(i, self.unary()?)
            }
            Some(Tok::BoxAt) => {
                self.pos += 1;
                let i = self.agent()?;
                Formula::necessary(i, self.unary()?)
            }
            _ => self.postfix()?,
        };
        self.depth -= 1;
        Ok(out)
    }

    fn nat(&mut self) -> Result<u32, ParseError> {
        match self.peek_tok() {
            Some(Tok::Nat(digits)) => {
                let n = digits
                    .parse::<u32>()
                    .map_err(|_| self.error_at(self.pos, ParseErrorKind::NumberTooLarge))?;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.unexpected("a natural number")),
        }
    }

    fn postfix(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.atom()?;
        while self.eat(&Tok::Caret) {
            let open = self.pos;
            if !self.eat(&Tok::LBrace) {
                return Err(self.unexpected("`{`"));
            }
            let k = self.nat()?;
            if !self.eat(&Tok::Slash) {
                return Err(self.unexpected("`/`"));
            }
            let n = self.nat()?;
            self.close(&Tok::RBrace, open)?;
            acc = Formula::repeat(acc, k, n);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.unexpected("a formula"));
        };
        let open = self.pos;
        match t.tok {
            Tok::Top => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Tok::Bot => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                Ok(Formula::Var(name))
            }
            Tok::LParen => {
                self.pos += 1;
                let first = self.formula()?;
                if self.eat(&Tok::Question) {
                    let then = self.formula()?;
                    if !self.eat(&Tok::Colon) {
                        return Err(match self.peek() {
                            None => self.error_at(
                                open,
                                ParseErrorKind::Unbalanced("`(` is never closed by `)`".into()),
                            ),
                            Some(_) => self.unexpected("`:`"),
                        });
                    }
                    let other = self.formula()?;
                    self.close(&Tok::RParen, open)?;
                    Ok(Formula::Ite(Arc::new(first), Arc::new(then), Arc::new(other)))
                } else {
                    self.close(&Tok::RParen, open)?;
                    Ok(first)
                }
            }
            Tok::LBracket => {
                self.pos += 1;
                let target = self.formula()?;
                if !self.eat(&Tok::Bar) {
                    return Err(match self.peek() {
                        None => self.error_at(
                            open,
                            ParseErrorKind::Unbalanced("`[` is never closed by `]`".into()),
                        ),
                        Some(_) => self.unexpected("`|`"),
                    });
                }
                let given = self.formula()?;
                self.close(&Tok::RBracket, open)?;
                if !self.eat(&Tok::At) {
                    return Err(self.error_at(self.pos, ParseErrorKind::MissingAgent));
                }
                let agent = self.agent()?;
                Ok(Formula::cond(target, given, agent))
            }
            Tok::RParen | Tok::RBracket | Tok::RBrace => Err(self.error_at(
                self.pos,
                ParseErrorKind::Unbalanced(format!("unmatched `{}`", t.tok.text())),
            )),
            _ => Err(self.unexpected("a formula")),
        }
    }
}
