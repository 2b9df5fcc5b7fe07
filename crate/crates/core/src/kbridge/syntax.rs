//! Formulas of the multi-agent modal logic K.
//!
//! ```text
//! and   := unary ("&" unary)*
//! unary := "~" unary | "box" "@" agent unary | "(" and ")" | proposition
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::syntax::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KFormula {
    Prop(String),
    And(Box<KFormula>, Box<KFormula>),
    Not(Box<KFormula>),
    Box(String, Box<KFormula>),
}

impl KFormula {
    pub fn prop(q: impl Into<String>) -> Self {
        KFormula::Prop(q.into())
    }

    pub fn and(a: KFormula, b: KFormula) -> Self {
        KFormula::And(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: KFormula) -> Self {
        KFormula::Not(Box::new(a))
    }

    pub fn boxed(agent: impl Into<String>, a: KFormula) -> Self {
        KFormula::Box(agent.into(), Box::new(a))
    }

    pub fn depth(&self) -> usize {
        match self {
            KFormula::Prop(_) => 0,
            KFormula::And(a, b) => 1 + a.depth().max(b.depth()),
            KFormula::Not(a) | KFormula::Box(_, a) => 1 + a.depth(),
        }
    }
}

impl fmt::Display for KFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(a: &KFormula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match a {
                KFormula::And(..) => write!(f, "({a})"),
                _ => write!(f, "{a}"),
            }
        }
        match self {
            KFormula::Prop(q) => f.write_str(q),
            KFormula::And(a, b) => {
                operand(a, f)?;
                f.write_str(" & ")?;
                operand(b, f)
            }
            KFormula::Not(a) => {
                f.write_str("~")?;
                operand(a, f)
            }
            KFormula::Box(i, a) => {
                write!(f, "box@{i} ")?;
                operand(a, f)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct KParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Tilde,
    Amp,
    At,
    LParen,
    RParen,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, KParseError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (at, c) = chars[i];
        let col = s[..at].chars().count() + 1;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '~' => Tok::Tilde,
            '&' => Tok::Amp,
            '@' => Tok::At,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let start = at;
                while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let end = chars.get(i).map_or(s.len(), |&(e, _)| e);
                out.push((col, Tok::Ident(s[start..end].to_string())));
                continue;
            }
            other => {
                return Err(KParseError {
                    column: col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((col, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(c, _)| c)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, KParseError> {
        Err(KParseError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), KParseError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn and(&mut self) -> Result<KFormula, KParseError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            lhs = KFormula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<KFormula, KParseError> {
        match self.peek().cloned() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(KFormula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.and()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "box" => {
                self.pos += 1;
                self.expect(Tok::At, "`@` after `box`")?;
                let Some(Tok::Ident(agent)) = self.peek().cloned().filter(|t| matches!(t, Tok::Ident(a) if is_identifier(a))) else {
                    return self.error("expected an agent name");
                };
                self.pos += 1;
                Ok(KFormula::boxed(agent, self.unary()?))
            }
            Some(Tok::Ident(name)) if is_identifier(&name) => {
                self.pos += 1;
                Ok(KFormula::Prop(name))
            }
            Some(Tok::Ident(name)) => self.error(format!("`{name}` is not a proposition name")),
            _ => self.error("expected a formula"),
        }
    }
}

impl FromStr for KFormula {
    type Err = KParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            toks: lex(s)?,
            pos: 0,
            end: s.chars().count() + 1,
        };
        let f = p.and()?;
        if p.pos != p.toks.len() {
            return p.error("expected end of input");
        }
        Ok(f)
    }
}
