use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::syntax::Formula;

/// Name of an axiom of the propositional or modal system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomName {
    Id,
    Vacuous,
    Ignore,
    Always,
    Never,
    Tree,
    Swap,
    A0,
    A1,
    A2,
    A3,
    A4,
}

impl AxiomName {
    pub const ALL: [AxiomName; 12] = [
        AxiomName::Id,
        AxiomName::Vacuous,
        AxiomName::Ignore,
        AxiomName::Always,
        AxiomName::Never,
        AxiomName::Tree,
        AxiomName::Swap,
        AxiomName::A0,
        AxiomName::A1,
        AxiomName::A2,
        AxiomName::A3,
        AxiomName::A4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxiomName::Id => "id",
            AxiomName::Vacuous => "vacuous",
            AxiomName::Ignore => "ignore",
            AxiomName::Always => "always",
            AxiomName::Never => "never",
            AxiomName::Tree => "tree",
            AxiomName::Swap => "swap",
            AxiomName::A0 => "A0",
            AxiomName::A1 => "A1",
            AxiomName::A2 => "A2",
            AxiomName::A3 => "A3",
            AxiomName::A4 => "A4",
        }
    }

    /// Whether the axiom mentions the conditional expectation operator.
    pub fn is_modal(self) -> bool {
        matches!(
            self,
            AxiomName::A0 | AxiomName::A1 | AxiomName::A2 | AxiomName::A3 | AxiomName::A4
        )
    }

    pub fn axiom(self) -> &'static Axiom {
        &registry()[self as usize]
    }
}

impl fmt::Display for AxiomName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown axiom `{0}`")]
pub struct UnknownAxiom(pub String);

impl FromStr for AxiomName {
    type Err = UnknownAxiom;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxiomName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownAxiom(s.to_string()))
    }
}

/// An equation between two patterns. Every variable in a pattern is a
/// metavariable standing for an arbitrary formula; the agent of every
/// conditional in a pattern is the agent metavariable `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub name: AxiomName,
    pub lhs: Formula,
    pub rhs: Formula,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {}", self.name, self.lhs, self.rhs)
    }
}

pub const AGENT_METAVARIABLE: &str = "i";

/// All axioms, indexed by `AxiomName as usize`.
pub fn registry() -> &'static [Axiom] {
    static REGISTRY: OnceLock<Vec<Axiom>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let table = [
            (AxiomName::Id, "x", "x"),
            (AxiomName::Vacuous, "(x ? T : F)", "x"),
            (AxiomName::Ignore, "(x ? y : y)", "y"),
            (AxiomName::Always, "(T ? x : y)", "x"),
            (AxiomName::Never, "(F ? x : y)", "y"),
            (AxiomName::Tree, "((x ? y : z) ? p : q)", "(x ? (y ? p : q) : (z ? p : q))"),
            (AxiomName::Swap, "(x ? (y ? p : q) : (y ? r : s))", "(y ? (x ? p : r) : (x ? q : s))"),
            (
                AxiomName::A0,
                "[(x ? y : z) | c]@i",
                "([x | c]@i ? [y | (x ? c : F)]@i : [z | (x ? F : c)]@i)",
            ),
            (AxiomName::A1, "([F | x]@i ? [x | y]@i : F)", "[F | (x ? T : y)]@i"),
            (AxiomName::A2, "[F | x]@i", "([F | x]@i ? [F | x]@i : F)"),
            (AxiomName::A3, "[T | x]@i", "T"),
            (AxiomName::A4, "[x | F]@i", "T"),
        ];
        table
            .into_iter()
            .map(|(name, l, r)| Axiom {
                name,
                lhs: l.parse().expect("axiom pattern parses"),
                rhs: r.parse().expect("axiom pattern parses"),
            })
            .collect()
    })
}

/// Which side of an axiom is matched against the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Rewrite an instance of the left side into the right side.
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LeftToRight => "LR",
            Direction::RightToLeft => "RL",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LR" => Ok(Direction::LeftToRight),
            "RL" => Ok(Direction::RightToLeft),
            other => Err(format!("direction must be \"LR\" or \"RL\", got {other:?}")),
        }
    }
}

/// An instantiation of an axiom's metavariables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub terms: BTreeMap<String, Arc<Formula>>,
    pub agent: Option<String>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn term(mut self, name: impl Into<String>, f: Formula) -> Self {
        self.terms.insert(name.into(), Arc::new(f));
        self
    }

    pub fn with_agent(mut self, agent: impl Into<String>) -> Self {
        self.agent = Some(agent.into());
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.agent.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("position {0:?} does not exist")]
    PositionOutOfRange(Vec<usize>),
    #[error("{axiom} ({dir}) does not match the subterm at {pos:?}")]
    NoMatch {
        axiom: AxiomName,
        pos: Vec<usize>,
        dir: Direction,
    },
    #[error("{axiom} ({dir}) leaves metavariable `{name}` unbound; supply it as a binding")]
    Unbound {
        axiom: AxiomName,
        dir: Direction,
        name: String,
    },
}

/// Extends `b` so that `pattern` instantiates to `term`.
pub(crate) fn unify(pattern: &Formula, term: &Arc<Formula>, b: &mut Bindings) -> bool {
    match (pattern, term.as_ref()) {
        (Formula::Var(m), _) => match b.terms.get(m) {
            Some(bound) => bound == term,
            None => {
                b.terms.insert(m.clone(), term.clone());
                true
            }
        },
        (Formula::Top, Formula::Top) | (Formula::Bot, Formula::Bot) => true,
        (Formula::Ite(pc, pa, pb), Formula::Ite(c, a, e)) => unify(pc, c, b) && unify(pa, a, b) && unify(pb, e, b),
        (
            Formula::Cond {
                target: pt, given: pg, ..
            },
            Formula::Cond { target, given, agent },
        ) => {
            let agent_ok = match &b.agent {
                Some(bound) => bound == agent,
                None => {
                    b.agent = Some(agent.clone());
                    true
                }
            };
            agent_ok && unify(pt, target, b) && unify(pg, given, b)
        }
        _ => false,
    }
}

/// Instantiates `pattern`; `Err(name)` names the first unbound metavariable.
pub(crate) fn instantiate(pattern: &Formula, b: &Bindings) -> Result<Arc<Formula>, String> {
    Ok(match pattern {
        Formula::Var(m) => b.terms.get(m).cloned().ok_or_else(|| m.clone())?,
        Formula::Top | Formula::Bot => Arc::new(pattern.clone()),
        Formula::Ite(c, x, y) => Arc::new(Formula::Ite(instantiate(c, b)?, instantiate(x, b)?, instantiate(y, b)?)),
        Formula::Cond { target, given, .. } => Arc::new(Formula::Cond {
            target: instantiate(target, b)?,
            given: instantiate(given, b)?,
            agent: b.agent.clone().ok_or_else(|| AGENT_METAVARIABLE.to_string())?,
        }),
        other => unreachable!("axiom patterns are core formulas, got {other}"),
    })
}

/// Rewrites the subterm of `f` at `pos` using one side of an axiom.
///
/// `given` may pre-bind metavariables; this is needed when the produced
/// side mentions metavariables the matched side does not (for example
/// `ignore` from right to left). Returns the new formula and the complete
/// bindings of the step.
pub fn apply(
    f: &Formula,
    axiom: AxiomName,
    pos: &[usize],
    dir: Direction,
    given: &Bindings,
) -> Result<(Formula, Bindings), ApplyError> {
    let target = subterm_arc(f, pos).ok_or_else(|| ApplyError::PositionOutOfRange(pos.to_vec()))?;
    let ax = axiom.axiom();
    let (from, to) = match dir {
        Direction::LeftToRight => (&ax.lhs, &ax.rhs),
        Direction::RightToLeft => (&ax.rhs, &ax.lhs),
    };
    let mut b = given.clone();
    if !unify(from, &target, &mut b) {
        return Err(ApplyError::NoMatch {
            axiom,
            pos: pos.to_vec(),
            dir,
        });
    }
    let replacement = instantiate(to, &b).map_err(|name| ApplyError::Unbound { axiom, dir, name })?;
    let out = replace_arc(f, pos, replacement).expect("position checked above");
    Ok((out, b))
}

fn subterm_arc(f: &Formula, pos: &[usize]) -> Option<Arc<Formula>> {
    match pos.split_last() {
        None => Some(Arc::new(f.clone())),
        Some((&last, init)) => {
            let parent = f.subterm(init)?;
            parent.children().get(last).map(|c| (*c).clone())
        }
    }
}

fn replace_arc(f: &Formula, pos: &[usize], replacement: Arc<Formula>) -> Option<Formula> {
    match pos.split_first() {
        None => Some(Arc::unwrap_or_clone(replacement)),
        Some((&i, rest)) => {
            let kids = f.children();
            let child = kids.get(i)?;
            let new_child = if rest.is_empty() {
                replacement
            } else {
                Arc::new(replace_arc(child, rest, replacement)?)
            };
            let mut owned: Vec<Arc<Formula>> = kids.into_iter().cloned().collect();
            owned[i] = new_child;
            Some(f.with_children(owned))
        }
    }
}
