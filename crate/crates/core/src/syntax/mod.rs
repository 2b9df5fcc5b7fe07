//! Formula language: abstract syntax, concrete syntax, and desugaring.
//!
//! The core constructors are `T`, `F`, variables, the if-then-else
//! `(c ? a : b)` and the conditional expectation `[a | b]@i`. Everything else
//! (`&`, `v`, `->`, `~`, `E@i`, `B@i`, `^{a/b}`) is sugar, kept in the tree
//! until [`Formula::desugar`] is called so traces and error messages can show
//! what the user wrote.

mod parser;
mod printer;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use parser::{parse, ParseError, ParseErrorKind};

/// Whether `s` can be used as a variable or agent name in concrete syntax.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    head_ok && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !matches!(s, "T" | "F" | "v")
}

/// A formula of the modal aleatoric calculus.
///
/// Children are reference counted so desugared repetition can share
/// subterms instead of copying them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Top,
    Bot,
    Var(String),
    Ite(Arc<Formula>, Arc<Formula>, Arc<Formula>),
    /// `[target | given]@agent`
    Cond {
        target: Arc<Formula>,
        given: Arc<Formula>,
        agent: String,
    },
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Not(Arc<Formula>),
    /// `E@i a`, the agent's unconditioned expectation.
    Expect(String, Arc<Formula>),
    /// `B@i a`, necessity for the agent.
    Necessary(String, Arc<Formula>),
    /// `a^{k/n}`: at least `k` successes out of `n` independent samples.
    Repeat(Arc<Formula>, u32, u32),
}

impl Formula {
    pub fn var(name: impl Into<String>) -> Self {
        Formula::Var(name.into())
    }

    pub fn ite(cond: Formula, then: Formula, other: Formula) -> Self {
        Formula::Ite(Arc::new(cond), Arc::new(then), Arc::new(other))
    }

    pub fn cond(target: Formula, given: Formula, agent: impl Into<String>) -> Self {
        Formula::Cond {
            target: Arc::new(target),
            given: Arc::new(given),
            agent: agent.into(),
        }
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Not(Arc::new(a))
    }

    pub fn expect(agent: impl Into<String>, a: Formula) -> Self {
        Formula::Expect(agent.into(), Arc::new(a))
    }

    pub fn necessary(agent: impl Into<String>, a: Formula) -> Self {
        Formula::Necessary(agent.into(), Arc::new(a))
    }

    pub fn repeat(a: Formula, successes: u32, trials: u32) -> Self {
        Formula::Repeat(Arc::new(a), successes, trials)
    }

    /// True when the node itself is one of the five core constructors.
    pub fn is_core_node(&self) -> bool {
        matches!(
            self,
            Formula::Top | Formula::Bot | Formula::Var(_) | Formula::Ite(..) | Formula::Cond { .. }
        )
    }

    /// True when no sugar appears anywhere in the tree.
    pub fn is_core(&self) -> bool {
        self.is_core_node() && self.children().iter().all(|c| c.is_core())
    }

    /// True when the formula contains no conditional expectation, sugared or not.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Cond { .. } | Formula::Expect(..) | Formula::Necessary(..) => false,
            _ => self.children().iter().all(|c| c.is_propositional()),
        }
    }

    /// Direct subformulas in positional order.
    pub fn children(&self) -> Vec<&Arc<Formula>> {
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) => vec![],
            Formula::Ite(c, a, b) => vec![c, a, b],
            Formula::Cond { target, given, .. } => vec![target, given],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => vec![a, b],
            Formula::Not(a) | Formula::Expect(_, a) | Formula::Necessary(_, a) => vec![a],
            Formula::Repeat(a, _, _) => vec![a],
        }
    }

    /// The `i`-th direct subformula.
    pub fn child(&self, i: usize) -> Option<&Formula> {
        let c = match (self, i) {
            (Formula::Ite(c, _, _), 0) => c,
            (Formula::Ite(_, a, _), 1) => a,
            (Formula::Ite(_, _, b), 2) => b,
            (Formula::Cond { target, .. }, 0) => target,
            (Formula::Cond { given, .. }, 1) => given,
            (Formula::And(a, _) | Formula::Or(a, _) | Formula::Implies(a, _), 0) => a,
            (Formula::And(_, b) | Formula::Or(_, b) | Formula::Implies(_, b), 1) => b,
            (Formula::Not(a) | Formula::Expect(_, a) | Formula::Necessary(_, a) | Formula::Repeat(a, _, _), 0) => a,
            _ => return None,
        };
        Some(c)
    }

    /// Rebuilds this node with new children, keeping its constructor and labels.
    ///
    /// Panics if `children` has the wrong arity.
    pub fn with_children(&self, mut children: Vec<Arc<Formula>>) -> Formula {
        assert_eq!(children.len(), self.children().len(), "arity mismatch");
        let mut next = || children.remove(0);
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) => self.clone(),
            Formula::Ite(..) => Formula::Ite(next(), next(), next()),
            Formula::Cond { agent, .. } => Formula::Cond {
                target: next(),
                given: next(),
                agent: agent.clone(),
            },
            Formula::And(..) => Formula::And(next(), next()),
            Formula::Or(..) => Formula::Or(next(), next()),
            Formula::Implies(..) => Formula::Implies(next(), next()),
            Formula::Not(_) => Formula::Not(next()),
            Formula::Expect(i, _) => Formula::Expect(i.clone(), next()),
            Formula::Necessary(i, _) => Formula::Necessary(i.clone(), next()),
            Formula::Repeat(_, k, n) => Formula::Repeat(next(), *k, *n),
        }
    }

    /// Expands every abbreviation into the core constructors.
    pub fn desugar(&self) -> Formula {
        let mut memo = HashMap::new();
        (*desugar_shared(self, &mut memo)).clone()
    }

    /// Replaces every occurrence of the variable `name` with `replacement`.
    pub fn substitute(&self, name: &str, replacement: &Formula) -> Formula {
        match self {
            Formula::Var(x) if x == name => replacement.clone(),
            Formula::Top | Formula::Bot | Formula::Var(_) => self.clone(),
            _ => {
                let kids = self
                    .children()
                    .into_iter()
                    .map(|c| Arc::new(c.substitute(name, replacement)))
                    .collect();
                self.with_children(kids)
            }
        }
    }

    /// The set of variables occurring in the formula.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_shared(&mut HashSet::new(), &mut |f| {
            if let Formula::Var(x) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Calls `visit` once per distinct node, so shared subterms of a
    /// desugared repetition are not walked exponentially often.
    fn visit_shared(&self, seen: &mut HashSet<*const Formula>, visit: &mut impl FnMut(&Formula)) {
        visit(self);
        for c in self.children() {
            if seen.insert(Arc::as_ptr(c)) {
                c.visit_shared(seen, visit);
            }
        }
    }

    /// The set of agents named by any modal construct.
    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_shared(&mut HashSet::new(), &mut |f| match f {
            Formula::Cond { agent, .. } | Formula::Expect(agent, _) | Formula::Necessary(agent, _) => {
                out.insert(agent.clone());
            }
            _ => {}
        });
        out
    }

    /// Number of nodes, counting shared subterms once per occurrence.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// The subterm at a child-index position, if it exists.
    pub fn subterm(&self, pos: &[usize]) -> Option<&Formula> {
        let mut cur = self;
        for &i in pos {
            cur = cur.child(i)?;
        }
        Some(cur)
    }

    /// Returns a copy with the subterm at `pos` replaced; `None` if the
    /// position does not exist.
    pub fn replace_at(&self, pos: &[usize], replacement: Formula) -> Option<Formula> {
        match pos.split_first() {
            None => Some(replacement),
            Some((&i, rest)) => {
                let kids = self.children();
                let child = kids.get(i)?;
                let new_child = child.replace_at(rest, replacement)?;
                let mut owned: Vec<Arc<Formula>> = kids.into_iter().cloned().collect();
                owned[i] = Arc::new(new_child);
                Some(self.with_children(owned))
            }
        }
    }
}

type Memo = HashMap<*const Formula, Arc<Formula>>;

fn desugar_shared(f: &Formula, memo: &mut Memo) -> Arc<Formula> {
    let key = f as *const Formula;
    if let Some(done) = memo.get(&key) {
        return done.clone();
    }
    let mut go = |c: &Arc<Formula>| desugar_shared(c, memo);
    let out = match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => Arc::new(f.clone()),
        Formula::Ite(c, a, b) => Arc::new(Formula::Ite(go(c), go(a), go(b))),
        Formula::Cond { target, given, agent } => Arc::new(Formula::Cond {
            target: go(target),
            given: go(given),
            agent: agent.clone(),
        }),
        Formula::And(a, b) => Arc::new(Formula::Ite(go(a), go(b), Arc::new(Formula::Bot))),
        Formula::Or(a, b) => Arc::new(Formula::Ite(go(a), Arc::new(Formula::Top), go(b))),
        Formula::Implies(a, b) => Arc::new(Formula::Ite(go(a), go(b), Arc::new(Formula::Top))),
        Formula::Not(a) => Arc::new(negate(go(a))),
        Formula::Expect(i, a) => Arc::new(Formula::Cond {
            target: go(a),
            given: Arc::new(Formula::Top),
            agent: i.clone(),
        }),
        Formula::Necessary(i, a) => Arc::new(Formula::Cond {
            target: Arc::new(Formula::Bot),
            given: Arc::new(negate(go(a))),
            agent: i.clone(),
        }),
        Formula::Repeat(a, k, n) => repeat_dag(go(a), *k, *n),
    };
    // Only memoize nodes that are shared: the key is an address inside the
    // caller's tree, which stays alive for the whole desugar call.
    memo.insert(key, out.clone());
    out
}

fn negate(a: Arc<Formula>) -> Formula {
    Formula::Ite(a, Arc::new(Formula::Bot), Arc::new(Formula::Top))
}

/// Builds `a^{k/n}` bottom-up so that each `(k', n')` table entry is one
/// shared node.
fn repeat_dag(a: Arc<Formula>, k: u32, n: u32) -> Arc<Formula> {
    let top = Arc::new(Formula::Top);
    let bot = Arc::new(Formula::Bot);
    if k == 0 {
        return top;
    }
    if k > n {
        return bot;
    }
    // row[j] holds a^{j/m} for the current m, j in 0..=k.
    let mut row: Vec<Arc<Formula>> = (0..=k)
        .map(|j| if j == 0 { top.clone() } else { bot.clone() })
        .collect();
    for m in 1..=n as usize {
        let mut next = Vec::with_capacity(row.len());
        next.push(top.clone());
        for j in 1..=k as usize {
            next.push(if j > m {
                bot.clone()
            } else {
                Arc::new(Formula::Ite(a.clone(), row[j - 1].clone(), row[j].clone()))
            });
        }
        row = next;
    }
    row[k as usize].clone()
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print(self))
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Formula {
        Formula::var("x")
    }
    fn y() -> Formula {
        Formula::var("y")
    }

    #[test]
    fn and_desugars_to_ite_with_bot() {
        assert_eq!(Formula::and(x(), y()).desugar(), Formula::ite(x(), y(), Formula::Bot));
    }

    #[test]
    fn repeat_with_zero_successes_is_top() {
        assert_eq!(Formula::repeat(x(), 0, 5).desugar(), Formula::Top);
    }

    #[test]
    fn repeat_needing_more_successes_than_trials_is_bot() {
        assert_eq!(Formula::repeat(x(), 3, 2).desugar(), Formula::Bot);
    }

    #[test]
    fn repeat_one_of_two() {
        // x^{1/2} = (x ? x^{0/1} : x^{1/1}) = (x ? T : (x ? T : F))
        let expect = Formula::ite(x(), Formula::Top, Formula::ite(x(), Formula::Top, Formula::Bot));
        assert_eq!(Formula::repeat(x(), 1, 2).desugar(), expect);
    }

    #[test]
    fn repeat_follows_the_recursion() {
        fn reference(a: &Formula, k: u32, n: u32) -> Formula {
            if k == 0 {
                Formula::Top
            } else if n < k {
                Formula::Bot
            } else {
                Formula::ite(a.clone(), reference(a, k - 1, n - 1), reference(a, k, n - 1))
            }
        }
        for n in 0..6 {
            for k in 0..7 {
                assert_eq!(Formula::repeat(x(), k, n).desugar(), reference(&x(), k, n), "{k}/{n}");
            }
        }
    }

    #[test]
    fn necessity_desugars_to_vacuous_conditional() {
        let expect = Formula::cond(Formula::Bot, Formula::ite(x(), Formula::Bot, Formula::Top), "i");
        assert_eq!(Formula::necessary("i", x()).desugar(), expect);
    }

    #[test]
    fn expectation_is_conditioned_on_top() {
        assert_eq!(Formula::expect("a", x()).desugar(), Formula::cond(x(), Formula::Top, "a"));
    }

    #[test]
    fn or_and_implies_and_not() {
        assert_eq!(Formula::or(x(), y()).desugar(), Formula::ite(x(), Formula::Top, y()));
        assert_eq!(Formula::implies(x(), y()).desugar(), Formula::ite(x(), y(), Formula::Top));
        assert_eq!(Formula::not(x()).desugar(), Formula::ite(x(), Formula::Bot, Formula::Top));
    }

    #[test]
    fn substitute_examples() {
        let f = Formula::ite(x(), x(), y());
        assert_eq!(f.substitute("x", &Formula::Top), Formula::ite(Formula::Top, Formula::Top, y()));
        assert_eq!(y().substitute("x", &Formula::Bot), y());
        let c = Formula::cond(x(), y(), "i");
        assert_eq!(
            c.substitute("y", &Formula::and(x(), x())),
            Formula::cond(x(), Formula::and(x(), x()), "i")
        );
    }

    #[test]
    fn variables_examples() {
        let v: Vec<_> = Formula::ite(x(), y(), Formula::Bot).variables().into_iter().collect();
        assert_eq!(v, vec!["x", "y"]);
        assert!(Formula::Top.variables().is_empty());
        assert_eq!(Formula::cond(x(), x(), "i").variables().len(), 1);
    }

    #[test]
    fn positions_address_children() {
        let f = Formula::ite(x(), Formula::cond(y(), Formula::Top, "a"), Formula::Bot);
        assert_eq!(f.subterm(&[1, 0]), Some(&y()));
        assert_eq!(f.subterm(&[1, 2]), None);
        let g = f.replace_at(&[1, 1], Formula::Bot).unwrap();
        assert_eq!(g.subterm(&[1, 1]), Some(&Formula::Bot));
        assert!(f.replace_at(&[3], Formula::Bot).is_none());
    }

    #[test]
    fn large_repeat_stays_shared() {
        // 40/80 would be astronomically large as a tree.
        let d = Formula::repeat(x(), 40, 80).desugar();
        assert!(matches!(d, Formula::Ite(..)));
    }
}
