//! Proof construction.
//!
//! Propositional goals follow the completeness construction: both sides are
//! rewritten to tree form, brought to one complete levelled shape, and the
//! leaves that differ are exchanged pairwise. Modal goals are first
//! normalised by a terminating set of left-to-right rewrites (including
//! `A0`, `A3` and `A4`); conditionals that survive are then treated as
//! opaque atoms by the propositional construction.

use std::collections::BTreeMap;

use thiserror::Error;

use super::axiom::{apply, AxiomName, Bindings, Direction};
use super::trace::{ProofTrace, Step};
use crate::equivalence::polynomial;
use crate::equivalence::tree::pair_mismatches;
use crate::syntax::Formula;

use AxiomName::*;
use Direction::{LeftToRight as LR, RightToLeft as RL};

pub const DEFAULT_STEP_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProveError {
    /// The construction finished without connecting the two formulas. For
    /// propositional inputs this means they are not equivalent.
    #[error("no proof found")]
    NotFound,
    #[error("step budget of {0} exhausted")]
    BudgetExhausted(usize),
}

/// Accumulates rewrite steps on a current formula.
struct Rewriter {
    cur: Formula,
    steps: Vec<Step>,
    budget: usize,
}

impl Rewriter {
    fn new(start: Formula, budget: usize) -> Self {
        Rewriter {
            cur: start,
            steps: Vec::new(),
            budget,
        }
    }

    fn at(&self, pos: &[usize]) -> &Formula {
        self.cur.subterm(pos).expect("rewriter positions are valid")
    }

    fn try_step(&mut self, axiom: AxiomName, pos: &[usize], dir: Direction, extra: Bindings) -> Result<bool, ProveError> {
        if self.steps.len() >= self.budget {
            return Err(ProveError::BudgetExhausted(self.budget));
        }
        match apply(&self.cur, axiom, pos, dir, &extra) {
            Ok((next, bind)) => {
                self.cur = next;
                self.steps.push(Step {
                    axiom,
                    pos: pos.to_vec(),
                    dir,
                    bind,
                });
                Ok(true)
            }
            Err(_) => Ok(false),
        }
    }

    fn step(&mut self, axiom: AxiomName, pos: &[usize], dir: Direction, extra: Bindings) -> Result<(), ProveError> {
        let applied = self.try_step(axiom, pos, dir, extra)?;
        assert!(applied, "{axiom} {dir} at {pos:?} must apply to {}", self.at(pos));
        Ok(())
    }
}

fn child(pos: &[usize], i: usize) -> Vec<usize> {
    let mut p = pos.to_vec();
    p.push(i);
    p
}

fn is_atom(f: &Formula) -> bool {
    !matches!(f, Formula::Top | Formula::Bot | Formula::Ite(..))
}

/// Rewrites the subterm at `pos` into tree form: atoms become `(a ? T : F)`,
/// compound conditions are flattened with `tree`, constant conditions are
/// removed with `always` and `never`.
fn tree_form(r: &mut Rewriter, pos: &[usize]) -> Result<(), ProveError> {
    match r.at(pos) {
        Formula::Top | Formula::Bot => Ok(()),
        Formula::Ite(c, _, _) => {
            let atomic_condition = is_atom(c);
            tree_form(r, &child(pos, 1))?;
            tree_form(r, &child(pos, 2))?;
            if !atomic_condition {
                tree_form(r, &child(pos, 0))?;
                lift(r, pos)?;
            }
            Ok(())
        }
        _ => r.step(Vacuous, pos, RL, Bindings::new()),
    }
}

/// `(c ? a : b)` with `c`, `a`, `b` in tree form becomes a tree form.
fn lift(r: &mut Rewriter, pos: &[usize]) -> Result<(), ProveError> {
    let Formula::Ite(c, _, _) = r.at(pos) else {
        unreachable!("lift is applied to conditionals")
    };
    match c.as_ref() {
        Formula::Top => r.step(Always, pos, LR, Bindings::new()),
        Formula::Bot => r.step(Never, pos, LR, Bindings::new()),
        Formula::Ite(..) => {
            r.step(Tree, pos, LR, Bindings::new())?;
            lift(r, &child(pos, 1))?;
            lift(r, &child(pos, 2))
        }
        _ => Ok(()),
    }
}

/// Largest number of tests of each atom along any path of a tree form.
fn path_counts(f: &Formula) -> BTreeMap<Formula, u32> {
    fn go(f: &Formula, on_path: &mut BTreeMap<Formula, u32>, out: &mut BTreeMap<Formula, u32>) {
        if let Formula::Ite(c, a, b) = f {
            let n = {
                let e = on_path.entry((**c).clone()).or_insert(0);
                *e += 1;
                *e
            };
            let best = out.entry((**c).clone()).or_insert(0);
            *best = (*best).max(n);
            go(a, on_path, out);
            go(b, on_path, out);
            *on_path.get_mut(c.as_ref()).expect("entered above") -= 1;
        }
    }
    let mut out = BTreeMap::new();
    go(f, &mut BTreeMap::new(), &mut out);
    out
}

/// Rebuilds the tree form at `pos` as a complete tree testing `seq[k]` at
/// depth `k`.
fn level(r: &mut Rewriter, pos: &[usize], seq: &[Formula]) -> Result<(), ProveError> {
    let Some((v, rest)) = seq.split_first() else {
        debug_assert!(matches!(r.at(pos), Formula::Top | Formula::Bot));
        return Ok(());
    };
    pull(r, pos, v)?;
    level(r, &child(pos, 1), rest)?;
    level(r, &child(pos, 2), rest)
}

/// Brings the first test of `v` on every path below `pos` up to `pos`,
/// introducing `(v ? L : L)` at leaves whose path has no such test.
fn pull(r: &mut Rewriter, pos: &[usize], v: &Formula) -> Result<(), ProveError> {
    match r.at(pos) {
        Formula::Ite(c, _, _) if c.as_ref() == v => Ok(()),
        Formula::Ite(..) => {
            pull(r, &child(pos, 1), v)?;
            pull(r, &child(pos, 2), v)?;
            r.step(Swap, pos, LR, Bindings::new())
        }
        _ => r.step(Ignore, pos, RL, Bindings::new().term("x", v.clone())),
    }
}

/// Leaf labels of a complete tree, then-branches first.
fn leaf_labels(f: &Formula, out: &mut Vec<bool>) {
    match f {
        Formula::Top => out.push(true),
        Formula::Bot => out.push(false),
        Formula::Ite(_, a, b) => {
            leaf_labels(a, out);
            leaf_labels(b, out);
        }
        other => unreachable!("levelled trees have constant leaves, found {other}"),
    }
}

/// Position of the node at depth `bits.len()` reached by taking then
/// (`false`) or else (`true`) branches.
fn node_position(base: &[usize], bits: impl IntoIterator<Item = bool>) -> Vec<usize> {
    let mut p = base.to_vec();
    p.extend(bits.into_iter().map(|neg| if neg { 2 } else { 1 }));
    p
}

/// Branch bits of leaf `index` in a complete tree of depth `depth`.
fn index_bits(index: usize, depth: usize) -> Vec<bool> {
    (0..depth).map(|l| (index >> (depth - 1 - l)) & 1 == 1).collect()
}

/// Exchanges adjacent levels `j` and `j + 1` below `base` (a levelled
/// subtree) by applying `swap` at every node of depth `j`, logging each
/// position so the exchange can be undone.
fn transpose_levels(r: &mut Rewriter, base: &[usize], j: usize, log: &mut Vec<Vec<usize>>) -> Result<(), ProveError> {
    for n in 0..(1usize << j) {
        let pos = node_position(base, index_bits(n, j));
        r.step(Swap, &pos, LR, Bindings::new())?;
        log.push(pos);
    }
    Ok(())
}

/// Literal of the path `bits` at each level: (level atom, negated).
fn literals<'a>(seq: &'a [Formula], bits: &[bool]) -> Vec<(&'a Formula, bool)> {
    seq.iter().zip(bits.iter().copied()).collect()
}

/// Reorders the levels of the levelled subtree at `base` so that the path
/// `current` reads as `target` (a permutation of it), by bubble sort.
fn permute_levels(
    r: &mut Rewriter,
    base: &[usize],
    current: &[(&Formula, bool)],
    target: &[(&Formula, bool)],
    log: &mut Vec<Vec<usize>>,
) -> Result<(), ProveError> {
    // Destination index of each current element, matching equal literals in order.
    let mut used = vec![false; target.len()];
    let mut dest: Vec<usize> = current
        .iter()
        .map(|lit| {
            let k = (0..target.len())
                .find(|&k| !used[k] && target[k] == *lit)
                .expect("target is a permutation of current");
            used[k] = true;
            k
        })
        .collect();
    for end in (1..dest.len()).rev() {
        for j in 0..end {
            if dest[j] > dest[j + 1] {
                transpose_levels(r, base, j, log)?;
                dest.swap(j, j + 1);
            }
        }
    }
    Ok(())
}

/// Exchanges the leaves `a` and `b` (indices into the levelled tree at
/// `root`, whose paths are multiset equivalent), leaving every other leaf
/// where it was.
fn exchange_leaves(r: &mut Rewriter, root: &[usize], seq: &[Formula], a: usize, b: usize) -> Result<(), ProveError> {
    let depth = seq.len();
    let (abits, bbits) = (index_bits(a, depth), index_bits(b, depth));
    let k = (0..depth).find(|&l| abits[l] != bbits[l]).expect("distinct leaves");
    let node = node_position(root, abits[..k].iter().copied());
    let m = depth - k;
    let mut log = Vec::new();

    // Below the divergence, sort both remainders into the same order with
    // the distinguishing test of the divergence atom last.
    let alpha = literals(&seq[k..], &abits[k..]);
    let beta = literals(&seq[k..], &bbits[k..]);
    let x = alpha[0].0;
    let mut rest: Vec<(&Formula, bool)> = alpha[1..].to_vec();
    let drop_at = rest
        .iter()
        .position(|&l| l == (x, beta[0].1))
        .expect("multiset equivalent paths");
    rest.remove(drop_at);
    rest.sort();
    let mut target_a = rest.clone();
    target_a.push((x, beta[0].1));
    let mut target_b = rest.clone();
    target_b.push((x, alpha[0].1));
    let a_child = node_position(&node, [alpha[0].1]);
    let b_child = node_position(&node, [beta[0].1]);
    permute_levels(r, &a_child, &alpha[1..], &target_a, &mut log)?;
    permute_levels(r, &b_child, &beta[1..], &target_b, &mut log)?;

    // Sink the divergence level to just above the last level.
    for j in 0..m.saturating_sub(2) {
        transpose_levels(r, &node, j, &mut log)?;
    }

    // The two leaves are now the crossed grandchildren of one node.
    let bottom = node_position(&node, rest.iter().map(|&(_, neg)| neg));
    r.step(Swap, &bottom, LR, Bindings::new())?;

    for pos in log.iter().rev() {
        r.step(Swap, pos, RL, Bindings::new())?;
    }
    Ok(())
}

/// Variables sequence and rewritten trees for the propositional
/// construction applied to `lhs` and `rhs`.
fn levelled_pair(lhs: &Formula, rhs: &Formula, budget: usize) -> Result<(Rewriter, Rewriter, Vec<Formula>), ProveError> {
    let mut l = Rewriter::new(lhs.clone(), budget);
    let mut r = Rewriter::new(rhs.clone(), budget);
    tree_form(&mut l, &[])?;
    tree_form(&mut r, &[])?;
    let mut degrees = path_counts(&l.cur);
    for (a, d) in path_counts(&r.cur) {
        let e = degrees.entry(a).or_insert(0);
        *e = (*e).max(d);
    }
    let seq: Vec<Formula> = degrees
        .iter()
        .flat_map(|(a, d)| std::iter::repeat_n(a.clone(), *d as usize))
        .collect();
    if seq.len() >= 24 {
        return Err(ProveError::BudgetExhausted(budget));
    }
    level(&mut l, &[], &seq)?;
    level(&mut r, &[], &seq)?;
    Ok((l, r, seq))
}

/// The propositional construction on core formulas whose non-constant,
/// non-conditional subterms are treated as atoms.
fn propositional(lhs: &Formula, rhs: &Formula, budget: usize) -> Result<(Vec<Step>, Vec<Step>), ProveError> {
    // Inequivalent inputs are refused before any rewriting.
    let differ = match (polynomial(lhs), polynomial(rhs)) {
        (Ok(a), Ok(b)) => a != b,
        _ => false,
    };
    if differ {
        return Err(ProveError::NotFound);
    }
    let (mut l, r, seq) = levelled_pair(lhs, rhs, budget)?;
    let (mut la, mut ra) = (Vec::new(), Vec::new());
    leaf_labels(&l.cur, &mut la);
    leaf_labels(&r.cur, &mut ra);
    for (t, b) in pair_mismatches(&la, &ra, &seq) {
        exchange_leaves(&mut l, &[], &seq, t, b)?;
    }
    if l.cur != r.cur {
        return Err(ProveError::NotFound);
    }
    Ok((l.steps, r.steps))
}

/// Left-to-right normalisation used for modal goals. Every rule shrinks the
/// formula or moves an if-then-else out of a condition or a conditional's
/// target, so the process terminates.
fn normalise(r: &mut Rewriter, pos: &[usize]) -> Result<(), ProveError> {
    let arity = r.at(pos).children().len();
    for i in 0..arity {
        normalise(r, &child(pos, i))?;
    }
    const RULES: [AxiomName; 8] = [Always, Never, Ignore, Vacuous, Tree, A3, A4, A0];
    for ax in RULES {
        if r.try_step(ax, pos, LR, Bindings::new())? {
            return normalise(r, pos);
        }
    }
    Ok(())
}

fn contains_conditional(f: &Formula) -> bool {
    matches!(f, Formula::Cond { .. }) || f.children().iter().any(|c| contains_conditional(c))
}

/// `there` leads from `start` to a formula that `back` also reaches from
/// `end`. Steps carry complete bindings, so `back` can be inverted without
/// replaying it.
fn trace_through(start: &Formula, end: &Formula, mut there: Vec<Step>, back: Vec<Step>) -> ProofTrace {
    there.extend(back.into_iter().rev().map(|s| Step { dir: s.dir.flip(), ..s }));
    ProofTrace::new(start.clone(), end.clone(), there)
}

/// Searches for a proof that `lhs` and `rhs` are interchangeable.
///
/// For propositional inputs this succeeds exactly when they are
/// equivalent. For modal inputs a `NotFound` answer only means the
/// strategy did not connect them.
pub fn prove_equiv(lhs: &Formula, rhs: &Formula, budget: usize) -> Result<ProofTrace, ProveError> {
    let (l, r) = (lhs.desugar(), rhs.desugar());
    if l == r {
        return Ok(ProofTrace::new(lhs.clone(), rhs.clone(), Vec::new()));
    }
    let trace = if !contains_conditional(&l) && !contains_conditional(&r) {
        let (there, back) = propositional(&l, &r, budget)?;
        trace_through(lhs, rhs, there, back)
    } else {
        let mut nl = Rewriter::new(l, budget);
        let mut nr = Rewriter::new(r, budget);
        normalise(&mut nl, &[])?;
        normalise(&mut nr, &[])?;
        let mut there = nl.steps;
        let mut back = nr.steps;
        if nl.cur != nr.cur {
            let remaining = budget.saturating_sub(there.len() + back.len());
            let (t2, b2) = propositional(&nl.cur, &nr.cur, remaining)?;
            there.extend(t2);
            back.extend(b2);
        }
        trace_through(lhs, rhs, there, back)
    };
    if trace.steps.len() > budget {
        return Err(ProveError::BudgetExhausted(budget));
    }
    let trace = orient_swaps(cancel_inverses(trace));
    debug_assert!(trace.check().is_valid(), "{}", trace.check());
    Ok(trace)
}

/// Drops each step that is immediately undone by the next one.
fn cancel_inverses(trace: ProofTrace) -> ProofTrace {
    let mut kept: Vec<Step> = Vec::with_capacity(trace.steps.len());
    for s in trace.steps {
        let undoes_last = kept.last().is_some_and(|k| {
            k.axiom == s.axiom && k.pos == s.pos && k.dir == s.dir.flip() && k.bind == s.bind
        });
        if undoes_last {
            kept.pop();
        } else {
            kept.push(s);
        }
    }
    ProofTrace::new(trace.start, trace.end, kept)
}

/// `swap` is its own mirror image, so every right-to-left use is replaced
/// by the equivalent left-to-right one: matching the left side against the
/// same term binds `x` and `y` the other way round and exchanges `q`
/// with `r`.
fn orient_swaps(mut trace: ProofTrace) -> ProofTrace {
    const RENAME: [(&str, &str); 6] = [("x", "y"), ("y", "x"), ("p", "p"), ("q", "r"), ("r", "q"), ("s", "s")];
    for s in trace.steps.iter_mut().filter(|s| s.axiom == Swap && s.dir == RL) {
        s.dir = LR;
        let old = std::mem::take(&mut s.bind.terms);
        s.bind.terms = RENAME
            .iter()
            .filter_map(|&(from, to)| old.get(from).map(|t| (to.to_string(), t.clone())))
            .collect();
    }
    trace
}

/// The consequence of `A0` relating an expectation of a conjunction to a
/// conditional: `E_i(x & y)` rewrites to `(E_i x ? [y | x]_i : B_i ~x)`,
/// which behaves as `E_i x & [y | x]_i` wherever `[F | ~x]_i` is `F`,
/// that is wherever the agent considers `x` possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedEquation {
    /// `E@i x & [y | x]@i`
    pub lhs: Formula,
    /// `E@i (x & y)`
    pub rhs: Formula,
    /// `[F | ~x]@i`, which must evaluate to 0 for the equation to hold.
    pub guard: Formula,
    /// Axiom steps from `rhs` to `(E@i x ? [y | x]@i : [F | ~x]@i)`.
    pub trace: ProofTrace,
}

pub fn a0_specialize(x: &Formula, y: &Formula, agent: &str) -> DerivedEquation {
    let rhs = Formula::expect(agent, Formula::and(x.clone(), y.clone()));
    let lhs = Formula::and(
        Formula::expect(agent, x.clone()),
        Formula::cond(y.clone(), x.clone(), agent),
    );
    let guard = Formula::cond(Formula::Bot, Formula::not(x.clone()), agent);
    let mut r = Rewriter::new(rhs.desugar(), usize::MAX);
    r.step(A0, &[], LR, Bindings::new()).expect("unbounded");
    r.step(Vacuous, &[1, 1], LR, Bindings::new()).expect("unbounded");
    let trace = ProofTrace::new(rhs.clone(), r.cur, r.steps);
    DerivedEquation { lhs, rhs, guard, trace }
}

/// Applies a single axiom at a position, completing the bindings.
pub fn rewrite(f: &Formula, axiom: AxiomName, pos: &[usize], dir: Direction, extra: &Bindings) -> Option<Formula> {
    apply(&f.desugar(), axiom, pos, dir, extra).ok().map(|(g, _)| g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn prove(a: &str, b: &str) -> Result<ProofTrace, ProveError> {
        prove_equiv(&f(a), &f(b), DEFAULT_STEP_BUDGET)
    }

    #[test]
    fn commutativity_matches_the_hand_written_trace() {
        let t = prove("x & y", "y & x").unwrap();
        assert!(t.check().is_valid());
        let names: Vec<_> = t.steps.iter().map(|s| (s.axiom, s.dir)).collect();
        assert_eq!(
            names,
            vec![(Vacuous, RL), (Ignore, RL), (Swap, LR), (Ignore, LR), (Vacuous, LR)]
        );
    }

    #[test]
    fn single_leaf_exchange() {
        let t = prove("(x ? (x ? F : y) : F)", "(x ? F : (x ? y : F))").unwrap();
        assert!(t.check().is_valid());
    }

    #[test]
    fn deeper_exchanges() {
        for (a, b) in [
            ("x & ~x & y", "~x & y & x"),
            ("x^{1/3}", "(x ? T : (x ? T : x))"),
            ("x^{2/3} & y^{1/2}", "y^{1/2} & x^{2/3}"),
            ("(x ? (y ? T : F) : (y ? F : T))", "(y ? (x ? T : F) : (x ? F : T))"),
            ("x v y", "y v x"),
            ("~(x & y)", "~x v ~y"),
            ("(x & y) & z", "x & (y & z)"),
        ] {
            let t = prove(a, b).unwrap_or_else(|e| panic!("{a} vs {b}: {e}"));
            assert!(t.check().is_valid(), "{a} vs {b}");
        }
    }

    #[test]
    fn inequivalent_propositions_are_not_proved() {
        assert_eq!(prove("x", "F"), Err(ProveError::NotFound));
        assert_eq!(prove("x", "x & x"), Err(ProveError::NotFound));
    }

    #[test]
    fn duality_uses_a0() {
        let t = prove("[~x | y]@i", "[x | y]@i -> B@i ~(x & y)").unwrap();
        assert!(t.check().is_valid());
        assert_eq!(t.steps[0].axiom, A0);
        assert!(t.steps.iter().any(|s| s.axiom == A3));
    }

    #[test]
    fn modal_atoms_under_propositional_reasoning() {
        let t = prove("[x | y]@a & [y | x]@b", "[y | x]@b & [x | y]@a").unwrap();
        assert!(t.check().is_valid());
        assert_eq!(prove("E@a x", "E@a y"), Err(ProveError::NotFound));
    }

    #[test]
    fn budget_is_reported() {
        assert_eq!(
            prove_equiv(&f("x & y"), &f("y & x"), 2),
            Err(ProveError::BudgetExhausted(2))
        );
    }

    #[test]
    fn specialised_a0() {
        let d = a0_specialize(&f("p"), &f("q"), "a");
        assert!(d.trace.check().is_valid());
        assert_eq!(d.trace.end, f("([p | T]@a ? [q | p]@a : [F | (p ? F : T)]@a)"));
        assert_eq!(d.lhs.desugar(), f("([p | T]@a ? [q | p]@a : F)"));
    }
}
