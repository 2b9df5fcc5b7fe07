use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::One;

use super::{EquivError, Polynomial};
use crate::rational::Rational;
use crate::syntax::Formula;

/// A formula whose every condition is a bare variable and whose leaves are
/// constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeForm {
    Top,
    Bot,
    Node(String, Box<TreeForm>, Box<TreeForm>),
}

impl TreeForm {
    pub fn node(x: impl Into<String>, then: TreeForm, other: TreeForm) -> Self {
        TreeForm::Node(x.into(), Box::new(then), Box::new(other))
    }

    pub fn to_formula(&self) -> Formula {
        match self {
            TreeForm::Top => Formula::Top,
            TreeForm::Bot => Formula::Bot,
            TreeForm::Node(x, a, b) => Formula::ite(Formula::var(x.clone()), a.to_formula(), b.to_formula()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TreeForm::Top | TreeForm::Bot => 1,
            TreeForm::Node(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeForm::Top | TreeForm::Bot => 1,
            TreeForm::Node(_, a, b) => a.leaves() + b.leaves(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            TreeForm::Top | TreeForm::Bot => 0,
            TreeForm::Node(_, a, b) => 1 + a.height().max(b.height()),
        }
    }

    /// Exact value at a point assigning a probability to every variable.
    pub fn eval(&self, point: &BTreeMap<String, Rational>) -> Option<Rational> {
        match self {
            TreeForm::Top => Some(Rational::one()),
            TreeForm::Bot => Some(Rational::from_integer(0.into())),
            TreeForm::Node(x, a, b) => {
                let p = point.get(x)?;
                Some(p * a.eval(point)? + (Rational::one() - p) * b.eval(point)?)
            }
        }
    }

    /// Largest number of tests of each variable along any single path.
    pub fn path_counts(&self) -> BTreeMap<String, u32> {
        fn go(t: &TreeForm, on_path: &mut BTreeMap<String, u32>, out: &mut BTreeMap<String, u32>) {
            if let TreeForm::Node(x, a, b) = t {
                *on_path.entry(x.clone()).or_insert(0) += 1;
                let n = on_path[x];
                let best = out.entry(x.clone()).or_insert(0);
                *best = (*best).max(n);
                go(a, on_path, out);
                go(b, on_path, out);
                *on_path.get_mut(x).expect("entered above") -= 1;
            }
        }
        let mut out = BTreeMap::new();
        go(self, &mut BTreeMap::new(), &mut out);
        out
    }

    /// The subtree reached by following `tokens` from the root.
    pub fn at(&self, tokens: &[Literal]) -> Option<&TreeForm> {
        let mut cur = self;
        for t in tokens {
            match cur {
                TreeForm::Node(x, a, b) if *x == t.var => cur = if t.negated { b } else { a },
                _ => return None,
            }
        }
        Some(cur)
    }

    fn at_mut(&mut self, tokens: &[Literal]) -> Option<&mut TreeForm> {
        let mut cur = self;
        for t in tokens {
            match cur {
                TreeForm::Node(x, a, b) if *x == t.var => cur = if t.negated { b } else { a },
                _ => return None,
            }
        }
        Some(cur)
    }
}

impl fmt::Display for TreeForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

/// A path token: `x` for the then-branch of a test of `x`, `~x` for its
/// else-branch. Ordered by variable name, positive before negated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: String,
    pub negated: bool,
}

impl Literal {
    pub fn pos(x: impl Into<String>) -> Self {
        Literal {
            var: x.into(),
            negated: false,
        }
    }

    pub fn neg(x: impl Into<String>) -> Self {
        Literal {
            var: x.into(),
            negated: true,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~{}", self.var)
        } else {
            f.write_str(&self.var)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    Top,
    Bot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub tokens: Vec<Literal>,
    pub terminal: Terminal,
}

impl Path {
    /// Tokens sorted into canonical order; two paths are multiset
    /// equivalent when these agree.
    pub fn multiset(&self) -> Vec<Literal> {
        let mut t = self.tokens.clone();
        t.sort();
        t
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Paths {
    pub top: BTreeSet<Path>,
    pub bot: BTreeSet<Path>,
}

impl Paths {
    /// Every path regardless of terminal, as token sequences.
    pub fn shapes(&self) -> BTreeSet<Vec<Literal>> {
        self.top.iter().chain(&self.bot).map(|p| p.tokens.clone()).collect()
    }
}

pub const DEFAULT_NODE_BUDGET: usize = 1 << 20;

/// Tree form of a propositional formula: variables become `(x ? T : F)`,
/// compound conditions are flattened by grafting, constant conditions
/// select a branch.
pub fn to_tree_form(f: &Formula) -> Result<TreeForm, EquivError> {
    to_tree_form_with_budget(f, DEFAULT_NODE_BUDGET)
}

pub fn to_tree_form_with_budget(f: &Formula, budget: usize) -> Result<TreeForm, EquivError> {
    let core = f.desugar();
    let mut remaining = budget;
    let mut memo = HashMap::new();
    tree_of(&core, &mut remaining, budget, &mut memo)
}

fn spend(remaining: &mut usize, n: usize, budget: usize) -> Result<(), EquivError> {
    *remaining = remaining.checked_sub(n).ok_or(EquivError::NodeBudget(budget))?;
    Ok(())
}

fn tree_of(
    f: &Formula,
    remaining: &mut usize,
    budget: usize,
    memo: &mut HashMap<*const Formula, TreeForm>,
) -> Result<TreeForm, EquivError> {
    let key = f as *const Formula;
    if let Some(t) = memo.get(&key) {
        spend(remaining, t.size(), budget)?;
        return Ok(t.clone());
    }
    let t = match f {
        Formula::Top => TreeForm::Top,
        Formula::Bot => TreeForm::Bot,
        Formula::Var(x) => {
            spend(remaining, 3, budget)?;
            TreeForm::node(x.clone(), TreeForm::Top, TreeForm::Bot)
        }
        Formula::Ite(c, a, b) => {
            let a = tree_of(a, remaining, budget, memo)?;
            let b = tree_of(b, remaining, budget, memo)?;
            if let Formula::Var(x) = c.as_ref() {
                spend(remaining, 1, budget)?;
                TreeForm::node(x.clone(), a, b)
            } else {
                let c = tree_of(c, remaining, budget, memo)?;
                graft(&c, &a, &b, remaining, budget)?
            }
        }
        Formula::Cond { .. } => return Err(EquivError::Modal(f.to_string())),
        other => unreachable!("desugared formula contains {other}"),
    };
    memo.insert(key, t.clone());
    Ok(t)
}

/// Replaces the `T` leaves of `c` by `a` and its `F` leaves by `b`.
fn graft(c: &TreeForm, a: &TreeForm, b: &TreeForm, remaining: &mut usize, budget: usize) -> Result<TreeForm, EquivError> {
    Ok(match c {
        TreeForm::Top => {
            spend(remaining, a.size(), budget)?;
            a.clone()
        }
        TreeForm::Bot => {
            spend(remaining, b.size(), budget)?;
            b.clone()
        }
        TreeForm::Node(x, l, r) => {
            spend(remaining, 1, budget)?;
            TreeForm::node(
                x.clone(),
                graft(l, a, b, remaining, budget)?,
                graft(r, a, b, remaining, budget)?,
            )
        }
    })
}

/// `Top` and `Bot` path sets.
pub fn paths(t: &TreeForm) -> Paths {
    fn go(t: &TreeForm, prefix: &mut Vec<Literal>, out: &mut Paths) {
        match t {
            TreeForm::Top => {
                out.top.insert(Path {
                    tokens: prefix.clone(),
                    terminal: Terminal::Top,
                });
            }
            TreeForm::Bot => {
                out.bot.insert(Path {
                    tokens: prefix.clone(),
                    terminal: Terminal::Bot,
                });
            }
            TreeForm::Node(x, a, b) => {
                prefix.push(Literal::pos(x.clone()));
                go(a, prefix, out);
                prefix.pop();
                prefix.push(Literal::neg(x.clone()));
                go(b, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Paths::default();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// The sum over `Top` paths of the product of `p_x` for each token `x` and
/// `1 - p_x` for each token `~x`.
pub fn path_polynomial(t: &TreeForm) -> Polynomial {
    let mut sum = Polynomial::zero();
    for path in paths(t).top {
        let mut product = Polynomial::one();
        for tok in &path.tokens {
            let p = Polynomial::var(tok.var.clone());
            product = &product * &if tok.negated { p.one_minus() } else { p };
        }
        sum = &sum + &product;
    }
    sum
}

/// Variable sequence of a levelled tree: each variable in name order,
/// repeated as often as `degrees` says.
pub fn level_sequence(degrees: &BTreeMap<String, u32>) -> Vec<String> {
    degrees
        .iter()
        .flat_map(|(x, d)| std::iter::repeat_n(x.clone(), *d as usize))
        .collect()
}

/// Rebuilds `t` as a complete tree whose nodes at depth `k` all test
/// `seq[k]`. Missing tests are introduced as `(x ? R : R)` and tests are
/// moved upwards with the swap identity. Every variable of `t` must occur
/// in `seq` at least as often as along any path of `t`.
pub fn level(t: &TreeForm, seq: &[String]) -> TreeForm {
    match seq.split_first() {
        None => {
            assert!(
                matches!(t, TreeForm::Top | TreeForm::Bot),
                "level sequence is shorter than a path of the tree"
            );
            t.clone()
        }
        Some((v, rest)) => match pull(t, v) {
            TreeForm::Node(_, a, b) => TreeForm::node(v.clone(), level(&a, rest), level(&b, rest)),
            _ => unreachable!("pull yields a node"),
        },
    }
}

/// Brings the first test of `v` on every path to the root.
fn pull(t: &TreeForm, v: &str) -> TreeForm {
    match t {
        TreeForm::Top | TreeForm::Bot => TreeForm::node(v, t.clone(), t.clone()),
        TreeForm::Node(x, _, _) if x == v => t.clone(),
        TreeForm::Node(u, a, b) => match (pull(a, v), pull(b, v)) {
            (TreeForm::Node(_, p, q), TreeForm::Node(_, r, s)) => {
                TreeForm::node(v, TreeForm::Node(u.clone(), p, r), TreeForm::Node(u.clone(), q, s))
            }
            _ => unreachable!("pull yields a node"),
        },
    }
}

/// Exchanges the leaf reached by `top` (a `T`) with the leaf reached by
/// `bot` (an `F`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafSwap {
    pub top: Vec<Literal>,
    pub bot: Vec<Literal>,
}

impl fmt::Display for LeafSwap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &Vec<Literal>| {
            Path {
                tokens: p.clone(),
                terminal: Terminal::Top,
            }
            .to_string()
        };
        write!(f, "{} <-> {}", show(&self.top), show(&self.bot))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub lhs: TreeForm,
    pub rhs: TreeForm,
    /// Leaf exchanges between multiset-equivalent paths of `lhs`.
    pub swaps: Vec<LeafSwap>,
    /// Whether applying `swaps` to `lhs` yields `rhs`, which holds exactly
    /// when the inputs are equivalent.
    pub labels_match: bool,
}

/// Brings two tree forms to a common complete shape and lists the leaf
/// exchanges that turn the first into the second.
pub fn align_and_swap(lhs: &TreeForm, rhs: &TreeForm) -> Result<Alignment, EquivError> {
    align_and_swap_with_budget(lhs, rhs, DEFAULT_NODE_BUDGET)
}

pub fn align_and_swap_with_budget(lhs: &TreeForm, rhs: &TreeForm, budget: usize) -> Result<Alignment, EquivError> {
    let seq = common_sequence(lhs, rhs);
    if seq.len() >= usize::BITS as usize - 1 || (1usize << seq.len()) * 2 > budget {
        return Err(EquivError::NodeBudget(budget));
    }
    let l = level(lhs, &seq);
    let r = level(rhs, &seq);
    let (la, ra) = (leaf_labels(&l), leaf_labels(&r));
    let pairs = pair_mismatches(&la, &ra, &seq);
    let swaps: Vec<LeafSwap> = pairs
        .iter()
        .map(|&(t, b)| LeafSwap {
            top: index_path(t, &seq),
            bot: index_path(b, &seq),
        })
        .collect();
    let labels_match = apply_swaps(&l, &swaps).as_ref() == Some(&r);
    Ok(Alignment {
        lhs: l,
        rhs: r,
        swaps,
        labels_match,
    })
}

/// Level sequence covering the path counts of both trees.
pub fn common_sequence(a: &TreeForm, b: &TreeForm) -> Vec<String> {
    let mut degrees = a.path_counts();
    for (x, d) in b.path_counts() {
        let e = degrees.entry(x).or_insert(0);
        *e = (*e).max(d);
    }
    level_sequence(&degrees)
}

/// Performs the exchanges; `None` if a path is missing or a leaf does not
/// carry the expected constant.
pub fn apply_swaps(t: &TreeForm, swaps: &[LeafSwap]) -> Option<TreeForm> {
    let mut out = t.clone();
    for s in swaps {
        if out.at(&s.top)? != &TreeForm::Top || out.at(&s.bot)? != &TreeForm::Bot {
            return None;
        }
        *out.at_mut(&s.top)? = TreeForm::Bot;
        *out.at_mut(&s.bot)? = TreeForm::Top;
    }
    Some(out)
}

/// Leaf labels of a complete tree, then-branches first; `true` for `T`.
pub fn leaf_labels(t: &TreeForm) -> Vec<bool> {
    fn go(t: &TreeForm, out: &mut Vec<bool>) {
        match t {
            TreeForm::Top => out.push(true),
            TreeForm::Bot => out.push(false),
            TreeForm::Node(_, a, b) => {
                go(a, out);
                go(b, out);
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut out);
    out
}

/// Path of leaf `index` in a complete tree levelled by `seq`.
pub fn index_path(index: usize, seq: &[String]) -> Vec<Literal> {
    let depth = seq.len();
    seq.iter()
        .enumerate()
        .map(|(level, x)| Literal {
            var: x.clone(),
            negated: (index >> (depth - 1 - level)) & 1 == 1,
        })
        .collect()
}

/// Number of positive tokens of each variable along the path of leaf
/// `index`, in `seq` order of first appearance.
fn class_of<T: PartialEq>(index: usize, seq: &[T]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::new();
    let depth = seq.len();
    for (level, x) in seq.iter().enumerate() {
        if level == 0 || seq[level - 1] != *x {
            out.push(0);
        }
        if (index >> (depth - 1 - level)) & 1 == 0 {
            *out.last_mut().expect("pushed above") += 1;
        }
    }
    out
}

/// Pairs leaves labelled `T` in `a` but `F` in `b` with leaves of the same
/// class labelled `F` in `a` but `T` in `b`, preferring pairs that share a
/// long common prefix. Returns `(top_index, bot_index)` pairs relative to `a`.
pub(crate) fn pair_mismatches<T: PartialEq>(a: &[bool], b: &[bool], seq: &[T]) -> Vec<(usize, usize)> {
    type Pending = HashMap<Vec<u32>, (Vec<usize>, Vec<usize>)>;
    fn go<T: PartialEq>(lo: usize, len: usize, a: &[bool], b: &[bool], seq: &[T], out: &mut Vec<(usize, usize)>) -> Pending {
        if len == 1 {
            let mut m = Pending::new();
            match (a[lo], b[lo]) {
                (true, false) => m.entry(class_of(lo, seq)).or_default().0.push(lo),
                (false, true) => m.entry(class_of(lo, seq)).or_default().1.push(lo),
                _ => {}
            }
            return m;
        }
        let half = len / 2;
        let mut left = go(lo, half, a, b, seq, out);
        for (class, (tops, bots)) in go(lo + half, half, a, b, seq, out) {
            let slot = left.entry(class).or_default();
            slot.0.extend(tops);
            slot.1.extend(bots);
        }
        let mut keys: Vec<_> = left.keys().cloned().collect();
        keys.sort();
        for k in keys {
            let slot = left.get_mut(&k).expect("key taken from map");
            while !slot.0.is_empty() && !slot.1.is_empty() {
                let t = slot.0.remove(0);
                let u = slot.1.remove(0);
                out.push((t, u));
            }
            if slot.0.is_empty() && slot.1.is_empty() {
                left.remove(&k);
            }
        }
        left
    }
    assert_eq!(a.len(), b.len());
    assert_eq!(a.len(), 1 << seq.len());
    let mut out = Vec::new();
    go(0, a.len(), a, b, seq, &mut out);
    out
}
