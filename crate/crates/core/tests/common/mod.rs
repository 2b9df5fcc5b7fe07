//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use aleatoric::model::ProbModel;
use aleatoric::{Formula, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `P(at least k successes in n trials)` for success probability `p`.
pub fn binomial_tail(p: &Rational, k: u32, n: u32) -> Rational {
    let one = Rational::one();
    (k..=n)
        .map(|j| {
            let c = Rational::from_integer(binomial(n, j));
            c * num_traits::pow(p.clone(), j as usize) * num_traits::pow(&one - p, (n - j) as usize)
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// Direct reading of the truth-probability definition on the surface
/// syntax, with the abbreviations expanded by hand (conjunction as a
/// product, repetition as a binomial tail). Written independently of the
/// library's desugaring and evaluator.
pub fn oracle(m: &ProbModel, w: usize, f: &Formula) -> Rational {
    let one = Rational::one();
    let p = |g: &Formula| oracle(m, w, g);
    // <target | given>_agent with target and given sampled independently.
    let conditional = |target: &dyn Fn(usize) -> Rational, given: &dyn Fn(usize) -> Rational, agent: &str| {
        let row = m.distribution(agent, w).expect("known agent");
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for (u, weight) in row {
            let g = given(*u);
            num += weight * target(*u) * &g;
            den += weight * g;
        }
        if den.is_zero() {
            Rational::one()
        } else {
            num / den
        }
    };
    match f {
        Formula::Top => one,
        Formula::Bot => Rational::zero(),
        Formula::Var(x) => m.prob(w, x).expect("known variable").clone(),
        Formula::Ite(c, a, b) => {
            let pc = p(c);
            &pc * p(a) + (&one - &pc) * p(b)
        }
        Formula::And(a, b) => p(a) * p(b),
        Formula::Or(a, b) => {
            let pa = p(a);
            &pa + (&one - &pa) * p(b)
        }
        Formula::Implies(a, b) => {
            let pa = p(a);
            &pa * p(b) + (&one - &pa)
        }
        Formula::Not(a) => one - p(a),
        Formula::Cond { target, given, agent } => conditional(
            &|u| oracle(m, u, target),
            &|u| oracle(m, u, given),
            agent,
        ),
        Formula::Expect(agent, a) => conditional(&|u| oracle(m, u, a), &|_| Rational::one(), agent),
        Formula::Necessary(agent, a) => {
            conditional(&|_| Rational::zero(), &|u| Rational::one() - oracle(m, u, a), agent)
        }
        Formula::Repeat(a, k, n) => binomial_tail(&p(a), *k, *n),
    }
}

pub fn random_probability<R: Rng>(rng: &mut R, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    q(rng.gen_range(0..=d), d)
}

/// A model over the given variables and agents with one to three worlds.
/// About one row in seven is the empty distribution; other rows have
/// random weights, some of them zero.
pub fn random_model<R: Rng>(rng: &mut R, vars: &[&str], agents: &[&str]) -> ProbModel {
    let n = rng.gen_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut b = ProbModel::builder();
    for a in agents {
        b = b.agent(*a);
    }
    for x in vars {
        b = b.variable(*x);
    }
    for w in &names {
        let f: Vec<(String, Rational)> = vars.iter().map(|x| (x.to_string(), random_probability(rng, 6))).collect();
        b = b.world(w.clone(), f);
    }
    for a in agents {
        for from in &names {
            if rng.gen_ratio(1, 7) {
                continue;
            }
            let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let total: i64 = weights.iter().sum();
            let weights = if total == 0 { vec![1; n] } else { weights };
            let total: i64 = weights.iter().sum();
            for (to, wt) in names.iter().zip(weights) {
                if wt > 0 {
                    b = b.pi(*a, from.clone(), to.clone(), q(wt, total));
                }
            }
        }
    }
    b.build().expect("generated models are well formed")
}

/// A random formula of depth at most `depth`; with `modal` it may contain
/// conditionals and the modal abbreviations.
pub fn random_formula<R: Rng>(rng: &mut R, depth: u32, vars: &[&str], agents: &[&str], modal: bool) -> Formula {
    let leaf = |rng: &mut R| match rng.gen_range(0..6) {
        0 => Formula::Top,
        1 => Formula::Bot,
        _ => Formula::var(vars[rng.gen_range(0..vars.len())]),
    };
    if depth == 0 || rng.gen_ratio(1, 4) {
        return leaf(rng);
    }
    let sub = |rng: &mut R| random_formula(rng, depth - 1, vars, agents, modal);
    let agent = |rng: &mut R| agents[rng.gen_range(0..agents.len())].to_string();
    let kinds = if modal { 10 } else { 6 };
    match rng.gen_range(0..kinds) {
        0 | 1 => Formula::ite(sub(rng), sub(rng), sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        3 => Formula::or(sub(rng), sub(rng)),
        4 => Formula::not(sub(rng)),
        5 => {
            let n = rng.gen_range(1..=3);
            Formula::repeat(sub(rng), rng.gen_range(0..=n), n)
        }
        6 | 7 => Formula::cond(sub(rng), sub(rng), agent(rng)),
        8 => Formula::expect(agent(rng), sub(rng)),
        _ => Formula::necessary(agent(rng), sub(rng)),
    }
}

/// Replaces every metavariable of an axiom pattern and its agent
/// metavariable `i` simultaneously.
pub fn instantiate(pattern: &Formula, terms: &BTreeMap<String, Formula>, agent: &str) -> Formula {
    match pattern {
        Formula::Var(m) => terms[m].clone(),
        Formula::Top | Formula::Bot => pattern.clone(),
        Formula::Ite(c, a, b) => Formula::ite(
            instantiate(c, terms, agent),
            instantiate(a, terms, agent),
            instantiate(b, terms, agent),
        ),
        Formula::Cond { target, given, .. } => {
            Formula::cond(instantiate(target, terms, agent), instantiate(given, terms, agent), agent)
        }
        other => panic!("patterns are core formulas: {other}"),
    }
}

pub fn metavariables(pattern: &Formula, out: &mut Vec<String>) {
    match pattern {
        Formula::Var(m) if !out.contains(m) => out.push(m.clone()),
        Formula::Ite(c, a, b) => {
            metavariables(c, out);
            metavariables(a, out);
            metavariables(b, out);
        }
        Formula::Cond { target, given, .. } => {
            metavariables(target, out);
            metavariables(given, out);
        }
        _ => {}
    }
}

/// Every formula built from `T`, `F`, `x`, `y` with exactly `k` if-then-else
/// nodes.
pub fn enumerate_ite(k: usize) -> Vec<Formula> {
    if k == 0 {
        return vec![Formula::Top, Formula::Bot, Formula::var("x"), Formula::var("y")];
    }
    let mut out = Vec::new();
    for a in 0..k {
        for b in 0..k - a {
            let c = k - 1 - a - b;
            let (ca, cb, cc) = (enumerate_ite(a), enumerate_ite(b), enumerate_ite(c));
            for p in &ca {
                for t in &cb {
                    for e in &cc {
                        out.push(Formula::ite(p.clone(), t.clone(), e.clone()));
                    }
                }
            }
        }
    }
    out
}
