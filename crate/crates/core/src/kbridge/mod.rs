//! The modal logic K over several agents and its embedding into the
//! calculus.
//!
//! [`lambda_formula`] maps a K formula to a formula of the calculus and
//! [`lambda_model`] maps a serial Kripke model to a probability model whose
//! worlds are deterministic. [`generalisation_check`] evaluates both sides
//! at one world; [`run_harness`] does so over random models and formulas.

mod syntax;

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{validate_kripke, KripkeModel, KripkeViolation, ModelError, ProbModel};
use crate::rational::Rational;
use crate::semantics::{evaluate, EvalError};
use crate::syntax::Formula;

pub use syntax::{KFormula, KParseError};

#[derive(Debug, Error)]
pub enum KError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("the model is not serial: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotSerial(Vec<KripkeViolation>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The worlds of `m` satisfying `phi`.
pub fn eval_k(m: &KripkeModel, phi: &KFormula) -> Result<BTreeSet<usize>, KError> {
    let all: BTreeSet<usize> = (0..m.worlds().len()).collect();
    Ok(match phi {
        KFormula::Prop(q) => m.holds(q).ok_or_else(|| KError::UnknownProposition(q.clone()))?.clone(),
        KFormula::And(a, b) => {
            let a = eval_k(m, a)?;
            let b = eval_k(m, b)?;
            a.intersection(&b).copied().collect()
        }
        KFormula::Not(a) => all.difference(&eval_k(m, a)?).copied().collect(),
        KFormula::Box(agent, a) => {
            let sat = eval_k(m, a)?;
            let mut out = BTreeSet::new();
            for w in all {
                let succ = m.successors(agent, w).ok_or_else(|| KError::UnknownAgent(agent.clone()))?;
                if succ.is_subset(&sat) {
                    out.insert(w);
                }
            }
            out
        }
    })
}

/// Name of the variable standing for proposition `q`.
pub fn variable_for(q: &str) -> String {
    format!("x_{q}")
}

pub fn lambda_formula(phi: &KFormula) -> Formula {
    match phi {
        KFormula::Prop(q) => Formula::var(variable_for(q)),
        KFormula::And(a, b) => Formula::ite(lambda_formula(a), lambda_formula(b), Formula::Bot),
        KFormula::Not(a) => negation(lambda_formula(a)),
        KFormula::Box(agent, a) => Formula::cond(Formula::Bot, negation(lambda_formula(a)), agent.clone()),
    }
}

fn negation(a: Formula) -> Formula {
    Formula::ite(a, Formula::Bot, Formula::Top)
}

/// How the accessibility relation is turned into distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Every successor gets the same weight.
    Uniform,
    /// Successors get integer weights drawn from `1..=9`, seeded.
    RandomWeights(u64),
}

pub fn lambda_model(m: &KripkeModel, choice: Distribution) -> Result<ProbModel, KError> {
    let serial: Vec<KripkeViolation> = validate_kripke(m, false);
    if !serial.is_empty() {
        return Err(KError::NotSerial(serial));
    }
    let mut b = ProbModel::builder();
    for a in m.agents() {
        b = b.agent(a);
    }
    let props: Vec<&str> = m.propositions().collect();
    for q in &props {
        b = b.variable(variable_for(q));
    }
    for (w, name) in m.worlds().iter().enumerate() {
        let f = props.iter().map(|q| {
            let holds = m.holds(q).expect("listed proposition").contains(&w);
            (variable_for(q), if holds { Rational::one() } else { Rational::zero() })
        });
        b = b.world(name.clone(), f);
    }
    let mut rng = match choice {
        Distribution::Uniform => None,
        Distribution::RandomWeights(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    for a in m.agents() {
        for (w, from) in m.worlds().iter().enumerate() {
            let succ = m.successors(a, w).expect("agent listed by the model");
            let weights: Vec<i64> = succ
                .iter()
                .map(|_| rng.as_mut().map_or(1, |r| r.gen_range(1..=9)))
                .collect();
            let total: i64 = weights.iter().sum();
            for (&v, wt) in succ.iter().zip(weights) {
                b = b.pi(a, from.clone(), m.worlds()[v].clone(), Rational::new(wt.into(), total.into()));
            }
        }
    }
    Ok(b.build()?)
}

/// Both sides of the translation at one world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agreement {
    /// Whether the world satisfies the K formula.
    pub kripke: bool,
    /// Value of the translated formula in the translated model.
    pub value: Rational,
}

impl Agreement {
    pub fn two_valued(&self) -> bool {
        self.value.is_zero() || self.value.is_one()
    }

    pub fn agrees(&self) -> bool {
        self.two_valued() && self.kripke == self.value.is_one()
    }
}

pub fn generalisation_check(
    m: &KripkeModel,
    world: &str,
    phi: &KFormula,
    choice: Distribution,
) -> Result<Agreement, KError> {
    let w = m.world_index(world).ok_or_else(|| KError::UnknownWorld(world.to_string()))?;
    let kripke = eval_k(m, phi)?.contains(&w);
    let pm = lambda_model(m, choice)?;
    let value = evaluate(&pm, world, &lambda_formula(phi))?.into_inner();
    Ok(Agreement { kripke, value })
}

/// A random serial model with between one and `max_worlds` worlds.
///
/// With `frame_conditions` every relation is also transitive and
/// euclidean: worlds are sent to clusters that see exactly themselves.
pub fn random_serial_model<R: Rng>(
    rng: &mut R,
    max_worlds: usize,
    agents: &[&str],
    propositions: &[&str],
    frame_conditions: bool,
) -> KripkeModel {
    let n = rng.gen_range(1..=max_worlds);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut b = KripkeModel::builder();
    for w in &names {
        b = b.world(w.clone());
    }
    for &a in agents {
        b = b.agent(a);
        if frame_conditions {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            let clusters = rng.gen_range(1..=n);
            // The first `clusters` worlds of the shuffle seed the clusters.
            let mut cluster_of = vec![0; n];
            let mut members: Vec<Vec<usize>> = (0..clusters).map(|c| vec![order[c]]).collect();
            for (c, &w) in order.iter().enumerate().take(clusters) {
                cluster_of[w] = c;
            }
            for &w in &order[clusters..] {
                let c = rng.gen_range(0..clusters);
                cluster_of[w] = c;
                if rng.gen_bool(0.5) {
                    members[c].push(w);
                }
            }
            for w in 0..n {
                for &v in &members[cluster_of[w]] {
                    b = b.edge(a, names[w].clone(), names[v].clone());
                }
            }
        } else {
            for w in 0..n {
                let forced = rng.gen_range(0..n);
                for v in 0..n {
                    if v == forced || rng.gen_bool(0.4) {
                        b = b.edge(a, names[w].clone(), names[v].clone());
                    }
                }
            }
        }
    }
    for &q in propositions {
        let holds: Vec<String> = names.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        b = b.proposition(q, holds);
    }
    b.build().expect("generated models are well formed")
}

/// A random K formula of depth at most `max_depth`.
pub fn random_kformula<R: Rng>(rng: &mut R, max_depth: usize, agents: &[&str], propositions: &[&str]) -> KFormula {
    if max_depth == 0 || rng.gen_bool(0.25) {
        return KFormula::prop(*propositions.choose(rng).expect("at least one proposition"));
    }
    match rng.gen_range(0..3) {
        0 => KFormula::and(
            random_kformula(rng, max_depth - 1, agents, propositions),
            random_kformula(rng, max_depth - 1, agents, propositions),
        ),
        1 => KFormula::not(random_kformula(rng, max_depth - 1, agents, propositions)),
        _ => KFormula::boxed(
            *agents.choose(rng).expect("at least one agent"),
            random_kformula(rng, max_depth - 1, agents, propositions),
        ),
    }
}

/// Outcome of [`run_harness`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarnessReport {
    /// Model and formula pairs generated.
    pub cases: usize,
    /// World and distribution checks performed.
    pub checks: usize,
    /// Printed formula, world and distribution for every disagreement.
    pub failures: Vec<String>,
}

/// Checks every world of `cases` random serial models (up to five worlds,
/// agents `a` and `b`) against a random formula of depth at most four,
/// under both uniform and random weights. Half the models satisfy the
/// transitive and euclidean conditions. Case `k` uses seed `seed + k`.
pub fn run_harness(cases: usize, seed: u64) -> HarnessReport {
    const AGENTS: [&str; 2] = ["a", "b"];
    const PROPS: [&str; 3] = ["p", "q", "r"];
    let per_case: Vec<(usize, Vec<String>)> = (0..cases)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let m = random_serial_model(&mut rng, 5, &AGENTS, &PROPS, k % 2 == 1);
            let phi = random_kformula(&mut rng, 4, &AGENTS, &PROPS);
            let mut checks = 0;
            let mut failures = Vec::new();
            for choice in [Distribution::Uniform, Distribution::RandomWeights(rng.gen())] {
                for w in m.worlds() {
                    checks += 1;
                    match generalisation_check(&m, w, &phi, choice) {
                        Ok(a) if a.agrees() => {}
                        Ok(a) => failures.push(format!("case {k}: {phi} at {w} ({choice:?}): {a:?}")),
                        Err(e) => failures.push(format!("case {k}: {phi} at {w} ({choice:?}): {e}")),
                    }
                }
            }
            (checks, failures)
        })
        .collect();
    let mut report = HarnessReport {
        cases,
        ..HarnessReport::default()
    };
    for (checks, failures) in per_case {
        report.checks += checks;
        report.failures.extend(failures);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn k(s: &str) -> KFormula {
        s.parse().unwrap()
    }

    fn reflexive(holds: &[&str]) -> KripkeModel {
        KripkeModel::builder()
            .world("w")
            .agent("i")
            .edge("i", "w", "w")
            .proposition("q", holds.iter().copied())
            .build()
            .unwrap()
    }

    fn names(m: &KripkeModel, s: &BTreeSet<usize>) -> Vec<String> {
        s.iter().map(|&i| m.worlds()[i].clone()).collect()
    }

    #[test]
    fn kripke_semantics() {
        let m = reflexive(&["w"]);
        assert_eq!(names(&m, &eval_k(&m, &k("box@i q")).unwrap()), ["w"]);
        assert!(eval_k(&m, &k("~q")).unwrap().is_empty());
        let m = KripkeModel::builder()
            .world("w")
            .world("u")
            .agent("i")
            .edge("i", "w", "u")
            .edge("i", "u", "u")
            .proposition("q", ["u"])
            .build()
            .unwrap();
        assert!(names(&m, &eval_k(&m, &k("box@i q")).unwrap()).contains(&"w".to_string()));
        assert!(matches!(eval_k(&m, &k("r")), Err(KError::UnknownProposition(_))));
        assert!(matches!(eval_k(&m, &k("box@j q")), Err(KError::UnknownAgent(_))));
    }

    #[test]
    fn translation_table() {
        assert_eq!(lambda_formula(&k("q")), Formula::var("x_q"));
        assert_eq!(lambda_formula(&k("~q")), "(x_q ? F : T)".parse().unwrap());
        assert_eq!(lambda_formula(&k("box@i q")), "[F | (x_q ? F : T)]@i".parse().unwrap());
        assert_eq!(lambda_formula(&k("p & q")), "(x_p ? x_q : F)".parse().unwrap());
        // Box is the necessity abbreviation.
        assert_eq!(lambda_formula(&k("box@i q")), "B@i x_q".parse::<Formula>().unwrap().desugar());
    }

    #[test]
    fn translated_models() {
        let pm = lambda_model(&reflexive(&["w"]), Distribution::Uniform).unwrap();
        assert_eq!(pm.pi("i", 0, 0), Some(ratio(1, 1)));
        assert_eq!(pm.prob(0, "x_q"), Some(&ratio(1, 1)));
        let pm = lambda_model(&reflexive(&[]), Distribution::Uniform).unwrap();
        assert_eq!(pm.prob(0, "x_q"), Some(&ratio(0, 1)));

        let fork = KripkeModel::builder()
            .world("w")
            .world("u")
            .world("v")
            .agent("i")
            .edge("i", "w", "u")
            .edge("i", "w", "v")
            .edge("i", "u", "u")
            .edge("i", "v", "v")
            .proposition("q", ["u"])
            .build()
            .unwrap();
        let pm = lambda_model(&fork, Distribution::Uniform).unwrap();
        assert_eq!(pm.pi("i", 0, 1), Some(ratio(1, 2)));
        assert_eq!(pm.pi("i", 0, 2), Some(ratio(1, 2)));
        assert_eq!(pm.pi("i", 0, 0), Some(ratio(0, 1)));
        let pm = lambda_model(&fork, Distribution::RandomWeights(7)).unwrap();
        assert!(pm.validate().is_empty());
        let row = pm.distribution("i", 0).unwrap();
        assert_eq!(row.iter().map(|(_, p)| p.clone()).sum::<Rational>(), int(1));
        assert!(row.iter().all(|(v, p)| *v != 0 && *p > Rational::zero()));
    }

    #[test]
    fn seriality_is_required() {
        let m = KripkeModel::builder()
            .world("w")
            .world("u")
            .agent("i")
            .edge("i", "w", "u")
            .build()
            .unwrap();
        match lambda_model(&m, Distribution::Uniform) {
            Err(KError::NotSerial(v)) => assert_eq!(
                v,
                vec![KripkeViolation::NotSerial {
                    agent: "i".into(),
                    world: "u".into()
                }]
            ),
            other => panic!("expected a seriality error, got {other:?}"),
        }
    }

    #[test]
    fn both_sides_agree_on_the_reflexive_singleton() {
        let a = generalisation_check(&reflexive(&["w"]), "w", &k("box@i q"), Distribution::Uniform).unwrap();
        assert_eq!(a, Agreement { kripke: true, value: int(1) });
        let a = generalisation_check(&reflexive(&[]), "w", &k("box@i q"), Distribution::Uniform).unwrap();
        assert_eq!(a, Agreement { kripke: false, value: int(0) });
    }

    #[test]
    fn generated_models_meet_their_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..50 {
            let strict = n % 2 == 0;
            let m = random_serial_model(&mut rng, 5, &["a", "b"], &["p"], strict);
            assert!(validate_kripke(&m, strict).is_empty());
        }
    }

    #[test]
    fn small_harness() {
        let r = run_harness(40, 11);
        assert_eq!(r.cases, 40);
        assert!(r.failures.is_empty(), "{:?}", r.failures);
    }
}
