//! Exact evaluation of formulas on pointed probability models, and a sampler
//! that follows the operational reading of the semantics.
//!
//! `P_w(T) = 1`, `P_w(F) = 0`, `P_w(x) = f_w(x)`,
//! `P_w((c ? a : b)) = P_w(c)·P_w(a) + (1 - P_w(c))·P_w(b)`, and
//! `P_w([a | b]@i) = E(a & b) / E(b)` when `E(b) > 0`, else 1, where
//! `E(g) = Σ_u pi_i(w, u)·P_u(g)`. The conjunction in the numerator is the
//! abbreviation `(a ? b : F)`, so `P_u(a & b) = P_u(a)·P_u(b)`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::ProbModel;
use crate::rational::{format_decimal, format_exact, to_f64, Rational};
use crate::syntax::Formula;

pub const DEFAULT_MAX_REJECTIONS: u64 = 1_000_000;

/// Samples handled by one deterministic random stream in [`estimate`].
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("variable `{0}` is not declared by the model")]
    UnknownVariable(String),
    #[error("agent `{0}` is not declared by the model")]
    UnknownAgent(String),
    #[error("no world satisfying the condition of agent `{agent}` at `{world}` after {draws} draws")]
    RejectionBudgetExhausted { agent: String, world: String, draws: u64 },
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// An exact expectation in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Expectation(Rational);

impl Expectation {
    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    pub fn decimal(&self, significant: usize) -> String {
        format_decimal(&self.0, significant)
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_exact(&self.0))
    }
}

/// Rejects formulas mentioning variables or agents the model does not declare.
fn check_names(model: &ProbModel, f: &Formula) -> Result<(), EvalError> {
    for x in f.variables() {
        if !model.variables().contains(&x) {
            return Err(EvalError::UnknownVariable(x));
        }
    }
    for i in f.agents() {
        if !model.has_agent(&i) {
            return Err(EvalError::UnknownAgent(i));
        }
    }
    Ok(())
}

fn world_index(model: &ProbModel, world: &str) -> Result<usize, EvalError> {
    model
        .world_index(world)
        .ok_or_else(|| EvalError::UnknownWorld(world.to_string()))
}

/// `P_w(φ)`.
pub fn evaluate(model: &ProbModel, world: &str, f: &Formula) -> Result<Expectation, EvalError> {
    let w = world_index(model, world)?;
    check_names(model, f)?;
    let core = f.desugar();
    Ok(Expectation(Evaluator::new(model).value(&core, w)))
}

/// `E^i_w(φ) = Σ_u pi_i(w,u)·P_u(φ)`; zero for the empty distribution.
pub fn expectation(model: &ProbModel, agent: &str, world: &str, f: &Formula) -> Result<Expectation, EvalError> {
    let w = world_index(model, world)?;
    if !model.has_agent(agent) {
        return Err(EvalError::UnknownAgent(agent.to_string()));
    }
    check_names(model, f)?;
    let core = f.desugar();
    Ok(Expectation(Evaluator::new(model).expectation(agent, w, &core)))
}

/// Memoizing evaluator over core formulas.
///
/// Memo keys are node addresses, so every formula passed in must outlive the
/// evaluator's use of it (callers keep the desugared tree alive).
pub(crate) struct Evaluator<'m> {
    model: &'m ProbModel,
    memo: HashMap<(*const Formula, usize), Rational>,
}

impl<'m> Evaluator<'m> {
    pub(crate) fn new(model: &'m ProbModel) -> Self {
        Evaluator {
            model,
            memo: HashMap::new(),
        }
    }

    pub(crate) fn value(&mut self, f: &Formula, w: usize) -> Rational {
        let key = (f as *const Formula, w);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = match f {
            Formula::Top => Rational::one(),
            Formula::Bot => Rational::zero(),
            Formula::Var(x) => self
                .model
                .prob(w, x)
                .cloned()
                .expect("variables are checked before evaluation"),
            Formula::Ite(c, a, b) => {
                let pc = self.value(c, w);
                // Skip the branch that carries zero weight.
                let mut out = Rational::zero();
                if !pc.is_zero() {
                    out += &pc * self.value(a, w);
                }
                if !pc.is_one() {
                    out += (Rational::one() - &pc) * self.value(b, w);
                }
                out
            }
            Formula::Cond { target, given, agent } => {
                let (num, den) = self.conditional_parts(agent, w, target, given);
                if den.is_zero() {
                    Rational::one()
                } else {
                    num / den
                }
            }
            other => panic!("evaluator expects core formulas, got {other}"),
        };
        self.memo.insert(key, v.clone());
        v
    }

    /// `(E(target & given), E(given))` for `agent` at `w`.
    fn conditional_parts(&mut self, agent: &str, w: usize, target: &Formula, given: &Formula) -> (Rational, Rational) {
        let model = self.model;
        let row = model.distribution(agent, w).expect("agents are checked before evaluation");
        let mut num = Rational::zero();
        let mut den = Rational::zero();
        for (u, p) in row {
            let pg = self.value(given, *u);
            if pg.is_zero() {
                continue;
            }
            let weighted = p * &pg;
            num += &weighted * self.value(target, *u);
            den += weighted;
        }
        (num, den)
    }

    pub(crate) fn expectation(&mut self, agent: &str, w: usize, f: &Formula) -> Rational {
        let model = self.model;
        let row = model.distribution(agent, w).expect("agents are checked before evaluation");
        let mut sum = Rational::zero();
        for (u, p) in row {
            sum += p * self.value(f, *u);
        }
        sum
    }
}

/// One Bernoulli draw of the sampling protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOutcome {
    pub truth: bool,
    /// One plus the number of rejected world draws.
    pub trials_used: u64,
}

/// Draws one sample of `f` at `world`: every variable occurrence is sampled
/// afresh, an if-then-else samples its condition and then one branch, and a
/// conditional keeps drawing worlds until its condition samples true.
pub fn sample<R: Rng>(
    model: &ProbModel,
    world: &str,
    f: &Formula,
    rng: &mut R,
    max_rejections: u64,
) -> Result<SampleOutcome, EvalError> {
    let w = world_index(model, world)?;
    check_names(model, f)?;
    let core = f.desugar();
    let mut sampler = Sampler::new(model, max_rejections);
    sampler.draw(&core, w, rng)
}

/// Mean of `n` samples. Deterministic for a fixed seed regardless of the
/// number of worker threads: samples are split into fixed-size chunks, each
/// with its own random stream, merged in chunk order.
pub fn estimate(model: &ProbModel, world: &str, f: &Formula, n: u64, seed: u64) -> Result<Rational, EvalError> {
    estimate_with_budget(model, world, f, n, seed, DEFAULT_MAX_REJECTIONS)
}

pub fn estimate_with_budget(
    model: &ProbModel,
    world: &str,
    f: &Formula,
    n: u64,
    seed: u64,
    max_rejections: u64,
) -> Result<Rational, EvalError> {
    if n == 0 {
        return Err(EvalError::NoSamples);
    }
    let w = world_index(model, world)?;
    check_names(model, f)?;
    let core = f.desugar();
    let chunks = n.div_ceil(CHUNK);
    let counts: Vec<Result<u64, EvalError>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let mut sampler = Sampler::new(model, max_rejections);
            let size = CHUNK.min(n - chunk * CHUNK);
            let mut hits = 0;
            for _ in 0..size {
                if sampler.draw(&core, w, &mut rng)?.truth {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let mut hits = 0u64;
    for c in counts {
        hits += c?;
    }
    Ok(Rational::new(hits.into(), n.into()))
}

struct Sampler<'m> {
    model: &'m ProbModel,
    exact: Evaluator<'m>,
    max_rejections: u64,
    vacuous: HashMap<(*const Formula, usize, String), bool>,
    thresholds: HashMap<(usize, String), f64>,
    cumulative: HashMap<(String, usize), Vec<(usize, f64)>>,
}

impl<'m> Sampler<'m> {
    fn new(model: &'m ProbModel, max_rejections: u64) -> Self {
        Sampler {
            model,
            exact: Evaluator::new(model),
            max_rejections,
            vacuous: HashMap::new(),
            thresholds: HashMap::new(),
            cumulative: HashMap::new(),
        }
    }

    fn draw<R: Rng>(&mut self, f: &Formula, w: usize, rng: &mut R) -> Result<SampleOutcome, EvalError> {
        let mut trials = 1;
        let truth = self.go(f, w, rng, &mut trials)?;
        Ok(SampleOutcome {
            truth,
            trials_used: trials,
        })
    }

    fn go<R: Rng>(&mut self, f: &Formula, w: usize, rng: &mut R, trials: &mut u64) -> Result<bool, EvalError> {
        match f {
            Formula::Top => Ok(true),
            Formula::Bot => Ok(false),
            Formula::Var(x) => {
                let model = self.model;
                let p = *self
                    .thresholds
                    .entry((w, x.clone()))
                    .or_insert_with(|| to_f64(model.prob(w, x).expect("checked variable")));
                Ok(rng.gen::<f64>() < p)
            }
            Formula::Ite(c, a, b) => {
                if self.go(c, w, rng, trials)? {
                    self.go(a, w, rng, trials)
                } else {
                    self.go(b, w, rng, trials)
                }
            }
            Formula::Cond { target, given, agent } => {
                let key = (given.as_ref() as *const Formula, w, agent.clone());
                let vacuous = match self.vacuous.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = self.exact.expectation(agent, w, given).is_zero();
                        self.vacuous.insert(key, v);
                        v
                    }
                };
                if vacuous {
                    return Ok(true);
                }
                let mut draws = 0;
                loop {
                    if draws >= self.max_rejections {
                        return Err(EvalError::RejectionBudgetExhausted {
                            agent: agent.clone(),
                            world: self.model.worlds()[w].clone(),
                            draws,
                        });
                    }
                    draws += 1;
                    let u = self.pick_world(agent, w, rng);
                    if self.go(given, u, rng, trials)? {
                        *trials += draws - 1;
                        return self.go(target, u, rng, trials);
                    }
                }
            }
            other => panic!("sampler expects core formulas, got {other}"),
        }
    }

    fn pick_world<R: Rng>(&mut self, agent: &str, w: usize, rng: &mut R) -> usize {
        let model = self.model;
        let cdf = self.cumulative.entry((agent.to_string(), w)).or_insert_with(|| {
            let mut acc = 0.0;
            model
                .distribution(agent, w)
                .expect("checked agent")
                .iter()
                .map(|(u, p)| {
                    acc += to_f64(p);
                    (*u, acc)
                })
                .collect()
        });
        let total = cdf.last().map(|(_, c)| *c).unwrap_or(0.0);
        let r = rng.gen::<f64>() * total;
        cdf.iter().find(|(_, c)| r < *c).or(cdf.last()).map(|(u, _)| *u).expect("non-empty distribution")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{dice, pig};
    use crate::rational::ratio;

    fn eval(m: &ProbModel, w: &str, text: &str) -> Rational {
        evaluate(m, w, &text.parse().unwrap()).unwrap().into_inner()
    }

    #[test]
    fn dice_repeat_values() {
        let m = dice();
        assert_eq!(eval(&m, "w4", "p1^{1/2}"), ratio(7, 16));
        assert_eq!(eval(&m, "w6", "p1^{1/2}"), ratio(11, 36));
        assert_eq!(eval(&m, "w4", "T"), ratio(1, 1));
    }

    #[test]
    fn conditional_follows_the_quotient_rule() {
        // (1/2·1/16 + 1/2·1/36) / (1/2·1/4 + 1/2·1/6)
        let m = dice();
        assert_eq!(eval(&m, "w4", "[p1 | p1]@a"), ratio(13, 60));
        assert_eq!(eval(&m, "w6", "[p1 | p1]@a"), ratio(13, 60));
    }

    #[test]
    fn pig_table_values() {
        let m = pig();
        assert_eq!(eval(&m, "biased", "(gt2 ? F : odd)"), ratio(3, 20));
        assert_eq!(eval(&m, "biased", "(odd ? F : gt2)"), ratio(7, 20));
        assert_eq!(eval(&m, "biased", "[(gt2 ? F : odd) | (odd ? F : gt2)]@a"), ratio(123, 520));
        assert_eq!(eval(&m, "biased", "[(gt2 ? F : odd) | T]@a"), ratio(6, 25));
    }

    #[test]
    fn expectation_examples() {
        let m = dice();
        let e = expectation(&m, "a", "w4", &"p1".parse().unwrap()).unwrap();
        assert_eq!(e.value(), &ratio(5, 24));
        let e = expectation(&m, "a", "w4", &Formula::Bot).unwrap();
        assert_eq!(e.value(), &ratio(0, 1));
        let lonely = ProbModel::builder()
            .agent("i")
            .world("w", Vec::<(String, Rational)>::new())
            .build()
            .unwrap();
        let e = expectation(&lonely, "i", "w", &Formula::Top).unwrap();
        assert_eq!(e.value(), &ratio(0, 1));
        // Every conditional is vacuous under the empty distribution.
        assert_eq!(eval(&lonely, "w", "[F | T]@i"), ratio(1, 1));
    }

    #[test]
    fn errors() {
        let m = dice();
        assert_eq!(
            evaluate(&m, "w5", &Formula::Top),
            Err(EvalError::UnknownWorld("w5".into()))
        );
        assert_eq!(
            evaluate(&m, "w4", &"q".parse().unwrap()),
            Err(EvalError::UnknownVariable("q".into()))
        );
        assert_eq!(
            evaluate(&m, "w4", &"E@b p1".parse().unwrap()),
            Err(EvalError::UnknownAgent("b".into()))
        );
        assert!(matches!(
            expectation(&m, "z", "w4", &Formula::Top),
            Err(EvalError::UnknownAgent(_))
        ));
    }

    #[test]
    fn sample_constants() {
        let m = dice();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            assert!(sample(&m, "w4", &Formula::Top, &mut rng, 10).unwrap().truth);
            assert!(!sample(&m, "w4", &Formula::Bot, &mut rng, 10).unwrap().truth);
        }
    }

    #[test]
    fn vacuous_conditional_samples_true() {
        let m = dice();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = sample(&m, "w4", &"[p1 | F]@a".parse().unwrap(), &mut rng, 5).unwrap();
        assert!(out.truth);
        assert_eq!(out.trials_used, 1);
    }

    #[test]
    fn rejection_budget_is_reported() {
        // The condition has probability 1/2^40 per draw.
        let m = ProbModel::builder()
            .agent("i")
            .variable("x")
            .world("w", [("x", Rational::new(1.into(), num_bigint::BigInt::from(1u64 << 40)))])
            .pi("i", "w", "w", ratio(1, 1))
            .build()
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let err = sample(&m, "w", &"[T | x]@i".parse().unwrap(), &mut rng, 100).unwrap_err();
        assert!(matches!(err, EvalError::RejectionBudgetExhausted { draws: 100, .. }));
    }

    #[test]
    fn estimate_is_deterministic_and_exact_for_constants() {
        let m = dice();
        assert_eq!(estimate(&m, "w4", &Formula::Top, 10, 0).unwrap(), ratio(1, 1));
        let f: Formula = "p1^{1/2}".parse().unwrap();
        assert_eq!(
            estimate(&m, "w4", &f, 5000, 42).unwrap(),
            estimate(&m, "w4", &f, 5000, 42).unwrap()
        );
        assert_eq!(estimate(&m, "w4", &f, 0, 42), Err(EvalError::NoSamples));
    }
}
