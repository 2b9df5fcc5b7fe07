//! Semantic equivalence of propositional formulas.
//!
//! A formula without conditionals denotes a polynomial in the variable
//! probabilities `p_x`, and two such formulas agree on every model exactly
//! when their polynomials are identical. [`decide_equiv`] compares
//! polynomials; the tree-form and path machinery in [`tree`] produces the
//! shapes and leaf exchanges from which proofs are built.

mod polynomial;
pub mod tree;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::model::ProbModel;
use crate::rational::{format_exact, Rational};
use crate::semantics::evaluate;
use crate::syntax::Formula;

pub use polynomial::{polynomial, Monomial, Polynomial};
pub use tree::{
    align_and_swap, apply_swaps, path_polynomial, paths, to_tree_form, to_tree_form_with_budget, Alignment, LeafSwap,
    Literal, Path, Paths, Terminal, TreeForm, DEFAULT_NODE_BUDGET,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("formula contains a conditional expectation: {0}")]
    Modal(String),
    #[error("tree form exceeds the node budget of {0}")]
    NodeBudget(usize),
}

/// Why two formulas are or are not equivalent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Both formulas denote this polynomial.
    Polynomial(Polynomial),
    /// A point where the two values differ, checked by exact evaluation.
    Witness {
        point: BTreeMap<String, Rational>,
        lhs: Rational,
        rhs: Rational,
    },
    /// A monomial whose coefficients differ; used only when no sampled
    /// point separates the formulas.
    Monomial {
        monomial: Monomial,
        lhs: Rational,
        rhs: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub equivalent: bool,
    pub certificate: Certificate,
}

impl Decision {
    pub fn to_json(&self) -> Value {
        match &self.certificate {
            Certificate::Polynomial(p) => json!({"equivalent": true, "polynomial": p.to_string()}),
            Certificate::Witness { point, lhs, rhs } => {
                let witness: serde_json::Map<String, Value> =
                    point.iter().map(|(x, v)| (x.clone(), Value::from(format_exact(v)))).collect();
                json!({
                    "equivalent": false,
                    "witness": witness,
                    "lhs": format_exact(lhs),
                    "rhs": format_exact(rhs),
                })
            }
            Certificate::Monomial { monomial, lhs, rhs } => json!({
                "equivalent": false,
                "monomial": monomial.to_string(),
                "lhs": format_exact(lhs),
                "rhs": format_exact(rhs),
            }),
        }
    }
}

const WITNESS_TRIES: usize = 64;
const WITNESS_MAX_DENOMINATOR: u32 = 97;
const WITNESS_SEED: u64 = 0x5eed;

/// Decides equivalence of two propositional formulas.
pub fn decide_equiv(lhs: &Formula, rhs: &Formula) -> Result<Decision, EquivError> {
    let pl = polynomial(lhs)?;
    let pr = polynomial(rhs)?;
    if pl == pr {
        return Ok(Decision {
            equivalent: true,
            certificate: Certificate::Polynomial(pl),
        });
    }
    let vars: BTreeSet<String> = lhs.variables().union(&rhs.variables()).cloned().collect();
    let certificate = find_witness(lhs, rhs, &vars).unwrap_or_else(|| {
        let monomial = pl
            .terms()
            .keys()
            .chain(pr.terms().keys())
            .find(|m| pl.coefficient(m) != pr.coefficient(m))
            .cloned()
            .expect("distinct polynomials differ in some coefficient");
        Certificate::Monomial {
            lhs: pl.coefficient(&monomial),
            rhs: pr.coefficient(&monomial),
            monomial,
        }
    });
    Ok(Decision {
        equivalent: false,
        certificate,
    })
}

/// Tries the point with every probability `1/2`, then random points with
/// small denominators, evaluating both formulas on a one-world model.
fn find_witness(lhs: &Formula, rhs: &Formula, vars: &BTreeSet<String>) -> Option<Certificate> {
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    let half = Rational::new(1.into(), 2.into());
    let mut candidates = vec![vars.iter().map(|x| (x.clone(), half.clone())).collect::<BTreeMap<_, _>>()];
    for _ in 0..WITNESS_TRIES {
        candidates.push(
            vars.iter()
                .map(|x| {
                    let den = rng.gen_range(1..=WITNESS_MAX_DENOMINATOR);
                    let num = rng.gen_range(0..=den);
                    (x.clone(), Rational::new(num.into(), den.into()))
                })
                .collect(),
        );
    }
    for point in candidates {
        let model = point_model(&point);
        let l = evaluate(&model, "w", lhs).ok()?.into_inner();
        let r = evaluate(&model, "w", rhs).ok()?.into_inner();
        if l != r {
            return Some(Certificate::Witness { point, lhs: l, rhs: r });
        }
    }
    None
}

/// A single world `w` with the given variable probabilities and no agents.
pub fn point_model(point: &BTreeMap<String, Rational>) -> ProbModel {
    let mut b = ProbModel::builder();
    for x in point.keys() {
        b = b.variable(x.clone());
    }
    b.world("w", point.iter().map(|(x, v)| (x.clone(), v.clone())))
        .build()
        .expect("point models are well formed")
}
