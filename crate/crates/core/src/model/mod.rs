//! Finite probability models and Kripke models.
//!
//! A probability model has a finite set of worlds, for every agent and world
//! a distribution over worlds (which may be the empty distribution), and for
//! every world the probability of each variable being sampled true.

mod json;
mod kripke;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_exact, Rational};
use crate::syntax::is_identifier;

pub use json::{load, load_kripke, save, save_kripke};
pub use kripke::{validate_kripke, KripkeModel, KripkeModelBuilder, KripkeViolation};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("world `{world}` assigns undeclared variable `{variable}`")]
    UnknownVariable { world: String, variable: String },
    #[error("world `{world}` has no probability for variable `{variable}`")]
    MissingAssignment { world: String, variable: String },
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("`{0}` is not a valid identifier")]
    InvalidIdentifier(String),
    #[error("bad probability at {context}: {literal:?}")]
    BadProbability { context: String, literal: String },
}

/// A finite probability model.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbModel {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    agents: Vec<String>,
    variables: Vec<String>,
    /// agent -> source world -> nonzero (target, weight) entries sorted by target.
    pi: BTreeMap<String, Vec<Vec<(usize, Rational)>>>,
    /// world -> variable -> probability of sampling true.
    f: Vec<BTreeMap<String, Rational>>,
}

impl ProbModel {
    pub fn builder() -> ProbModelBuilder {
        ProbModelBuilder::default()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn has_agent(&self, agent: &str) -> bool {
        self.pi.contains_key(agent)
    }

    /// Nonzero entries of the distribution `pi_agent(world)`, by world index.
    pub fn distribution(&self, agent: &str, world: usize) -> Option<&[(usize, Rational)]> {
        self.pi.get(agent).map(|rows| rows[world].as_slice())
    }

    /// `pi_agent(from, to)`, zero when unspecified.
    pub fn pi(&self, agent: &str, from: usize, to: usize) -> Option<Rational> {
        let row = self.distribution(agent, from)?;
        Some(
            row.iter()
                .find(|(t, _)| *t == to)
                .map(|(_, p)| p.clone())
                .unwrap_or_else(Rational::zero),
        )
    }

    /// `f_world(variable)`.
    pub fn prob(&self, world: usize, variable: &str) -> Option<&Rational> {
        self.f.get(world)?.get(variable)
    }

    /// Checks the distribution and range constraints; an empty result means
    /// the model is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.worlds.is_empty() {
            out.push(Violation::NoWorlds);
        }
        let unit = Rational::one();
        let in_range = |p: &Rational| !p.is_negative() && *p <= unit;
        for (agent, rows) in &self.pi {
            for (w, row) in rows.iter().enumerate() {
                let mut sum = Rational::zero();
                for (to, p) in row {
                    if !in_range(p) {
                        out.push(Violation::WeightOutOfRange {
                            agent: agent.clone(),
                            from: self.worlds[w].clone(),
                            to: self.worlds[*to].clone(),
                            value: p.clone(),
                        });
                    }
                    sum += p;
                }
                if !sum.is_zero() && sum != unit {
                    out.push(Violation::RowSum {
                        agent: agent.clone(),
                        world: self.worlds[w].clone(),
                        sum,
                    });
                }
            }
        }
        for (w, assignment) in self.f.iter().enumerate() {
            for (x, p) in assignment {
                if !in_range(p) {
                    out.push(Violation::ProbabilityOutOfRange {
                        world: self.worlds[w].clone(),
                        variable: x.clone(),
                        value: p.clone(),
                    });
                }
            }
        }
        out
    }
}

/// A pointed probability model: a model together with its evaluation world.
#[derive(Debug, Clone, Copy)]
pub struct PointedModel<'a> {
    pub model: &'a ProbModel,
    pub point: usize,
}

impl<'a> PointedModel<'a> {
    pub fn new(model: &'a ProbModel, world: &str) -> Result<Self, ModelError> {
        let point = model
            .world_index(world)
            .ok_or_else(|| ModelError::UnknownWorld(world.to_string()))?;
        Ok(PointedModel { model, point })
    }

    pub fn world(&self) -> &str {
        &self.model.worlds[self.point]
    }
}

/// A constraint a probability model fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoWorlds,
    /// The distribution sums to neither 0 nor 1.
    RowSum { agent: String, world: String, sum: Rational },
    WeightOutOfRange {
        agent: String,
        from: String,
        to: String,
        value: Rational,
    },
    ProbabilityOutOfRange {
        world: String,
        variable: String,
        value: Rational,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoWorlds => write!(f, "model has no worlds"),
            Violation::RowSum { agent, world, sum } => write!(
                f,
                "distribution of agent `{agent}` at world `{world}` sums to {}, not 0 or 1",
                format_exact(sum)
            ),
            Violation::WeightOutOfRange { agent, from, to, value } => write!(
                f,
                "weight of agent `{agent}` from `{from}` to `{to}` is {}, outside [0,1]",
                format_exact(value)
            ),
            Violation::ProbabilityOutOfRange { world, variable, value } => write!(
                f,
                "probability of `{variable}` at world `{world}` is {}, outside [0,1]",
                format_exact(value)
            ),
        }
    }
}

/// Incremental construction of a [`ProbModel`]; all references are checked
/// in [`ProbModelBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct ProbModelBuilder {
    agents: Vec<String>,
    variables: Vec<String>,
    worlds: Vec<(String, BTreeMap<String, Rational>)>,
    pi: Vec<(String, String, String, Rational)>,
}

impl ProbModelBuilder {
    pub fn agent(mut self, name: impl Into<String>) -> Self {
        self.agents.push(name.into());
        self
    }

    pub fn variable(mut self, name: impl Into<String>) -> Self {
        self.variables.push(name.into());
        self
    }

    pub fn world<I, S>(mut self, name: impl Into<String>, assignment: I) -> Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let f = assignment.into_iter().map(|(k, v)| (k.into(), v)).collect();
        self.worlds.push((name.into(), f));
        self
    }

    /// Sets `pi_agent(from, to)`; unspecified entries are zero.
    pub fn pi(
        mut self,
        agent: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        p: Rational,
    ) -> Self {
        self.pi.push((agent.into(), from.into(), to.into(), p));
        self
    }

    pub fn build(self) -> Result<ProbModel, ModelError> {
        let mut index = HashMap::new();
        for (i, (w, _)) in self.worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "world",
                    name: w.clone(),
                });
            }
        }
        for name in self.agents.iter().chain(&self.variables) {
            if !is_identifier(name) {
                return Err(ModelError::InvalidIdentifier(name.clone()));
            }
        }
        check_unique("agent", &self.agents)?;
        check_unique("variable", &self.variables)?;

        let mut f = Vec::with_capacity(self.worlds.len());
        for (w, assignment) in &self.worlds {
            for x in assignment.keys() {
                if !self.variables.contains(x) {
                    return Err(ModelError::UnknownVariable {
                        world: w.clone(),
                        variable: x.clone(),
                    });
                }
            }
            for x in &self.variables {
                if !assignment.contains_key(x) {
                    return Err(ModelError::MissingAssignment {
                        world: w.clone(),
                        variable: x.clone(),
                    });
                }
            }
            f.push(assignment.clone());
        }

        let n = self.worlds.len();
        let mut pi: BTreeMap<String, Vec<BTreeMap<usize, Rational>>> = self
            .agents
            .iter()
            .map(|a| (a.clone(), vec![BTreeMap::new(); n]))
            .collect();
        for (agent, from, to, p) in self.pi {
            let rows = pi.get_mut(&agent).ok_or_else(|| ModelError::UnknownAgent(agent.clone()))?;
            let from_i = *index.get(&from).ok_or(ModelError::UnknownWorld(from))?;
            let to_i = *index.get(&to).ok_or(ModelError::UnknownWorld(to.clone()))?;
            if rows[from_i].insert(to_i, p).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "distribution entry",
                    name: format!("{agent}: {} -> {to}", self.worlds[from_i].0),
                });
            }
        }
        let pi = pi
            .into_iter()
            .map(|(a, rows)| {
                let rows = rows
                    .into_iter()
                    .map(|row| row.into_iter().filter(|(_, p)| !p.is_zero()).collect())
                    .collect();
                (a, rows)
            })
            .collect();

        Ok(ProbModel {
            worlds: self.worlds.into_iter().map(|(w, _)| w).collect(),
            index,
            agents: self.agents,
            variables: self.variables,
            pi,
            f,
        })
    }
}

fn check_unique(kind: &'static str, names: &[String]) -> Result<(), ModelError> {
    let mut seen = std::collections::HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(ModelError::Duplicate { kind, name: n.clone() });
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::ratio;

    /// The four-or-six-sided die.
    pub fn dice() -> ProbModel {
        let half = ratio(1, 2);
        let mut b = ProbModel::builder()
            .agent("a")
            .variable("p1")
            .world("w4", [("p1", ratio(1, 4))])
            .world("w6", [("p1", ratio(1, 6))]);
        for from in ["w4", "w6"] {
            for to in ["w4", "w6"] {
                b = b.pi("a", from, to, half.clone());
            }
        }
        b.build().unwrap()
    }

    /// The possibly biased four-sided die.
    pub fn pig() -> ProbModel {
        let mut b = ProbModel::builder()
            .agent("a")
            .variable("odd")
            .variable("gt2")
            .variable("risk")
            .world(
                "biased",
                [("odd", ratio(1, 2)), ("gt2", ratio(7, 10)), ("risk", ratio(1, 2))],
            )
            .world(
                "fair",
                [("odd", ratio(1, 2)), ("gt2", ratio(1, 2)), ("risk", ratio(1, 2))],
            );
        for from in ["biased", "fair"] {
            b = b
                .pi("a", from, "biased", ratio(1, 10))
                .pi("a", from, "fair", ratio(9, 10));
        }
        b.build().unwrap()
    }
}
