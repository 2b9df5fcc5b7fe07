use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::ModelError;
use crate::syntax::is_identifier;

/// A multi-agent Kripke model `(W, R_i, V)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    worlds: Vec<String>,
    index: HashMap<String, usize>,
    /// agent -> world -> successor set.
    relation: BTreeMap<String, Vec<BTreeSet<usize>>>,
    /// proposition -> worlds where it holds.
    valuation: BTreeMap<String, BTreeSet<usize>>,
}

impl KripkeModel {
    pub fn builder() -> KripkeModelBuilder {
        KripkeModelBuilder::default()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn agents(&self) -> impl Iterator<Item = &str> {
        self.relation.keys().map(String::as_str)
    }

    pub fn propositions(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(String::as_str)
    }

    pub fn successors(&self, agent: &str, world: usize) -> Option<&BTreeSet<usize>> {
        self.relation.get(agent).map(|rows| &rows[world])
    }

    pub fn holds(&self, proposition: &str) -> Option<&BTreeSet<usize>> {
        self.valuation.get(proposition)
    }
}

#[derive(Debug, Clone, Default)]
pub struct KripkeModelBuilder {
    worlds: Vec<String>,
    agents: Vec<String>,
    edges: Vec<(String, String, String)>,
    valuation: Vec<(String, Vec<String>)>,
}

impl KripkeModelBuilder {
    pub fn world(mut self, name: impl Into<String>) -> Self {
        self.worlds.push(name.into());
        self
    }

    /// Declares an agent even if it has no edges.
    pub fn agent(mut self, name: impl Into<String>) -> Self {
        self.agents.push(name.into());
        self
    }

    pub fn edge(mut self, agent: impl Into<String>, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.edges.push((agent.into(), from.into(), to.into()));
        self
    }

    pub fn proposition<I, S>(mut self, name: impl Into<String>, worlds: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.valuation
            .push((name.into(), worlds.into_iter().map(Into::into).collect()));
        self
    }

    pub fn build(self) -> Result<KripkeModel, ModelError> {
        let mut index = HashMap::new();
        for (i, w) in self.worlds.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "world",
                    name: w.clone(),
                });
            }
        }
        let n = self.worlds.len();
        let lookup = |w: &String| index.get(w).copied().ok_or_else(|| ModelError::UnknownWorld(w.clone()));

        let mut relation: BTreeMap<String, Vec<BTreeSet<usize>>> = BTreeMap::new();
        for a in &self.agents {
            if !is_identifier(a) {
                return Err(ModelError::InvalidIdentifier(a.clone()));
            }
            relation.entry(a.clone()).or_insert_with(|| vec![BTreeSet::new(); n]);
        }
        for (a, from, to) in &self.edges {
            if !is_identifier(a) {
                return Err(ModelError::InvalidIdentifier(a.clone()));
            }
            let (from, to) = (lookup(from)?, lookup(to)?);
            relation
                .entry(a.clone())
                .or_insert_with(|| vec![BTreeSet::new(); n])[from]
                .insert(to);
        }
        let mut valuation = BTreeMap::new();
        for (q, ws) in &self.valuation {
            if !is_identifier(q) {
                return Err(ModelError::InvalidIdentifier(q.clone()));
            }
            let set = ws.iter().map(lookup).collect::<Result<BTreeSet<_>, _>>()?;
            if valuation.insert(q.clone(), set).is_some() {
                return Err(ModelError::Duplicate {
                    kind: "proposition",
                    name: q.clone(),
                });
            }
        }
        Ok(KripkeModel {
            worlds: self.worlds,
            index,
            relation,
            valuation,
        })
    }
}

/// A frame condition a Kripke model fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KripkeViolation {
    /// `R_agent(world)` is empty.
    NotSerial { agent: String, world: String },
    /// `u, v ∈ R(w)` but `v ∉ R(u)`.
    NotEuclidean { agent: String, w: String, u: String, v: String },
    /// `u ∈ R(w)`, `v ∈ R(u)` but `v ∉ R(w)`.
    NotTransitive { agent: String, w: String, u: String, v: String },
}

impl fmt::Display for KripkeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KripkeViolation::NotSerial { agent, world } => {
                write!(f, "seriality: world `{world}` has no `{agent}`-successor")
            }
            KripkeViolation::NotEuclidean { agent, w, u, v } => write!(
                f,
                "euclidean ({agent}): {u} and {v} are successors of {w}, but {v} is not a successor of {u}"
            ),
            KripkeViolation::NotTransitive { agent, w, u, v } => write!(
                f,
                "transitive ({agent}): {u} is a successor of {w} and {v} of {u}, but {v} is not a successor of {w}"
            ),
        }
    }
}

/// Seriality is always checked; the euclidean and transitivity conditions
/// only when `enforce_frame_conditions` is set.
pub fn validate_kripke(k: &KripkeModel, enforce_frame_conditions: bool) -> Vec<KripkeViolation> {
    let mut out = Vec::new();
    let name = |i: usize| k.worlds[i].clone();
    for (agent, rows) in &k.relation {
        for (w, succ) in rows.iter().enumerate() {
            if succ.is_empty() {
                out.push(KripkeViolation::NotSerial {
                    agent: agent.clone(),
                    world: name(w),
                });
            }
        }
        if !enforce_frame_conditions {
            continue;
        }
        for (w, succ) in rows.iter().enumerate() {
            for &u in succ {
                for &v in succ {
                    if !rows[u].contains(&v) {
                        out.push(KripkeViolation::NotEuclidean {
                            agent: agent.clone(),
                            w: name(w),
                            u: name(u),
                            v: name(v),
                        });
                    }
                }
            }
            for &u in succ {
                for &v in &rows[u] {
                    if !succ.contains(&v) {
                        out.push(KripkeViolation::NotTransitive {
                            agent: agent.clone(),
                            w: name(w),
                            u: name(u),
                            v: name(v),
                        });
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflexive_singleton_is_clean() {
        let k = KripkeModel::builder()
            .world("w")
            .edge("i", "w", "w")
            .proposition("q", ["w"])
            .build()
            .unwrap();
        assert!(validate_kripke(&k, true).is_empty());
    }

    #[test]
    fn dead_end_breaks_seriality() {
        let k = KripkeModel::builder()
            .world("w")
            .world("u")
            .edge("i", "w", "u")
            .build()
            .unwrap();
        assert_eq!(
            validate_kripke(&k, false),
            vec![KripkeViolation::NotSerial {
                agent: "i".into(),
                world: "u".into()
            }]
        );
    }

    #[test]
    fn euclidean_violation_is_named() {
        let k = KripkeModel::builder()
            .world("w")
            .world("u")
            .edge("i", "w", "u")
            .edge("i", "w", "w")
            .build()
            .unwrap();
        let v = validate_kripke(&k, true);
        // u, w ∈ R(w) but w ∉ R(u).
        assert!(v.contains(&KripkeViolation::NotEuclidean {
            agent: "i".into(),
            w: "w".into(),
            u: "u".into(),
            v: "w".into()
        }));
        assert!(v.iter().all(|x| !matches!(x, KripkeViolation::NotTransitive { .. })));
        // Without the flag only seriality is checked.
        assert_eq!(validate_kripke(&k, false).len(), 1);
    }

    #[test]
    fn transitivity_violation() {
        let k = KripkeModel::builder()
            .world("a")
            .world("b")
            .world("c")
            .edge("i", "a", "b")
            .edge("i", "b", "c")
            .edge("i", "c", "c")
            .build()
            .unwrap();
        assert!(validate_kripke(&k, true).contains(&KripkeViolation::NotTransitive {
            agent: "i".into(),
            w: "a".into(),
            u: "b".into(),
            v: "c".into()
        }));
    }

    #[test]
    fn declared_agent_without_edges_is_not_serial() {
        let k = KripkeModel::builder().world("w").agent("j").build().unwrap();
        assert_eq!(validate_kripke(&k, false).len(), 1);
    }
}
