//! JSON documents for probability and Kripke models.
//!
//! Probabilities are strings (`"1/4"`, `"0.15"`, `"1"`) so they load exactly.
//! Saving is canonical: fractions in lowest terms, zero weights dropped,
//! maps in key order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::kripke::KripkeModel;
use super::{ModelError, ProbModel};
use crate::rational::{format_exact, parse_rational, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default)]
    agents: Vec<String>,
    #[serde(default)]
    variables: Vec<String>,
    worlds: Vec<WorldDoc>,
    #[serde(default)]
    pi: BTreeMap<String, BTreeMap<String, BTreeMap<String, String>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldDoc {
    id: String,
    #[serde(default)]
    f: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KripkeDoc {
    worlds: Vec<String>,
    #[serde(default)]
    agents: Vec<String>,
    #[serde(rename = "R", default)]
    relation: BTreeMap<String, Vec<(String, String)>>,
    #[serde(rename = "V", default)]
    valuation: BTreeMap<String, Vec<String>>,
}

fn probability(context: impl FnOnce() -> String, literal: &str) -> Result<Rational, ModelError> {
    parse_rational(literal).map_err(|_| ModelError::BadProbability {
        context: context(),
        literal: literal.to_string(),
    })
}

/// Parses a probability model document.
pub fn load(bytes: &[u8]) -> Result<ProbModel, ModelError> {
    let doc: ModelDoc = serde_json::from_slice(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let mut b = ProbModel::builder();
    for a in doc.agents {
        b = b.agent(a);
    }
    for x in doc.variables {
        b = b.variable(x);
    }
    for w in doc.worlds {
        let mut assignment = Vec::with_capacity(w.f.len());
        for (x, lit) in &w.f {
            let p = probability(|| format!("f[{}][{x}]", w.id), lit)?;
            assignment.push((x.clone(), p));
        }
        b = b.world(w.id, assignment);
    }
    for (agent, rows) in doc.pi {
        for (from, row) in rows {
            for (to, lit) in row {
                let p = probability(|| format!("pi[{agent}][{from}][{to}]"), &lit)?;
                b = b.pi(agent.clone(), from.clone(), to, p);
            }
        }
    }
    b.build()
}

/// Canonical serialization; `save(&load(&save(m))?) == save(m)`.
pub fn save(m: &ProbModel) -> Vec<u8> {
    let worlds = m
        .worlds()
        .iter()
        .enumerate()
        .map(|(i, id)| WorldDoc {
            id: id.clone(),
            f: m.f[i].iter().map(|(x, p)| (x.clone(), format_exact(p))).collect(),
        })
        .collect();
    let pi = m
        .pi
        .iter()
        .map(|(agent, rows)| {
            let rows = rows
                .iter()
                .enumerate()
                .filter(|(_, row)| !row.is_empty())
                .map(|(w, row)| {
                    let row = row
                        .iter()
                        .map(|(to, p)| (m.worlds()[*to].clone(), format_exact(p)))
                        .collect();
                    (m.worlds()[w].clone(), row)
                })
                .collect();
            (agent.clone(), rows)
        })
        .collect();
    let doc = ModelDoc {
        agents: m.agents().to_vec(),
        variables: m.variables().to_vec(),
        worlds,
        pi,
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("model document serializes");
    out.push(b'\n');
    out
}

pub fn load_kripke(bytes: &[u8]) -> Result<KripkeModel, ModelError> {
    let doc: KripkeDoc = serde_json::from_slice(bytes).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let mut b = KripkeModel::builder();
    for w in doc.worlds {
        b = b.world(w);
    }
    for a in doc.agents {
        b = b.agent(a);
    }
    for (a, edges) in doc.relation {
        for (from, to) in edges {
            b = b.edge(a.clone(), from, to);
        }
    }
    for (q, ws) in doc.valuation {
        b = b.proposition(q, ws);
    }
    b.build()
}

pub fn save_kripke(k: &KripkeModel) -> Vec<u8> {
    let name = |i: &usize| k.worlds()[*i].clone();
    let agents: Vec<String> = k.agents().map(String::from).collect();
    let relation = agents
        .iter()
        .map(|a| {
            let edges = (0..k.worlds().len())
                .flat_map(|w| {
                    k.successors(a, w)
                        .into_iter()
                        .flatten()
                        .map(move |u| (name(&w), name(u)))
                })
                .collect();
            (a.clone(), edges)
        })
        .collect();
    let valuation = k
        .propositions()
        .map(|q| (q.to_string(), k.holds(q).into_iter().flatten().map(name).collect()))
        .collect();
    let doc = KripkeDoc {
        worlds: k.worlds().to_vec(),
        agents,
        relation,
        valuation,
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("kripke document serializes");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use crate::rational::ratio;

    const DICE: &str = r#"{"agents":["a"],"variables":["p1"],"worlds":[{"id":"w4","f":{"p1":"1/4"}},{"id":"w6","f":{"p1":"1/6"}}],"pi":{"a":{"w4":{"w4":"1/2","w6":"1/2"},"w6":{"w4":"1/2","w6":"1/2"}}}}"#;

    #[test]
    fn loads_the_documented_example() {
        let m = load(DICE.as_bytes()).unwrap();
        assert_eq!(m, fixtures::dice());
        assert_eq!(m.worlds().len(), 2);
    }

    #[test]
    fn decimals_load_exactly() {
        let doc = r#"{"agents":["a"],"variables":["x"],"worlds":[{"id":"w","f":{"x":"0.1"}}],"pi":{"a":{"w":{"w":"1.0"}}}}"#;
        let m = load(doc.as_bytes()).unwrap();
        assert_eq!(m.prob(0, "x"), Some(&ratio(1, 10)));
    }

    #[test]
    fn rejects_bad_literals_and_references() {
        let bad = DICE.replace("\"1/4\"", "\"0.3333x\"");
        assert!(matches!(load(bad.as_bytes()), Err(ModelError::BadProbability { .. })));
        let bad = DICE.replacen("\"w6\":\"1/2\"", "\"w9\":\"1/2\"", 1);
        assert!(matches!(load(bad.as_bytes()), Err(ModelError::UnknownWorld(w)) if w == "w9"));
        let bad = DICE.replace("{\"p1\":\"1/6\"}", "{}");
        assert!(matches!(load(bad.as_bytes()), Err(ModelError::MissingAssignment { .. })));
        assert!(matches!(load(b"{\"worlds\": 3}"), Err(ModelError::Malformed(_))));
        assert!(matches!(load(b"not json"), Err(ModelError::Malformed(_))));
    }

    #[test]
    fn missing_pi_entries_default_to_zero() {
        let doc = r#"{"agents":["a"],"variables":[],"worlds":[{"id":"w"},{"id":"u"}],"pi":{"a":{"w":{"u":"1"}}}}"#;
        let m = load(doc.as_bytes()).unwrap();
        assert_eq!(m.pi("a", 1, 0), Some(ratio(0, 1)));
        assert!(m.distribution("a", 1).unwrap().is_empty());
    }

    #[test]
    fn save_is_canonical() {
        let once = save(&load(DICE.as_bytes()).unwrap());
        let twice = save(&load(&once).unwrap());
        assert_eq!(once, twice);
        let text = String::from_utf8(once).unwrap();
        assert!(text.contains("\"1/2\""));
    }

    #[test]
    fn kripke_roundtrip() {
        let doc = r#"{"worlds":["w","u"],"R":{"i":[["w","u"],["u","u"]]},"V":{"q":["u"]}}"#;
        let k = load_kripke(doc.as_bytes()).unwrap();
        assert_eq!(k.successors("i", 0).unwrap().len(), 1);
        let once = save_kripke(&k);
        assert_eq!(load_kripke(&once).unwrap(), k);
        assert_eq!(save_kripke(&load_kripke(&once).unwrap()), once);
        assert!(matches!(
            load_kripke(br#"{"worlds":["w"],"R":{"i":[["w","x"]]}}"#),
            Err(ModelError::UnknownWorld(_))
        ));
    }
}
