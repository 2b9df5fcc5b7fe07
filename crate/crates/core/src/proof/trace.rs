use std::fmt;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use super::axiom::{apply, ApplyError, AxiomName, Bindings, Direction, AGENT_METAVARIABLE};
use crate::syntax::{parse, Formula, ParseError};

/// One rewrite: an axiom applied at a position in one direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub axiom: AxiomName,
    pub pos: Vec<usize>,
    pub dir: Direction,
    pub bind: Bindings,
}

impl Step {
    pub fn new(axiom: AxiomName, pos: &[usize], dir: Direction) -> Self {
        Step {
            axiom,
            pos: pos.to_vec(),
            dir,
            bind: Bindings::new(),
        }
    }

    pub fn with(mut self, bind: Bindings) -> Self {
        self.bind = bind;
        self
    }

    fn to_json(&self) -> Value {
        let mut bind = Map::new();
        for (k, v) in &self.bind.terms {
            bind.insert(k.clone(), Value::from(v.to_string()));
        }
        if let Some(a) = &self.bind.agent {
            bind.insert(AGENT_METAVARIABLE.to_string(), Value::from(a.clone()));
        }
        json!({
            "axiom": self.axiom.as_str(),
            "pos": self.pos,
            "dir": self.dir.as_str(),
            "bind": bind,
        })
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} at {:?}", self.axiom, self.dir, self.pos)
    }
}

/// A chain of rewrites from `start` to `end`. Steps act on the desugared
/// form of `start`; the chain is valid when it reaches the desugared form
/// of `end`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    pub start: Formula,
    pub end: Formula,
    pub steps: Vec<Step>,
}

/// Result of replaying a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// Step `index` (1-based) could not be applied.
    StepFailed { index: usize, error: ApplyError },
    /// Every step applied but the result is not `end`.
    EndMismatch { reached: Formula },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn failed_step(&self) -> Option<usize> {
        match self {
            Verdict::StepFailed { index, .. } => Some(*index),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::StepFailed { index, error } => write!(f, "step {index} fails: {error}"),
            Verdict::EndMismatch { reached } => write!(f, "steps end at {reached}, not at the stated end"),
        }
    }
}

impl ProofTrace {
    pub fn new(start: Formula, end: Formula, steps: Vec<Step>) -> Self {
        ProofTrace { start, end, steps }
    }

    /// The empty trace from a formula to itself.
    pub fn reflexive(f: Formula) -> Self {
        ProofTrace::new(f.clone(), f, Vec::new())
    }

    /// Replays every step; on success returns the intermediate formulas
    /// (first is the desugared start) and the complete bindings of each step.
    pub fn replay(&self) -> Result<(Vec<Formula>, Vec<Bindings>), Verdict> {
        let mut cur = self.start.desugar();
        let mut states = vec![cur.clone()];
        let mut binds = Vec::with_capacity(self.steps.len());
        for (n, s) in self.steps.iter().enumerate() {
            let (next, b) = apply(&cur, s.axiom, &s.pos, s.dir, &s.bind).map_err(|error| Verdict::StepFailed {
                index: n + 1,
                error,
            })?;
            cur = next;
            states.push(cur.clone());
            binds.push(b);
        }
        Ok((states, binds))
    }

    pub fn check(&self) -> Verdict {
        let mut cur = self.start.desugar();
        for (n, s) in self.steps.iter().enumerate() {
            match apply(&cur, s.axiom, &s.pos, s.dir, &s.bind) {
                Ok((next, _)) => cur = next,
                Err(error) => return Verdict::StepFailed { index: n + 1, error },
            }
        }
        if cur == self.end.desugar() {
            Verdict::Valid
        } else {
            Verdict::EndMismatch { reached: cur }
        }
    }

    /// The same proof read backwards. Bindings are completed by replay, so
    /// steps that relied on matching keep working in the other direction.
    pub fn reversed(&self) -> Result<ProofTrace, Verdict> {
        let (_, binds) = self.replay()?;
        let steps = self
            .steps
            .iter()
            .zip(binds)
            .rev()
            .map(|(s, b)| Step {
                axiom: s.axiom,
                pos: s.pos.clone(),
                dir: s.dir.flip(),
                bind: b,
            })
            .collect();
        Ok(ProofTrace::new(self.end.clone(), self.start.clone(), steps))
    }

    /// `self` followed by `next`; `None` unless `self` ends where `next` starts.
    pub fn then(&self, next: &ProofTrace) -> Option<ProofTrace> {
        if self.end.desugar() != next.start.desugar() {
            return None;
        }
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        Some(ProofTrace::new(self.start.clone(), next.end.clone(), steps))
    }

    /// Removes detours: whenever a formula recurs, the steps between its
    /// two occurrences are dropped. Invalid traces are returned unchanged.
    pub fn shortened(&self) -> ProofTrace {
        let Ok((states, binds)) = self.replay() else {
            return self.clone();
        };
        let mut seen: std::collections::HashMap<&Formula, usize> = std::collections::HashMap::new();
        // kept[k] = index of the step leading into state k of the output.
        let mut out_states: Vec<&Formula> = Vec::new();
        let mut out_steps: Vec<Step> = Vec::new();
        for (k, state) in states.iter().enumerate() {
            if let Some(&at) = seen.get(state) {
                for dropped in out_states.drain(at + 1..) {
                    seen.remove(dropped);
                }
                out_steps.truncate(at);
                continue;
            }
            if k > 0 {
                let s = &self.steps[k - 1];
                out_steps.push(Step {
                    axiom: s.axiom,
                    pos: s.pos.clone(),
                    dir: s.dir,
                    bind: binds[k - 1].clone(),
                });
            }
            seen.insert(state, out_states.len());
            out_states.push(state);
        }
        ProofTrace::new(self.start.clone(), self.end.clone(), out_steps)
    }

    /// JSON lines: a header `{"start":..,"end":..}` then one object per step.
    pub fn to_jsonl(&self) -> String {
        let mut out = json!({"start": self.start.to_string(), "end": self.end.to_string()}).to_string();
        out.push('\n');
        for s in &self.steps {
            out.push_str(&s.to_json().to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<ProofTrace, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (n, header) = lines.next().ok_or(TraceError::MissingHeader)?;
        let header: Value = serde_json::from_str(header).map_err(|e| TraceError::Json(n, e.to_string()))?;
        let start = formula_field(&header, "start", n)?;
        let end = formula_field(&header, "end", n)?;
        let mut steps = Vec::new();
        for (n, line) in lines {
            let v: Value = serde_json::from_str(line).map_err(|e| TraceError::Json(n, e.to_string()))?;
            steps.push(parse_step(&v, n)?);
        }
        Ok(ProofTrace::new(start, end, steps))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("empty trace file: the first line must carry start and end")]
    MissingHeader,
    #[error("line {0}: {1}")]
    Json(usize, String),
    #[error("line {line}: field `{field}`: {error}")]
    Formula {
        line: usize,
        field: String,
        error: ParseError,
    },
    #[error("line {0}: {1}")]
    Field(usize, String),
}

fn formula_field(v: &Value, field: &str, line: usize) -> Result<Formula, TraceError> {
    let text = v
        .get(field)
        .and_then(Value::as_str)
        .ok_or_else(|| TraceError::Field(line, format!("missing string field `{field}`")))?;
    parse(text).map_err(|error| TraceError::Formula {
        line,
        field: field.to_string(),
        error,
    })
}

fn parse_step(v: &Value, line: usize) -> Result<Step, TraceError> {
    let obj = v
        .as_object()
        .ok_or_else(|| TraceError::Field(line, "a step must be an object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "axiom" | "pos" | "dir" | "bind") {
            return Err(TraceError::Field(line, format!("unknown field `{key}`")));
        }
    }
    let axiom = obj
        .get("axiom")
        .and_then(Value::as_str)
        .ok_or_else(|| TraceError::Field(line, "missing string field `axiom`".into()))?
        .parse::<AxiomName>()
        .map_err(|e| TraceError::Field(line, e.to_string()))?;
    let pos = match obj.get("pos") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|i| i.as_u64().filter(|&i| i <= 2).map(|i| i as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| TraceError::Field(line, "`pos` must list child indices 0, 1 or 2".into()))?,
        Some(_) => return Err(TraceError::Field(line, "`pos` must be an array".into())),
    };
    let dir = obj
        .get("dir")
        .and_then(Value::as_str)
        .ok_or_else(|| TraceError::Field(line, "missing string field `dir`".into()))?
        .parse::<Direction>()
        .map_err(|e| TraceError::Field(line, e))?;
    let mut bind = Bindings::new();
    match obj.get("bind") {
        None => {}
        Some(Value::Object(map)) => {
            for (k, v) in map {
                let text = v
                    .as_str()
                    .ok_or_else(|| TraceError::Field(line, format!("binding `{k}` must be a string")))?;
                if k == AGENT_METAVARIABLE {
                    bind.agent = Some(text.to_string());
                } else {
                    let f = parse(text).map_err(|error| TraceError::Formula {
                        line,
                        field: format!("bind.{k}"),
                        error,
                    })?;
                    bind.terms.insert(k.clone(), Arc::new(f));
                }
            }
        }
        Some(_) => return Err(TraceError::Field(line, "`bind` must be an object".into())),
    }
    Ok(Step { axiom, pos, dir, bind })
}
