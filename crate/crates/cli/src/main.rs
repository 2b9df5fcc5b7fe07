//! `mac`: command-line access to evaluation, sampling, equivalence, proofs
//! and the Kripke translation.
//!
//! Every command prints one JSON document on stdout (or a table with
//! `--pretty`). Exit codes: 0 success or a positive verdict, 1 a negative
//! verdict, 2 a usage or data error, 3 an exhausted budget.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aleatoric::equivalence::{decide_equiv, paths, polynomial, to_tree_form, EquivError};
use aleatoric::kbridge::{eval_k, generalisation_check, lambda_formula, lambda_model, Distribution, KError, KFormula};
use aleatoric::model::{load, load_kripke, save, validate_kripke, KripkeModel, ProbModel};
use aleatoric::proof::{prove_equiv, ProofTrace, ProveError, Verdict, DEFAULT_STEP_BUDGET};
use aleatoric::rational::{format_decimal, format_exact};
use aleatoric::semantics::{estimate_with_budget, evaluate, expectation, EvalError, DEFAULT_MAX_REJECTIONS};
use aleatoric::syntax::{parse, Formula};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "mac", version, about = "Exact and sampled semantics, equivalence and proofs for the modal aleatoric calculus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Print a human-readable table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Significant digits of decimal renderings.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of a formula at a world.
    Eval {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        world: String,
        /// Formula text, or `@file`.
        #[arg(short, long)]
        formula: String,
        /// Expectation of the formula for this agent instead of its value.
        #[arg(short, long)]
        agent: Option<String>,
        /// Omit the decimal rendering.
        #[arg(long)]
        exact: bool,
    },
    /// Monte-Carlo estimate of a formula's value.
    Estimate {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        world: String,
        #[arg(short, long)]
        formula: String,
        /// Number of samples.
        #[arg(short = 'n', long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "AMC_SEED", default_value_t = 0)]
        seed: u64,
        /// World draws allowed per conditional before giving up.
        #[arg(long, default_value_t = DEFAULT_MAX_REJECTIONS)]
        max_rejections: u64,
    },
    /// Decide equivalence of two formulas without conditionals.
    Equiv {
        #[arg(short, long)]
        formula: String,
        #[arg(short = 'g', long)]
        other: String,
    },
    /// Search for an axiomatic proof and print it as a trace.
    Prove {
        #[arg(short, long)]
        formula: String,
        #[arg(short = 'g', long)]
        other: String,
        /// Maximum number of rewrite steps.
        #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
        budget: usize,
        /// Write the trace here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Replay a proof trace.
    Check {
        #[arg(short, long)]
        trace: PathBuf,
    },
    /// Core form, tree form, paths and polynomial of a formula.
    Normalize {
        #[arg(short, long)]
        formula: String,
    },
    /// Translate a K formula and/or a Kripke model.
    TranslateK {
        /// K formula text, or `@file`.
        #[arg(short, long)]
        formula: Option<String>,
        #[arg(short, long)]
        kripke: Option<PathBuf>,
        /// With both a formula and a model: compare the two semantics here.
        #[arg(short, long)]
        world: Option<String>,
        #[arg(long, value_enum, default_value_t = Choice::Uniform)]
        choice: Choice,
        #[arg(long, env = "AMC_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Lint a probability model or a Kripke model.
    Validate {
        #[arg(short, long, required_unless_present = "kripke", conflicts_with = "kripke")]
        model: Option<PathBuf>,
        #[arg(short, long)]
        kripke: Option<PathBuf>,
        /// Also require transitive and euclidean relations.
        #[arg(long)]
        frame_conditions: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Choice {
    Uniform,
    Random,
}

/// A command's result: what to print and how to exit.
struct Outcome {
    value: Value,
    /// Replaces the JSON rendering of `value` when not printing a table.
    raw: Option<String>,
    code: u8,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome {
            value,
            raw: None,
            code: 0,
        }
    }

    fn verdict(value: Value, positive: bool) -> Self {
        Outcome {
            code: if positive { 0 } else { 1 },
            ..Outcome::ok(value)
        }
    }
}

/// Failures that end a command early, with their exit codes.
#[derive(Debug)]
enum Failure {
    Data(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 2,
            Failure::Budget(_) => 3,
        }
    }
}

fn data(e: impl std::fmt::Display) -> Failure {
    Failure::Data(e.to_string())
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::RejectionBudgetExhausted { .. } => Failure::Budget(e.to_string()),
            other => data(other),
        }
    }
}

impl From<KError> for Failure {
    fn from(e: KError) -> Self {
        match e {
            KError::Eval(inner) => inner.into(),
            other => data(other),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Inline text, or the contents of the file named after a leading `@`.
fn text_arg(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let bytes = read(Path::new(path))?;
            String::from_utf8(bytes)
                .map(|s| s.trim().to_string())
                .map_err(|_| Failure::Data(format!("{path}: not UTF-8")))
        }
        None => Ok(arg.to_string()),
    }
}

fn formula_arg(arg: &str) -> Result<Formula, Failure> {
    let text = text_arg(arg)?;
    parse(&text).map_err(|e| Failure::Data(format!("formula {text:?}: {e}")))
}

fn model_arg(path: &Path) -> Result<ProbModel, Failure> {
    load(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn kripke_arg(path: &Path) -> Result<KripkeModel, Failure> {
    load_kripke(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn run(command: Command, precision: usize) -> Result<Outcome, Failure> {
    match command {
        Command::Eval {
            model,
            world,
            formula,
            agent,
            exact,
        } => {
            let m = model_arg(&model)?;
            let f = formula_arg(&formula)?;
            let v = match &agent {
                Some(a) => expectation(&m, a, &world, &f)?,
                None => evaluate(&m, &world, &f)?,
            };
            let mut out = json!({"value": v.to_string()});
            if !exact {
                out["decimal"] = Value::from(v.decimal(precision));
            }
            Ok(Outcome::ok(out))
        }
        Command::Estimate {
            model,
            world,
            formula,
            samples: n,
            seed,
            max_rejections,
        } => {
            let m = model_arg(&model)?;
            let f = formula_arg(&formula)?;
            let freq = estimate_with_budget(&m, &world, &f, n, seed, max_rejections)?;
            Ok(Outcome::ok(json!({
                "estimate": format_exact(&freq),
                "decimal": format_decimal(&freq, precision),
                "n": n,
                "seed": seed,
            })))
        }
        Command::Equiv { formula, other } => {
            let (f, g) = (formula_arg(&formula)?, formula_arg(&other)?);
            let d = decide_equiv(&f, &g).map_err(data)?;
            Ok(Outcome::verdict(d.to_json(), d.equivalent))
        }
        Command::Prove {
            formula,
            other,
            budget,
            output,
        } => {
            let (f, g) = (formula_arg(&formula)?, formula_arg(&other)?);
            match prove_equiv(&f, &g, budget) {
                Ok(trace) => {
                    let steps = trace.steps.len();
                    match output {
                        Some(path) => {
                            fs::write(&path, trace.to_jsonl())
                                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                            Ok(Outcome::ok(json!({"proved": true, "steps": steps, "trace": path.display().to_string()})))
                        }
                        None => Ok(Outcome {
                            raw: Some(trace.to_jsonl()),
                            ..Outcome::ok(output::trace_value(&trace))
                        }),
                    }
                }
                Err(ProveError::NotFound) => Ok(Outcome::verdict(json!({"proved": false}), false)),
                Err(e @ ProveError::BudgetExhausted(_)) => Err(Failure::Budget(e.to_string())),
            }
        }
        Command::Check { trace } => {
            let text = String::from_utf8(read(&trace)?).map_err(|_| Failure::Data("trace is not UTF-8".into()))?;
            let t = ProofTrace::from_jsonl(&text).map_err(|e| Failure::Data(format!("{}: {e}", trace.display())))?;
            let verdict = t.check();
            let mut out = json!({"valid": verdict.is_valid(), "steps": t.steps.len()});
            match &verdict {
                Verdict::Valid => {}
                Verdict::StepFailed { index, .. } => {
                    out["failed_step"] = Value::from(*index);
                    out["reason"] = Value::from(verdict.to_string());
                }
                Verdict::EndMismatch { reached } => {
                    out["reached"] = Value::from(reached.to_string());
                    out["reason"] = Value::from(verdict.to_string());
                }
            }
            Ok(Outcome::verdict(out, verdict.is_valid()))
        }
        Command::Normalize { formula } => {
            let f = formula_arg(&formula)?;
            let p = polynomial(&f).map_err(data)?;
            let mut out = json!({
                "formula": f.to_string(),
                "core": f.desugar().to_string(),
                "polynomial": p.to_string(),
            });
            match to_tree_form(&f) {
                Ok(t) => {
                    let ps = paths(&t);
                    out["tree_form"] = Value::from(t.to_string());
                    out["top_paths"] = ps.top.iter().map(ToString::to_string).collect();
                    out["bot_paths"] = ps.bot.iter().map(ToString::to_string).collect();
                }
                Err(e @ EquivError::NodeBudget(_)) => {
                    out["tree_form"] = Value::Null;
                    out["note"] = Value::from(e.to_string());
                }
                Err(e) => return Err(data(e)),
            }
            Ok(Outcome::ok(out))
        }
        Command::TranslateK {
            formula,
            kripke,
            world,
            choice,
            seed,
        } => {
            let phi = formula
                .map(|t| {
                    let text = text_arg(&t)?;
                    text.parse::<KFormula>()
                        .map_err(|e| Failure::Data(format!("K formula {text:?}: {e}")))
                })
                .transpose()?;
            let k = kripke.as_deref().map(kripke_arg).transpose()?;
            let choice = match choice {
                Choice::Uniform => Distribution::Uniform,
                Choice::Random => Distribution::RandomWeights(seed),
            };
            let mut out = json!({});
            if let Some(phi) = &phi {
                out["formula"] = Value::from(lambda_formula(phi).to_string());
            }
            if let Some(k) = &k {
                let pm = lambda_model(k, choice)?;
                let doc: Value = serde_json::from_slice(&save(&pm)).expect("saved models are JSON");
                out["model"] = doc;
                if let Some(phi) = &phi {
                    let sat = eval_k(k, phi)?;
                    out["satisfied_at"] = sat.iter().map(|&w| k.worlds()[w].clone()).collect();
                }
            }
            if phi.is_none() && k.is_none() {
                return Err(Failure::Data("give a K formula, a Kripke model, or both".into()));
            }
            match (world, &phi, &k) {
                (Some(w), Some(phi), Some(k)) => {
                    let a = generalisation_check(k, &w, phi, choice)?;
                    out["world"] = Value::from(w);
                    out["kripke"] = Value::from(a.kripke);
                    out["value"] = Value::from(format_exact(&a.value));
                    out["agrees"] = Value::from(a.agrees());
                    let agrees = a.agrees();
                    Ok(Outcome::verdict(out, agrees))
                }
                (Some(_), _, _) => Err(Failure::Data("--world needs both a formula and a model".into())),
                _ => Ok(Outcome::ok(out)),
            }
        }
        Command::Validate {
            model,
            kripke,
            frame_conditions,
        } => {
            let violations: Vec<String> = match (model, kripke) {
                (Some(m), _) => model_arg(&m)?.validate().iter().map(ToString::to_string).collect(),
                (None, Some(k)) => validate_kripke(&kripke_arg(&k)?, frame_conditions)
                    .iter()
                    .map(ToString::to_string)
                    .collect(),
                (None, None) => unreachable!("clap requires one of the two"),
            };
            let valid = violations.is_empty();
            Ok(Outcome::verdict(json!({"valid": valid, "violations": violations}), valid))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pretty = cli.common.pretty;
    match run(cli.command, cli.common.precision) {
        Ok(outcome) => {
            match (pretty, outcome.raw) {
                (true, _) => print!("{}", output::table(&outcome.value)),
                (false, Some(raw)) => print!("{raw}"),
                (false, None) => println!("{}", outcome.value),
            }
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            let msg = match &failure {
                Failure::Data(m) | Failure::Budget(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(failure.code())
        }
    }
}
