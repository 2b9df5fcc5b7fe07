//! Property tests over randomly generated formulas and models.

mod common;

use aleatoric::equivalence::{decide_equiv, paths, to_tree_form};
use aleatoric::kbridge::{random_kformula, KFormula};
use aleatoric::proof::{prove_equiv, ProveError, DEFAULT_STEP_BUDGET};
use aleatoric::semantics::evaluate;
use aleatoric::Formula;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["x", "y", "z"];
const AGENTS: [&str; 2] = ["i", "j"];

fn formula(seed: u64, modal: bool) -> Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), 4, &VARS, &AGENTS, modal)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let f = formula(seed, true);
        let back: Formula = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn desugaring_is_idempotent_and_core(seed in any::<u64>()) {
        let d = formula(seed, true).desugar();
        prop_assert!(d.is_core());
        prop_assert_eq!(d.desugar(), d);
    }

    #[test]
    fn substituting_a_variable_for_itself_changes_nothing(seed in any::<u64>()) {
        let f = formula(seed, true);
        prop_assert_eq!(f.substitute("x", &Formula::var("x")), f);
    }

    #[test]
    fn evaluator_matches_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 3, &VARS, &AGENTS, true);
        let m = random_model(&mut rng, &VARS, &AGENTS);
        for (w, name) in m.worlds().iter().enumerate() {
            let v = evaluate(&m, name, &f).unwrap().into_inner();
            prop_assert_eq!(&v, &oracle(&m, w, &f));
            prop_assert!(v >= q(0, 1) && v <= q(1, 1));
        }
    }

    #[test]
    fn top_and_bottom_paths_partition_the_leaves(seed in any::<u64>()) {
        let t = to_tree_form(&formula(seed, false)).unwrap();
        let p = paths(&t);
        prop_assert_eq!(p.top.len() + p.bot.len(), t.leaves());
    }

    #[test]
    fn proofs_check_and_reverse(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_formula(&mut rng, 3, &VARS[..2], &AGENTS, false);
        let b = random_formula(&mut rng, 3, &VARS[..2], &AGENTS, false);
        let equivalent = decide_equiv(&a, &b).unwrap().equivalent;
        match prove_equiv(&a, &b, DEFAULT_STEP_BUDGET) {
            Ok(tr) => {
                prop_assert!(equivalent);
                prop_assert!(tr.check().is_valid());
                prop_assert!(tr.reversed().unwrap().check().is_valid());
            }
            Err(ProveError::NotFound) => prop_assert!(!equivalent),
            // Large aligned trees may outgrow the budget; that is never a
            // verdict on equivalence.
            Err(ProveError::BudgetExhausted(_)) => prop_assert!(equivalent),
        }
    }

    #[test]
    fn conjunction_is_provably_commutative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_formula(&mut rng, 2, &VARS[..2], &AGENTS, false);
        let b = random_formula(&mut rng, 2, &VARS[..2], &AGENTS, false);
        match prove_equiv(&Formula::and(a.clone(), b.clone()), &Formula::and(b, a), DEFAULT_STEP_BUDGET) {
            Ok(tr) => prop_assert!(tr.check().is_valid()),
            Err(e) => prop_assert!(matches!(e, ProveError::BudgetExhausted(_)), "{e}"),
        }
    }

    #[test]
    fn k_formulas_print_and_parse_back(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = random_kformula(&mut rng, 4, &["a", "b"], &["p", "q", "r"]);
        let back: KFormula = phi.to_string().parse().unwrap();
        prop_assert_eq!(back, phi);
    }

    #[test]
    fn parsers_reject_garbage_without_panicking(text in r"[\PC\t\n]{0,40}|[TFxy?:()\[\]|@ij&v~>^{}/0-9 -]{0,40}") {
        if let Ok(f) = text.parse::<Formula>() {
            prop_assert_eq!(f.to_string().parse::<Formula>().unwrap(), f);
        }
        let _ = text.parse::<KFormula>();
        let _ = aleatoric::model::load(text.as_bytes());
        let _ = aleatoric::model::load_kripke(text.as_bytes());
        let _ = aleatoric::proof::ProofTrace::from_jsonl(&text);
    }
}
