//! The checked-in fixtures and fuzz corpus seeds load, round-trip, and say
//! what the documentation says they say.

use std::fs;
use std::path::{Path, PathBuf};

use aleatoric::kbridge::KFormula;
use aleatoric::model::{load, load_kripke, save, save_kripke, validate_kripke};
use aleatoric::proof::ProofTrace;
use aleatoric::Formula;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn files(dir: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = fs::read_dir(root().join(dir))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "{dir} is empty");
    out
}

fn text(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn probability_fixtures_are_stable_under_save() {
    for p in [root().join("fixtures/dice.json"), root().join("fixtures/pig.json")] {
        let bytes = fs::read(&p).unwrap();
        let m = load(&bytes).unwrap();
        assert!(m.validate().is_empty(), "{}", p.display());
        assert_eq!(String::from_utf8(save(&m)).unwrap(), String::from_utf8(bytes).unwrap());
    }
}

#[test]
fn kripke_fixtures_validate_as_named() {
    for p in files("fixtures/kripke") {
        let bytes = fs::read(&p).unwrap();
        let k = load_kripke(&bytes).unwrap();
        assert_eq!(save_kripke(&k), bytes, "{}", p.display());
        let serial = validate_kripke(&k, false).is_empty();
        assert_eq!(serial, !p.ends_with("dead_end.json"), "{}", p.display());
    }
    let clusters = load_kripke(&fs::read(root().join("fixtures/kripke/clusters.json")).unwrap()).unwrap();
    assert!(validate_kripke(&clusters, true).is_empty());
}

#[test]
fn trace_fixtures_check() {
    for p in files("fixtures/traces") {
        let tr = ProofTrace::from_jsonl(&text(&p)).unwrap();
        assert!(tr.check().is_valid(), "{}: {}", p.display(), tr.check());
        assert_eq!(tr.to_jsonl(), text(&p));
    }
}

#[test]
fn formula_fixtures_parse() {
    for p in files("fixtures/formulas") {
        let f: Formula = text(&p).trim().parse().unwrap();
        assert_eq!(f.to_string().parse::<Formula>().unwrap(), f);
    }
}

#[test]
fn fuzz_seeds_survive_their_targets() {
    for p in files("fuzz/corpus/parse_formula") {
        let f: Formula = text(&p).parse().unwrap();
        assert_eq!(f.to_string().parse::<Formula>().unwrap(), f);
    }
    for p in files("fuzz/corpus/parse_kformula") {
        let phi: KFormula = text(&p).parse().unwrap();
        assert_eq!(phi.to_string().parse::<KFormula>().unwrap(), phi);
    }
    for p in files("fuzz/corpus/load_model") {
        let m = load(&fs::read(&p).unwrap()).unwrap();
        assert_eq!(load(&save(&m)).unwrap(), m);
    }
    for p in files("fuzz/corpus/load_kripke") {
        let k = load_kripke(&fs::read(&p).unwrap()).unwrap();
        assert_eq!(load_kripke(&save_kripke(&k)).unwrap(), k);
    }
    for p in files("fuzz/corpus/parse_trace") {
        let tr = ProofTrace::from_jsonl(&text(&p)).unwrap();
        assert_eq!(ProofTrace::from_jsonl(&tr.to_jsonl()).unwrap(), tr);
    }
}
