#![no_main]

use aleatoric::model::{load_kripke, save_kripke, validate_kripke};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(k) = load_kripke(data) {
        assert_eq!(save_kripke(&load_kripke(&save_kripke(&k)).unwrap()), save_kripke(&k));
        let _ = validate_kripke(&k, true);
    }
});
