#![no_main]

use aleatoric::model::{load, save};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = load(data) {
        let bytes = save(&m);
        assert_eq!(load(&bytes).ok().as_ref(), Some(&m));
        let _ = m.validate();
    }
});
