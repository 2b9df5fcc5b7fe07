#![no_main]

use aleatoric::Formula;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = text.parse::<Formula>() {
        let printed = f.to_string();
        assert_eq!(printed.parse::<Formula>().ok().as_ref(), Some(&f), "{printed}");
        let _ = f.desugar();
    }
});
