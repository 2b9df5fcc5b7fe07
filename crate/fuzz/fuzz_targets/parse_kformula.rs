#![no_main]

use aleatoric::kbridge::KFormula;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(phi) = text.parse::<KFormula>() {
        assert_eq!(phi.to_string().parse::<KFormula>().ok().as_ref(), Some(&phi));
    }
});
