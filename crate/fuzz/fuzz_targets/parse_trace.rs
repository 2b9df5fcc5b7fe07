#![no_main]

use aleatoric::proof::ProofTrace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = ProofTrace::from_jsonl(text) {
        let _ = trace.check();
        assert_eq!(ProofTrace::from_jsonl(&trace.to_jsonl()).ok().as_ref(), Some(&trace));
    }
});
