#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(tokens) = mzn_autogen::tokenize(text) {
            for t in tokens {
                assert!(t.start <= t.end && t.end <= text.len());
            }
        }
    }
});
