#![no_main]

use libfuzzer_sys::fuzz_target;
use mzn_autogen::config::{parse_spec, BackendConfig};

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = BackendConfig::parse(&text);
    if let Ok(spec) = parse_spec(&text) {
        spec.validate().expect("parsed specs are valid");
    }
});
