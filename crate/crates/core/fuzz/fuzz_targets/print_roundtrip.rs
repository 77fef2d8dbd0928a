#![no_main]

use libfuzzer_sys::fuzz_target;
use mzn_autogen::{parse_model, print_model};

// Anything that parses must survive print -> parse unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(ast) = parse_model(text) else { return };
    let printed = print_model(&ast);
    let again = parse_model(&printed).expect("printed model parses");
    assert_eq!(again, ast);
    assert_eq!(print_model(&again), printed);
});
