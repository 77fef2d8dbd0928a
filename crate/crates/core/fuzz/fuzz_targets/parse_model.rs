#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    match mzn_autogen::parse_model(&text) {
        Ok(ast) => {
            let diagnostics = mzn_autogen::validate(&ast);
            for spec in mzn_autogen::builtin_instances() {
                let _ = mzn_autogen::check_conformance(&ast, &spec);
            }
            let _ = diagnostics;
        }
        Err(diagnostics) => assert!(diagnostics.iter().any(|d| d.is_error())),
    }
});
