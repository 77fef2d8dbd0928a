#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(model) = mzn_autogen::extract_model_text(&text) {
        assert!(!model.trim().is_empty());
        assert!(!model.contains("Me:"));
    }
    if let Ok(instruction) = mzn_autogen::build_repair_instruction(&text) {
        assert!(instruction.content.contains(text.as_ref()));
    }
});
